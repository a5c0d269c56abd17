//! Divergence-form operators on singular meshes.
//!
//! Two-point-flux finite volumes on the tensor grid give a symmetric
//! M-matrix, which is what underwrites the discrete maximum principle used by
//! the resolvent and evolution modules. Dirichlet singular faces enter with a
//! ghost value of zero (the vanishing trace of the singular end); Neumann
//! faces carry no flux.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{BoundaryFlag, SingularMesh};
use crate::linalg::SparseOperator;
#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::{Error, Result};

/// Real nodal values on the cells of a [`SingularMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(mesh: &SingularMesh) -> Self {
        Self { values: vec![0.0; mesh.n_cells()] }
    }

    pub fn constant(mesh: &SingularMesh, c: f64) -> Self {
        Self { values: vec![c; mesh.n_cells()] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Evaluate a function of the cell center on every cell.
    pub fn from_fn(mesh: &SingularMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..mesh.n_cells())
            .map(|i| {
                let (t, theta) = mesh.cell_center(i);
                f(t, theta)
            })
            .collect();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }
    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }
}

impl core::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn check_cells(mesh: &SingularMesh, len: usize) -> Result<()> {
    if len != mesh.n_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.n_cells(), got: len });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gradient / divergence
// ---------------------------------------------------------------------------

/// Two-point flux gradient across each face, oriented from `cell_a` outward.
/// Dirichlet faces see a ghost value of zero; Neumann faces get a zero
/// gradient.
pub fn discrete_gradient(mesh: &SingularMesh, u: &ScalarField) -> Result<Vec<f64>> {
    check_cells(mesh, u.len())?;
    let mut g = Vec::with_capacity(mesh.faces().len());
    for face in mesh.faces() {
        let ua = u[face.cell_a];
        let value = match (face.cell_b, face.flag) {
            (Some(b), _) => (u[b] - ua) / face.dist,
            (None, BoundaryFlag::DirichletSingular) => (0.0 - ua) / face.dist,
            (None, _) => 0.0,
        };
        g.push(value);
    }
    Ok(g)
}

/// Divergence of a per-face flux field, as signed face sums divided by the
/// cell measure. The adjoint identity `<grad u, F>_faces = -<u, div F>_cells`
/// holds exactly for `F` vanishing on boundary faces, with the face measure
/// `area * dist`.
pub fn discrete_divergence(mesh: &SingularMesh, flux: &[f64]) -> Result<ScalarField> {
    if flux.len() != mesh.faces().len() {
        return Err(Error::DimensionMismatch { expected: mesh.faces().len(), got: flux.len() });
    }
    let mut div = vec![0.0; mesh.n_cells()];
    for (face, &f) in mesh.faces().iter().zip(flux) {
        div[face.cell_a] += f * face.area;
        if let Some(b) = face.cell_b {
            div[b] -= f * face.area;
        }
    }
    let measures = mesh.volume_weights();
    for i in 0..div.len() {
        div[i] /= measures[i];
    }
    Ok(ScalarField::from_values(div))
}

/// Mass-weighted inner product of two per-face fields, with face measure
/// `area * dist`.
pub fn face_inner(mesh: &SingularMesh, f: &[f64], g: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, face) in mesh.faces().iter().enumerate() {
        acc += face.area * face.dist * f[i] * g[i];
    }
    acc
}

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

/// Per-face diffusion coefficient with its constant/perturbation split.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    face_values: Vec<f64>,
    constant_part: f64,
    perturbation: Vec<f64>,
    /// Recorded decay data for coefficients built from a state that vanishes
    /// toward the singular end: `|a - C| <= bound * rho^|exponent|` per face.
    decay: Option<CoefficientDecay>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientDecay {
    pub exponent: f64,
    pub bound: f64,
}

impl Coefficient {
    pub fn constant(mesh: &SingularMesh, value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::CoefficientNotPositive { inf_a: value });
        }
        let n = mesh.faces().len();
        Ok(Self {
            face_values: vec![value; n],
            constant_part: value,
            perturbation: vec![0.0; n],
            decay: None,
        })
    }

    /// Wrap explicit per-face values; the constant part is the minimum.
    pub fn from_face_values(mesh: &SingularMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.faces().len() {
            return Err(Error::DimensionMismatch {
                expected: mesh.faces().len(),
                got: values.len(),
            });
        }
        let inf_a = values.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        if !(inf_a > 0.0) {
            return Err(Error::CoefficientNotPositive { inf_a });
        }
        let perturbation = values.iter().map(|v| v - inf_a).collect();
        Ok(Self { face_values: values, constant_part: inf_a, perturbation, decay: None })
    }

    /// `a = base + scale * rho` evaluated per face.
    pub fn constant_plus_rho(mesh: &SingularMesh, base: f64, scale: f64) -> Result<Self> {
        let values: Vec<f64> = mesh.faces().iter().map(|f| base + scale * f.rho).collect();
        let mut coeff = Self::from_face_values(mesh, values)?;
        coeff.constant_part = base;
        coeff.perturbation = mesh.faces().iter().map(|f| scale * f.rho).collect();
        coeff.decay = Some(CoefficientDecay { exponent: -1.0, bound: scale.abs() });
        Ok(coeff)
    }

    pub fn face_values(&self) -> &[f64] {
        &self.face_values
    }
    pub fn constant_part(&self) -> f64 {
        self.constant_part
    }
    pub fn perturbation(&self) -> &[f64] {
        &self.perturbation
    }
    pub fn decay(&self) -> Option<CoefficientDecay> {
        self.decay
    }
    pub fn a_min(&self) -> f64 {
        self.face_values.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }
    pub fn a_max(&self) -> f64 {
        self.face_values.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
    }
}

/// Freeze the porous-medium coefficient `a = |u* + u|^{n-1}` at a state `u`.
///
/// Face values average the adjacent cells (boundary faces use their single
/// cell). Requires `||u||_inf < |u*|`, which bounds the coefficient away from
/// zero by `(|u*| - ||u||_inf)^{n-1}`. Records the constant part
/// `|u*|^{n-1}`, the perturbation, and its empirical `rho`-decay bound.
pub fn coefficient_from_state(
    mesh: &SingularMesh,
    u_star: f64,
    u: &ScalarField,
    n: f64,
) -> Result<Coefficient> {
    check_cells(mesh, u.len())?;
    if !(n > 0.0) {
        return Err(Error::InvalidArgument { reason: format!("n = {n} must be positive") });
    }
    let sup = mesh.norm_linf(u.values());
    if !(sup < u_star.abs()) {
        return Err(Error::BallConditionViolated { sup_norm: sup, bound: u_star.abs() });
    }
    let constant_part = u_star.abs().powf(n - 1.0);
    let mut face_values = Vec::with_capacity(mesh.faces().len());
    let mut perturbation = Vec::with_capacity(mesh.faces().len());
    let mut bound = 0.0f64;
    for face in mesh.faces() {
        let ubar = match face.cell_b {
            Some(b) => 0.5 * (u[face.cell_a] + u[b]),
            None => u[face.cell_a],
        };
        let a = (u_star + ubar).abs().powf(n - 1.0);
        let hat = a - constant_part;
        bound = bound.max(hat.abs() / face.rho);
        face_values.push(a);
        perturbation.push(hat);
    }
    Ok(Coefficient {
        face_values,
        constant_part,
        perturbation,
        decay: Some(CoefficientDecay { exponent: -1.0, bound }),
    })
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Assemble the stiffness matrix of `-div(a grad .)` in the mass inner
/// product: `u^T A v` is the Dirichlet form, and the operator itself is
/// `M^{-1} A` with `M` the diagonal of cell measures (attached to the
/// returned matrix).
pub fn assemble_divergence_form(mesh: &SingularMesh, a: &Coefficient) -> Result<SparseOperator> {
    let inf_a = a.a_min();
    if !(inf_a > 0.0) {
        return Err(Error::CoefficientNotPositive { inf_a });
    }
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * mesh.faces().len());
    for (face, &af) in mesh.faces().iter().zip(a.face_values()) {
        let w = af * face.area / face.dist;
        match (face.cell_b, face.flag) {
            (Some(b), _) => {
                let c = face.cell_a;
                triplets.push((c, c, w));
                triplets.push((b, b, w));
                triplets.push((c, b, -w));
                triplets.push((b, c, -w));
            }
            (None, BoundaryFlag::DirichletSingular) => {
                triplets.push((face.cell_a, face.cell_a, w));
            }
            (None, _) => {} // Neumann: no flux
        }
    }
    SparseOperator::from_triplets(
        mesh.n_cells(),
        &triplets,
        Some(mesh.volume_weights().to_vec()),
    )
}

/// Convenience: the Laplace-Beltrami stiffness (`a = 1`).
pub fn assemble_laplacian(mesh: &SingularMesh) -> Result<SparseOperator> {
    assemble_divergence_form(mesh, &Coefficient::constant(mesh, 1.0)?)
}

// ---------------------------------------------------------------------------
// Weighted norms
// ---------------------------------------------------------------------------

/// The weighted norm `(sum_{i<=k} || rho^{theta+i} |grad^i u| ||_p^p)^{1/p}`
/// for scalar fields, `k <= 1`. Pass `p = f64::INFINITY` for the sup variant.
/// The `i = 1` term uses the per-face two-point gradient with face measure
/// `area * dist`.
pub fn weighted_norm(
    mesh: &SingularMesh,
    u: &ScalarField,
    k: usize,
    p: f64,
    theta: f64,
) -> Result<f64> {
    check_cells(mesh, u.len())?;
    if k >= 2 {
        return Err(Error::UnsupportedNormOrder { k });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidNormExponent { p });
    }
    let rho = mesh.rho();
    let measures = mesh.volume_weights();
    let infinite = p.is_infinite();

    let mut cell_term = 0.0f64;
    for i in 0..u.len() {
        let w = rho[i].powf(theta) * u[i].abs();
        if infinite {
            cell_term = cell_term.max(w);
        } else {
            cell_term += w.powf(p) * measures[i];
        }
    }
    if k == 0 {
        return Ok(if infinite { cell_term } else { cell_term.powf(1.0 / p) });
    }

    let grad = discrete_gradient(mesh, u)?;
    let mut face_term = 0.0f64;
    for (i, face) in mesh.faces().iter().enumerate() {
        let w = face.rho.powf(theta + 1.0) * grad[i].abs();
        if infinite {
            face_term = face_term.max(w);
        } else {
            face_term += w.powf(p) * face.area * face.dist;
        }
    }
    Ok(if infinite { cell_term.max(face_term) } else { (cell_term + face_term).powf(1.0 / p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, CuspCharacteristic, GeometryConfig};
    use crate::linalg::{smallest_eigenpair, spmv};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wedge_mesh(n: usize) -> crate::geometry::SingularMesh {
        let config = GeometryConfig::wedge(1.0, core::f64::consts::TAU, CuspCharacteristic::cone());
        build_mesh(&config, n, n).unwrap()
    }

    #[test]
    fn gradient_of_constants_vanishes_on_neumann_interval() {
        let config = GeometryConfig::neumann_interval(1.0);
        let mesh = build_mesh(&config, 8, 1).unwrap();
        let u = ScalarField::constant(&mesh, 3.5);
        let g = discrete_gradient(&mesh, &u).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_is_exact_for_linear_fields() {
        let config = GeometryConfig::neumann_interval(1.0);
        let mesh = build_mesh(&config, 16, 1).unwrap();
        let u = ScalarField::from_fn(&mesh, |t, _| t);
        let g = discrete_gradient(&mesh, &u).unwrap();
        for (face, &gf) in mesh.faces().iter().zip(&g) {
            if face.flag == BoundaryFlag::Interior {
                assert_relative_eq!(gf, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gradient_divergence_adjoint_identity() {
        let mesh = wedge_mesh(8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = ScalarField::from_values(
            (0..mesh.n_cells()).map(|_| rng.random::<f64>() - 0.5).collect(),
        );
        // Random flux supported away from boundary faces.
        let flux: Vec<f64> = mesh
            .faces()
            .iter()
            .map(|f| {
                if f.cell_b.is_some() {
                    rng.random::<f64>() - 0.5
                } else {
                    0.0
                }
            })
            .collect();
        let grad = discrete_gradient(&mesh, &u).unwrap();
        let div = discrete_divergence(&mesh, &flux).unwrap();
        let lhs = face_inner(&mesh, &grad, &flux);
        let rhs = -mesh.inner(u.values(), div.values());
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
            "adjoint identity violated: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn assembly_is_symmetric_and_positive() {
        let mesh = wedge_mesh(8);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let values: Vec<f64> =
            mesh.faces().iter().map(|_| 1.0 + rng.random::<f64>()).collect();
        let coeff = Coefficient::from_face_values(&mesh, values).unwrap();
        let a = assemble_divergence_form(&mesh, &coeff).unwrap();
        assert!(a.symmetry_deviation() <= 1e-12);
        for _ in 0..100 {
            let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.random::<f64>() - 0.5).collect();
            let au = spmv(&a, &u).unwrap();
            let mut quad = 0.0;
            for i in 0..u.len() {
                quad += au[i] * u[i];
            }
            assert!(quad >= -1e-12, "quadratic form must be nonnegative, got {quad}");
        }
    }

    #[test]
    fn interior_rows_annihilate_constants() {
        let config = GeometryConfig::wedge(1.0, core::f64::consts::TAU, CuspCharacteristic::cone());
        let mesh = build_mesh(&config, 4, 4).unwrap();
        let a = assemble_laplacian(&mesh).unwrap();
        let ones = vec![1.0; mesh.n_cells()];
        let row_sums = spmv(&a, &ones).unwrap();
        for idx in 0..mesh.n_cells() {
            let (i_t, _) = mesh.cell_coords(idx);
            if i_t == 0 {
                assert!(row_sums[idx] > 0.0, "Dirichlet-adjacent rows keep boundary flux");
            } else {
                assert!(
                    row_sums[idx].abs() <= 1e-12 * mesh.n_cells() as f64,
                    "interior row {idx} sums to {}",
                    row_sums[idx]
                );
            }
        }
    }

    #[test]
    fn assembly_is_linear_in_the_coefficient() {
        let mesh = wedge_mesh(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v1: Vec<f64> = mesh.faces().iter().map(|_| 1.0 + rng.random::<f64>()).collect();
        let v2: Vec<f64> = mesh.faces().iter().map(|_| 1.0 + rng.random::<f64>()).collect();
        let sum: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
        let a1 = assemble_divergence_form(
            &mesh,
            &Coefficient::from_face_values(&mesh, v1).unwrap(),
        )
        .unwrap();
        let a2 = assemble_divergence_form(
            &mesh,
            &Coefficient::from_face_values(&mesh, v2).unwrap(),
        )
        .unwrap();
        let a12 = assemble_divergence_form(
            &mesh,
            &Coefficient::from_face_values(&mesh, sum).unwrap(),
        )
        .unwrap();
        let x: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.random::<f64>() - 0.5).collect();
        let y1 = spmv(&a1, &x).unwrap();
        let y2 = spmv(&a2, &x).unwrap();
        let y12 = spmv(&a12, &x).unwrap();
        let scale = y12.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..x.len() {
            assert!((y12[i] - y1[i] - y2[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn doubling_the_coefficient_doubles_the_operator() {
        let mesh = wedge_mesh(6);
        let a1 = assemble_laplacian(&mesh).unwrap();
        let a2 = assemble_divergence_form(&mesh, &Coefficient::constant(&mesh, 2.0).unwrap())
            .unwrap();
        let x: Vec<f64> = (0..mesh.n_cells()).map(|i| (i as f64 * 0.37).sin()).collect();
        let y1 = spmv(&a1, &x).unwrap();
        let y2 = spmv(&a2, &x).unwrap();
        for i in 0..x.len() {
            assert_relative_eq!(y2[i], 2.0 * y1[i], max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn dirichlet_neumann_laplacian_reaches_the_quarter_wave_eigenvalue() {
        // The ground state of the wedge cylinder is axial, so lambda_min of
        // the a=1 operator converges to (pi/2)^2 under refinement.
        let mesh = wedge_mesh(64);
        let a = assemble_laplacian(&mesh).unwrap();
        let e = smallest_eigenpair(&a, mesh.volume_weights(), 1e-9).unwrap();
        let expected = core::f64::consts::FRAC_PI_2.powi(2);
        assert!(
            (e.value - expected).abs() <= 0.01 * expected,
            "lambda = {} vs {}",
            e.value,
            expected
        );
    }

    #[test]
    fn quadratic_form_is_coercive_above_the_unit_gap() {
        // <A_a u, u> >= a_min * lambda_min(A_1) * ||u||_{2,M}^2 on meshes
        // with a Dirichlet face.
        let mesh = wedge_mesh(12);
        let a_one = assemble_laplacian(&mesh).unwrap();
        let gap = smallest_eigenpair(&a_one, mesh.volume_weights(), 1e-10).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let values: Vec<f64> =
            mesh.faces().iter().map(|_| 1.0 + rng.random::<f64>()).collect();
        let coeff = Coefficient::from_face_values(&mesh, values).unwrap();
        let a_min = coeff.a_min();
        let a = assemble_divergence_form(&mesh, &coeff).unwrap();
        for _ in 0..50 {
            let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.random::<f64>() - 0.5).collect();
            let au = spmv(&a, &u).unwrap();
            let mut quad = 0.0;
            for i in 0..u.len() {
                quad += au[i] * u[i];
            }
            let norm_sq = mesh.inner(&u, &u);
            assert!(
                quad >= a_min * gap * norm_sq * (1.0 - 1e-8),
                "coercivity violated: {quad} < {}",
                a_min * gap * norm_sq
            );
        }
    }

    #[test]
    fn weighted_norm_trivial_and_quadrature_cases() {
        // rho = R(t) = t across the whole cylinder (collar reaches the cap).
        let config = GeometryConfig {
            singular_radius: 1.0,
            blend_width: 0.05,
            ..GeometryConfig::wedge(1.0, core::f64::consts::TAU, CuspCharacteristic::cone())
        };
        let mesh = build_mesh(&config, 128, 8).unwrap();
        let one = ScalarField::constant(&mesh, 1.0);

        assert_relative_eq!(
            weighted_norm(&mesh, &one, 0, f64::INFINITY, 0.0).unwrap(),
            1.0,
            max_relative = 1e-13
        );

        // integral of rho dmu ~ circumference/2, up to the O(bw^2) blend.
        let n = weighted_norm(&mesh, &one, 0, 1.0, 1.0).unwrap();
        let expected = core::f64::consts::TAU / 2.0;
        assert!(
            (n - expected).abs() <= 6e-3 * expected,
            "weighted L1 mass {n} vs midpoint value {expected}"
        );
    }

    #[test]
    fn weighted_norms_are_monotone_in_the_weight_exponent() {
        let mesh = wedge_mesh(12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u = ScalarField::from_values(
                (0..mesh.n_cells()).map(|_| rng.random::<f64>() - 0.5).collect(),
            );
            for &p in &[1.0, 2.0, f64::INFINITY] {
                let hi = weighted_norm(&mesh, &u, 1, p, 0.5).unwrap();
                let lo = weighted_norm(&mesh, &u, 1, p, -0.5).unwrap();
                // rho <= 1, so larger exponents shrink the norm.
                assert!(hi <= lo * (1.0 + 1e-12), "p = {p}: {hi} > {lo}");
            }
        }
    }

    #[test]
    fn weighted_norm_rejects_higher_orders() {
        let mesh = wedge_mesh(4);
        let u = ScalarField::zeros(&mesh);
        assert!(matches!(
            weighted_norm(&mesh, &u, 2, 2.0, 0.0),
            Err(Error::UnsupportedNormOrder { k: 2 })
        ));
    }

    #[test]
    fn coefficient_from_state_closed_forms() {
        let mesh = wedge_mesh(6);
        let zero = ScalarField::zeros(&mesh);
        let c = coefficient_from_state(&mesh, 2.0, &zero, 3.0).unwrap();
        for &a in c.face_values() {
            assert_relative_eq!(a, 4.0, max_relative = 1e-14);
        }
        assert_relative_eq!(c.constant_part(), 4.0, max_relative = 1e-14);

        let half = ScalarField::constant(&mesh, 0.5);
        let c = coefficient_from_state(&mesh, 1.0, &half, 2.0).unwrap();
        for &a in c.face_values() {
            assert_relative_eq!(a, 1.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn coefficient_from_state_enforces_the_ball_condition() {
        let mesh = wedge_mesh(6);
        let too_big = ScalarField::constant(&mesh, 1.5);
        assert!(matches!(
            coefficient_from_state(&mesh, 1.0, &too_big, 2.0),
            Err(Error::BallConditionViolated { .. })
        ));
    }

    #[test]
    fn coefficient_perturbation_decays_with_rho() {
        // u = 0.3 * rho decays toward the singular end; for n = 2 the
        // perturbation is the face average of u, bounded by 0.3 * rho_face.
        let mesh = wedge_mesh(16);
        let rho = mesh.rho().to_vec();
        let u = ScalarField::from_values(rho.iter().map(|r| 0.3 * r).collect());
        let c = coefficient_from_state(&mesh, 1.0, &u, 2.0).unwrap();
        let decay = c.decay().unwrap();
        assert!(decay.bound <= 0.3 + 1e-12, "recorded bound {}", decay.bound);
        for (face, &hat) in mesh.faces().iter().zip(c.perturbation()) {
            assert!(hat.abs() <= 0.3 * face.rho + 1e-12);
        }
        // Coefficient invariants hold.
        assert!(c.a_min() >= (1.0 - 0.3f64).powf(1.0) - 1e-12);
    }
}
