//! Cusp profiles, singularity functions and finite-volume meshes.
//!
//! The two production geometries are a wedge cylinder (a stretched cylinder
//! `(0, T] x S^1` whose missing end at `t = 0` carries the cusp profile `R`)
//! and a slit torus (a flat torus cut along a codimension-1 circle, with the
//! singularity function vanishing like `d^beta` toward the slit). A 1-D
//! all-Neumann interval exists for tests only.
//!
//! Meshes are cell-centered tensor grids in stretched coordinates, so the
//! metric weights are unit and the singular end shows up as a Dirichlet
//! boundary (ghost value zero) plus the per-cell weight `rho`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::{Error, Result};

/// Default guard against accidentally huge meshes.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 22;

const ENDPOINT_TOL: f64 = 1e-12;
/// Smallest abscissa probed when classifying a profile.
const T_PROBE_MIN: f64 = 9.5367431640625e-7; // 2^-20
/// Fitted log-slope below which the integral `int dt/R` is declared finite.
const LOG_SLOPE_FLOOR: f64 = 0.05;
/// Sampled |R'| above this is treated as unbounded.
const DERIVATIVE_CAP: f64 = 1e6;

// ---------------------------------------------------------------------------
// Cusp characteristics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum CuspKind {
    /// R(t) = t.
    Cone,
    /// R(t) = t^k, k >= 1.
    Power(f64),
    /// Piecewise-linear interpolant of `(t, R)` samples, constant outside the
    /// sampled range.
    Tabulated(Vec<(f64, f64)>),
}

/// A profile `R` on `(0, 1]` describing how a cusp end pinches off.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspCharacteristic {
    kind: CuspKind,
}

impl CuspCharacteristic {
    /// The cone profile `R(t) = t`.
    pub fn cone() -> Self {
        Self { kind: CuspKind::Cone }
    }

    /// The power profile `R(t) = t^k`. Exponents below 1 are rejected; the
    /// quadrature and trace arguments downstream need `R' ` bounded.
    pub fn power(k: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::CuspExponentTooSmall { k });
        }
        Ok(Self { kind: CuspKind::Power(k) })
    }

    /// A tabulated profile. Samples must be strictly increasing in `t`,
    /// strictly positive in both coordinates, stay within `(0, 1]`, and end at
    /// `(1, 1)` (value within 1e-12).
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidTabulatedProfile {
                reason: String::from("need at least two samples"),
            });
        }
        for (i, &(t, r)) in samples.iter().enumerate() {
            if !t.is_finite() || !r.is_finite() || t <= 0.0 || r <= 0.0 {
                return Err(Error::InvalidTabulatedProfile {
                    reason: format!("sample {i} = ({t}, {r}) is not strictly positive"),
                });
            }
            if r > 1.0 + ENDPOINT_TOL {
                return Err(Error::InvalidTabulatedProfile {
                    reason: format!("sample {i} has R = {r} > 1"),
                });
            }
            if i > 0 && t <= samples[i - 1].0 {
                return Err(Error::InvalidTabulatedProfile {
                    reason: format!("abscissae not strictly increasing at sample {i}"),
                });
            }
        }
        let (t_last, r_last) = *samples.last().expect("len checked");
        if (t_last - 1.0).abs() > ENDPOINT_TOL || (r_last - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidTabulatedProfile {
                reason: format!("final sample ({t_last}, {r_last}) must be (1, 1)"),
            });
        }
        Ok(Self { kind: CuspKind::Tabulated(samples) })
    }

    /// Evaluate `R(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            CuspKind::Cone => t,
            CuspKind::Power(k) => t.powf(*k),
            CuspKind::Tabulated(samples) => {
                let first = samples[0];
                if t <= first.0 {
                    return first.1;
                }
                let last = samples[samples.len() - 1];
                if t >= last.0 {
                    return last.1;
                }
                let hi = samples.partition_point(|&(s, _)| s < t);
                let (t0, r0) = samples[hi - 1];
                let (t1, r1) = samples[hi];
                r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Evaluate the derivative `R'(t)` (piecewise-constant slopes for
    /// tabulated profiles, zero outside the sampled range).
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            CuspKind::Cone => 1.0,
            CuspKind::Power(k) => k * t.powf(k - 1.0),
            CuspKind::Tabulated(samples) => {
                if t <= samples[0].0 || t >= samples[samples.len() - 1].0 + ENDPOINT_TOL {
                    if t >= samples[samples.len() - 1].0 + ENDPOINT_TOL {
                        return 0.0;
                    }
                    if t <= samples[0].0 {
                        return 0.0;
                    }
                }
                let hi = samples.partition_point(|&(s, _)| s < t).min(samples.len() - 1).max(1);
                let (t0, r0) = samples[hi - 1];
                let (t1, r1) = samples[hi];
                (r1 - r0) / (t1 - t0)
            }
        }
    }

    /// Number of samples for tabulated profiles.
    pub fn sample_count(&self) -> Option<usize> {
        match &self.kind {
            CuspKind::Tabulated(s) => Some(s.len()),
            _ => None,
        }
    }
}

/// Outcome of classifying a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspClass {
    NotCusp,
    Cusp,
    UniformlyMildCusp,
}

impl CuspClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CuspClass::NotCusp => "not_cusp",
            CuspClass::Cusp => "cusp",
            CuspClass::UniformlyMildCusp => "uniformly_mild_cusp",
        }
    }
}

/// Diagnostic report produced by [`validate_cusp_characteristic`].
#[derive(Debug, Clone, PartialEq)]
pub struct CuspValidation {
    /// `R(1) = 1` and `R` vanishes toward 0.
    pub endpoints_ok: bool,
    /// `int dt / R` grows at least logarithmically toward 0.
    pub integral_diverges: bool,
    /// Sampled `|R'|` stays below a fixed cap.
    pub derivative_bounded: bool,
    /// `R'` is pinched between positive constants.
    pub uniformly_mild: bool,
    /// Least-squares slope of `int_eps^1 dt/R` against `ln(1/eps)`.
    pub log_slope: f64,
    pub max_derivative: f64,
    pub min_derivative: f64,
    pub class: CuspClass,
}

/// Classify a profile against the four defining conditions: endpoint values,
/// divergence of `int dt/R`, boundedness of `R'`, and the two-sided pinch
/// `R' ~ 1` that distinguishes uniformly mild cusps.
///
/// Divergence is diagnosed by evaluating `I(eps) = int_eps^1 dt/R` on dyadic
/// `eps = 2^-4 .. 2^-20` and fitting the tail against `ln(1/eps)`; a fitted
/// slope of at least 0.05 counts as divergent.
pub fn validate_cusp_characteristic(
    profile: &CuspCharacteristic,
    quad_points: usize,
) -> Result<CuspValidation> {
    if quad_points < 64 {
        return Err(Error::InvalidArgument {
            reason: format!("quad_points = {quad_points}, need >= 64"),
        });
    }
    if let Some(samples) = profile.sample_count() {
        if samples < 8 {
            return Err(Error::ProfileTooCoarse { samples });
        }
    }

    // (i) endpoints
    let endpoints_ok =
        (profile.eval(1.0) - 1.0).abs() <= ENDPOINT_TOL && profile.eval(T_PROBE_MIN) <= 0.01;

    // (ii) divergence of int dt/R via dyadic tail slope. Integrate in
    // log-coordinates: int_a^b dt/R = int e^s / R(e^s) ds, midpoint rule.
    let band_integral = |a: f64, b: f64| -> f64 {
        let sa = a.ln();
        let sb = b.ln();
        let h = (sb - sa) / quad_points as f64;
        let mut acc = 0.0;
        for i in 0..quad_points {
            let s = sa + (i as f64 + 0.5) * h;
            let t = s.exp();
            acc += t / profile.eval(t) * h;
        }
        acc
    };
    let js = 4..=20usize;
    let mut integrals = Vec::new();
    let mut upper = 1.0;
    let mut total = 0.0;
    for j in js.clone() {
        let eps = 2.0f64.powi(-(j as i32));
        total += band_integral(eps, upper);
        integrals.push((2.0f64.ln() * j as f64, total));
        upper = eps;
    }
    // Least-squares slope over the tail (j = 12..20).
    let tail: Vec<&(f64, f64)> = integrals.iter().skip(8).collect();
    let m = tail.len() as f64;
    let sx: f64 = tail.iter().map(|p| p.0).sum();
    let sy: f64 = tail.iter().map(|p| p.1).sum();
    let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
    let log_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let integral_diverges = log_slope >= LOG_SLOPE_FLOOR;

    // (iii)/(iv) derivative samples on a log grid down to the probe floor.
    let n_samples = 512usize;
    let s_lo = T_PROBE_MIN.ln();
    let mut max_d = f64::NEG_INFINITY;
    let mut min_d = f64::INFINITY;
    for i in 0..=n_samples {
        let s = s_lo * (1.0 - i as f64 / n_samples as f64);
        let d = profile.derivative(s.exp());
        if !d.is_finite() {
            max_d = f64::INFINITY;
            min_d = f64::NEG_INFINITY;
            break;
        }
        max_d = max_d.max(d.abs());
        min_d = min_d.min(d.abs());
    }
    let derivative_bounded = max_d.is_finite() && max_d <= DERIVATIVE_CAP;
    let uniformly_mild = derivative_bounded && min_d >= 0.1 * max_d;

    let class = if endpoints_ok && integral_diverges && derivative_bounded {
        if uniformly_mild {
            CuspClass::UniformlyMildCusp
        } else {
            CuspClass::Cusp
        }
    } else {
        CuspClass::NotCusp
    };

    Ok(CuspValidation {
        endpoints_ok,
        integral_diverges,
        derivative_bounded,
        uniformly_mild,
        log_slope,
        max_derivative: max_d,
        min_derivative: min_d,
        class,
    })
}

// ---------------------------------------------------------------------------
// Geometry configuration
// ---------------------------------------------------------------------------

/// The supported mesh shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshShape {
    /// `(0, T] x S^1` with a Dirichlet singular end at `t = 0` and a Neumann
    /// cap at `t = T`.
    WedgeCylinder,
    /// A flat torus slit along the circle `{t = 0}`; both sides of the slit
    /// are Dirichlet.
    SlitTorus,
    /// 1-D interval with Neumann ends; test geometry without singular faces.
    NeumannInterval,
}

impl MeshShape {
    pub fn as_str(self) -> &'static str {
        match self {
            MeshShape::WedgeCylinder => "wedge_cylinder",
            MeshShape::SlitTorus => "slit_torus",
            MeshShape::NeumannInterval => "neumann_interval",
        }
    }
}

/// Everything needed to build a mesh and its singularity function.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub shape: MeshShape,
    /// Axial extent of the cylinder / slit-normal extent of the torus.
    pub t_len: f64,
    /// Arclength of the S^1 cross-section.
    pub circumference: f64,
    /// Cusp profile `R` used on the wedge end.
    pub cusp: CuspCharacteristic,
    /// Collar radius: the singularity function follows its model formula for
    /// coordinates below `singular_radius - blend_width` and equals 1 beyond
    /// `singular_radius`.
    pub singular_radius: f64,
    /// Exponent of the removable singularity (`rho = d^beta` near the slit).
    pub beta: f64,
    /// Width of the C^1 blend between the collar formula and 1.
    pub blend_width: f64,
}

impl GeometryConfig {
    /// A wedge cylinder with the given profile; collar covers the inner half.
    pub fn wedge(t_len: f64, circumference: f64, cusp: CuspCharacteristic) -> Self {
        let r = 0.5 * t_len.min(1.0);
        Self {
            shape: MeshShape::WedgeCylinder,
            t_len,
            circumference,
            cusp,
            singular_radius: r,
            beta: 1.0,
            blend_width: r / 4.0,
        }
    }

    /// A slit torus of extents `t_len x circumference` with `rho = d^beta`
    /// near the slit.
    pub fn slit_torus(t_len: f64, circumference: f64, beta: f64) -> Self {
        let r = (0.5 * t_len).min(1.0) * 0.5;
        Self {
            shape: MeshShape::SlitTorus,
            t_len,
            circumference,
            cusp: CuspCharacteristic::cone(),
            singular_radius: r,
            beta,
            blend_width: r / 4.0,
        }
    }

    /// The 1-D all-Neumann test interval.
    pub fn neumann_interval(t_len: f64) -> Self {
        Self {
            shape: MeshShape::NeumannInterval,
            t_len,
            circumference: 1.0,
            cusp: CuspCharacteristic::cone(),
            singular_radius: 0.5 * t_len.min(1.0),
            beta: 1.0,
            blend_width: 0.125 * t_len.min(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidGeometry { reason });
        if !(self.t_len > 0.0) {
            return fail(format!("t_len = {} must be positive", self.t_len));
        }
        if !(self.circumference > 0.0) {
            return fail(format!("circumference = {} must be positive", self.circumference));
        }
        if !(self.beta >= 1.0) {
            return fail(format!("beta = {} must be >= 1", self.beta));
        }
        let r = self.singular_radius;
        if !(r > 0.0) {
            return fail(format!("singular_radius = {r} must be positive"));
        }
        // The profile R lives on (0, 1], so collars cannot extend past 1.
        let r_cap = match self.shape {
            MeshShape::SlitTorus => (0.5 * self.t_len).min(1.0),
            _ => self.t_len.min(1.0),
        };
        if r > r_cap {
            return fail(format!("singular_radius = {r} exceeds the admissible cap {r_cap}"));
        }
        if !(self.blend_width > 0.0) || self.blend_width > 0.5 * r {
            return fail(format!(
                "blend_width = {} must lie in (0, singular_radius/2]",
                self.blend_width
            ));
        }
        Ok(())
    }
}

/// C^1 monotone interpolation between `raw` (at x = 0) and 1 (at x = 1).
fn blend_to_one(raw: f64, x: f64) -> f64 {
    let s = x * x * (3.0 - 2.0 * x);
    (1.0 - s) * raw + s
}

/// Evaluate the singularity function at a point given its distance-like
/// coordinate (`t` for the wedge, `dist(., slit)` for the torus).
fn rho_profile(config: &GeometryConfig, coord: f64) -> f64 {
    let r = config.singular_radius;
    let bw = config.blend_width;
    let raw = |c: f64| -> f64 {
        match config.shape {
            MeshShape::WedgeCylinder => config.cusp.eval(c),
            MeshShape::SlitTorus => c.powf(config.beta),
            MeshShape::NeumannInterval => 1.0,
        }
    };
    if matches!(config.shape, MeshShape::NeumannInterval) {
        return 1.0;
    }
    if coord >= r {
        1.0
    } else if coord <= r - bw {
        raw(coord)
    } else {
        blend_to_one(raw(coord), (coord - (r - bw)) / bw)
    }
}

/// Per-cell singularity-function samples for the given cell centers.
///
/// Wedge: `rho = R(t)` on the collar; slit torus: `rho = d^beta` with the
/// torus distance to the slit; both blend C^1-monotonically to 1 across
/// `blend_width`. Every value must land in `(0, 1]` or the geometry is
/// rejected.
pub fn build_singularity_function(
    config: &GeometryConfig,
    cell_centers: &[(f64, f64)],
) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rho = Vec::with_capacity(cell_centers.len());
    for (idx, &(t, _theta)) in cell_centers.iter().enumerate() {
        let coord = match config.shape {
            MeshShape::WedgeCylinder | MeshShape::NeumannInterval => t,
            MeshShape::SlitTorus => t.min(config.t_len - t),
        };
        let value = rho_profile(config, coord);
        if !(value > 0.0 && value <= 1.0 + 1e-12) {
            return Err(Error::SingularityFunctionRange { cell: idx, value });
        }
        rho.push(value.min(1.0));
    }
    Ok(rho)
}

// ---------------------------------------------------------------------------
// Meshes
// ---------------------------------------------------------------------------

/// Boundary classification of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFlag {
    Interior,
    /// Face on the singular set; carries a ghost value of 0.
    DirichletSingular,
    /// Outer cap; zero flux.
    NeumannOuter,
}

/// A mesh face joining `cell_a` to `cell_b` (or to the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub cell_a: usize,
    pub cell_b: Option<usize>,
    pub flag: BoundaryFlag,
    /// Metric area of the face (unit weights in stretched coordinates).
    pub area: f64,
    /// Distance between the adjacent cell centers (half spacing at
    /// boundaries, where the ghost sits on the face).
    pub dist: f64,
    /// Singularity-function value at the face (adjacent-cell average).
    pub rho: f64,
}

/// A cell-centered tensor-grid finite-volume mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularMesh {
    config: GeometryConfig,
    n_t: usize,
    n_theta: usize,
    h_t: f64,
    h_theta: f64,
    cell_rho: Vec<f64>,
    cell_measures: Vec<f64>,
    faces: Vec<Face>,
}

impl SingularMesh {
    pub fn config(&self) -> &GeometryConfig {
        &self.config
    }
    pub fn shape(&self) -> MeshShape {
        self.config.shape
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn h_t(&self) -> f64 {
        self.h_t
    }
    pub fn h_theta(&self) -> f64 {
        self.h_theta
    }
    pub fn n_cells(&self) -> usize {
        self.n_t * self.n_theta
    }
    pub fn cell_index(&self, i_t: usize, i_theta: usize) -> usize {
        i_t * self.n_theta + i_theta
    }
    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_theta, idx % self.n_theta)
    }
    /// Cell center `(t, theta)`.
    pub fn cell_center(&self, idx: usize) -> (f64, f64) {
        let (i_t, i_th) = self.cell_coords(idx);
        ((i_t as f64 + 0.5) * self.h_t, (i_th as f64 + 0.5) * self.h_theta)
    }
    pub fn rho(&self) -> &[f64] {
        &self.cell_rho
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Diagonal mass vector of cell measures; defines the discrete inner
    /// product and all `L_p` norms.
    pub fn volume_weights(&self) -> &[f64] {
        &self.cell_measures
    }

    pub fn total_measure(&self) -> f64 {
        self.cell_measures.iter().sum()
    }

    pub fn dirichlet_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.flag == BoundaryFlag::DirichletSingular).count()
    }
    pub fn neumann_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.flag == BoundaryFlag::NeumannOuter).count()
    }
    pub fn has_dirichlet_faces(&self) -> bool {
        self.faces.iter().any(|f| f.flag == BoundaryFlag::DirichletSingular)
    }

    /// Mass-weighted inner product.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += self.cell_measures[i] * u[i] * v[i];
        }
        acc
    }
    pub fn norm_l1(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += self.cell_measures[i] * u[i].abs();
        }
        acc
    }
    pub fn norm_l2(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }
    pub fn norm_linf(&self, u: &[f64]) -> f64 {
        u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
    /// Signed integral of `u`.
    pub fn mass(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += self.cell_measures[i] * u[i];
        }
        acc
    }
}

/// Build a mesh with the default cell budget.
pub fn build_mesh(config: &GeometryConfig, n_t: usize, n_theta: usize) -> Result<SingularMesh> {
    build_mesh_with_budget(config, n_t, n_theta, DEFAULT_CELL_BUDGET)
}

/// Build a mesh, refusing when `n_t * n_theta` exceeds `budget`.
pub fn build_mesh_with_budget(
    config: &GeometryConfig,
    n_t: usize,
    n_theta: usize,
    budget: usize,
) -> Result<SingularMesh> {
    config.validate()?;
    let one_d = matches!(config.shape, MeshShape::NeumannInterval);
    let n_theta = if one_d { 1 } else { n_theta };
    if n_t < 4 || (!one_d && n_theta < 4) {
        return Err(Error::InvalidGeometry {
            reason: format!("resolution {n_t} x {n_theta} too coarse; need >= 4 per direction"),
        });
    }
    let n_cells = n_t * n_theta;
    if n_cells > budget {
        return Err(Error::CellBudgetExceeded { requested: n_cells, budget });
    }

    let h_t = config.t_len / n_t as f64;
    let h_theta = if one_d { 1.0 } else { config.circumference / n_theta as f64 };

    let mut centers = Vec::with_capacity(n_cells);
    for i_t in 0..n_t {
        for i_th in 0..n_theta {
            centers.push(((i_t as f64 + 0.5) * h_t, (i_th as f64 + 0.5) * h_theta));
        }
    }
    let cell_rho = build_singularity_function(config, &centers)?;
    let cell_measures = vec![h_t * h_theta; n_cells];

    let idx = |i_t: usize, i_th: usize| i_t * n_theta + i_th;
    let mut faces = Vec::new();

    // Axial faces, walked per angular column: boundary treatment depends on
    // the shape.
    for i_th in 0..n_theta {
        match config.shape {
            MeshShape::WedgeCylinder => {
                for i_t in 0..=n_t {
                    let (cell_a, cell_b, flag, dist) = if i_t == 0 {
                        (idx(0, i_th), None, BoundaryFlag::DirichletSingular, 0.5 * h_t)
                    } else if i_t == n_t {
                        (idx(n_t - 1, i_th), None, BoundaryFlag::NeumannOuter, 0.5 * h_t)
                    } else {
                        (idx(i_t - 1, i_th), Some(idx(i_t, i_th)), BoundaryFlag::Interior, h_t)
                    };
                    let rho = match cell_b {
                        Some(b) => 0.5 * (cell_rho[cell_a] + cell_rho[b]),
                        None => cell_rho[cell_a],
                    };
                    faces.push(Face { cell_a, cell_b, flag, area: h_theta, dist, rho });
                }
            }
            MeshShape::SlitTorus => {
                // The slit replaces the periodic wrap at t = 0 with two
                // Dirichlet faces.
                faces.push(Face {
                    cell_a: idx(0, i_th),
                    cell_b: None,
                    flag: BoundaryFlag::DirichletSingular,
                    area: h_theta,
                    dist: 0.5 * h_t,
                    rho: cell_rho[idx(0, i_th)],
                });
                for i_t in 1..n_t {
                    let a = idx(i_t - 1, i_th);
                    let b = idx(i_t, i_th);
                    faces.push(Face {
                        cell_a: a,
                        cell_b: Some(b),
                        flag: BoundaryFlag::Interior,
                        area: h_theta,
                        dist: h_t,
                        rho: 0.5 * (cell_rho[a] + cell_rho[b]),
                    });
                }
                faces.push(Face {
                    cell_a: idx(n_t - 1, i_th),
                    cell_b: None,
                    flag: BoundaryFlag::DirichletSingular,
                    area: h_theta,
                    dist: 0.5 * h_t,
                    rho: cell_rho[idx(n_t - 1, i_th)],
                });
            }
            MeshShape::NeumannInterval => {
                for i_t in 0..=n_t {
                    let (cell_a, cell_b, flag, dist) = if i_t == 0 {
                        (idx(0, 0), None, BoundaryFlag::NeumannOuter, 0.5 * h_t)
                    } else if i_t == n_t {
                        (idx(n_t - 1, 0), None, BoundaryFlag::NeumannOuter, 0.5 * h_t)
                    } else {
                        (idx(i_t - 1, 0), Some(idx(i_t, 0)), BoundaryFlag::Interior, h_t)
                    };
                    let rho = match cell_b {
                        Some(b) => 0.5 * (cell_rho[cell_a] + cell_rho[b]),
                        None => cell_rho[cell_a],
                    };
                    faces.push(Face { cell_a, cell_b, flag, area: h_theta, dist, rho });
                }
            }
        }
    }

    // Angular faces (periodic), absent in 1-D.
    if !one_d {
        for i_t in 0..n_t {
            for i_th in 0..n_theta {
                let prev = if i_th == 0 { n_theta - 1 } else { i_th - 1 };
                let a = idx(i_t, prev);
                let b = idx(i_t, i_th);
                faces.push(Face {
                    cell_a: a,
                    cell_b: Some(b),
                    flag: BoundaryFlag::Interior,
                    area: h_t,
                    dist: h_theta,
                    rho: 0.5 * (cell_rho[a] + cell_rho[b]),
                });
            }
        }
    }

    Ok(SingularMesh {
        config: config.clone(),
        n_t,
        n_theta,
        h_t,
        h_theta,
        cell_rho,
        cell_measures,
        faces,
    })
}
