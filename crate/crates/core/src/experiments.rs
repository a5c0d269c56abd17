//! Scripted studies checking the spectral-gap, contraction, stability and
//! maximum-principle behavior of the assembled operators, with seeded random
//! corpora and named pass/fail verdicts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::evolution::{evolve_formulated, Formulation, TimePartition};
use crate::geometry::{build_mesh, GeometryConfig, SingularMesh};
use crate::linalg::{smallest_eigenpair, spmv};
#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::operators::{assemble_divergence_form, assemble_laplacian, Coefficient, ScalarField};
use crate::resolvent::{linear_resolvent, SolverTolerances};
use crate::sampling::field_corpus;
use crate::{Error, Result};

/// A named check with its tolerance and the observed value.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub tolerance: f64,
    pub observed: f64,
}

/// Metrics, verdicts and notes produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    /// FNV-1a digest of the experiment inputs.
    pub input_digest: String,
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    /// Named (x, y) tables behind the metrics, for persistence.
    pub series: BTreeMap<String, Vec<(f64, f64)>>,
    /// Output files attached by the caller when results are persisted.
    pub artifacts: Vec<String>,
}

impl ExperimentResult {
    /// An empty result named for its experiment, with the inputs digested.
    pub fn new(name: &str, digest_input: &str) -> Self {
        Self {
            name: name.to_string(),
            input_digest: format!("{:016x}", fnv1a64(digest_input.as_bytes())),
            metrics: BTreeMap::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            series: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

const LAMBDA_MIN_FLOOR: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Poincare / spectral gap
// ---------------------------------------------------------------------------

/// Smallest eigenvalue of the coefficient-1 operator across refinement
/// levels; passes when it stays positive and stabilizes to 2% between the
/// two finest levels. The discrete Poincare constant is `1/sqrt(lambda_min)`.
pub fn poincare_experiment(
    config: &GeometryConfig,
    levels: &[usize],
    eig_tol: f64,
) -> Result<ExperimentResult> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument {
            reason: String::from("refinement study needs at least two levels"),
        });
    }
    let mut result =
        ExperimentResult::new("poincare", &format!("{config:?}/{levels:?}/{eig_tol}"));
    let mut lambdas = Vec::with_capacity(levels.len());
    for &level in levels {
        let mesh = build_mesh(config, level, level)?;
        let a = assemble_laplacian(&mesh)?;
        let e = smallest_eigenpair(&a, mesh.volume_weights(), eig_tol)?;
        result.metrics.insert(format!("lambda_min_n{level}"), e.value);
        if e.singular {
            result.metrics.insert(format!("singular_n{level}"), 1.0);
        }
        lambdas.push(e.value);
    }
    result.series.insert(
        "lambda_by_level".to_string(),
        levels.iter().map(|&l| l as f64).zip(lambdas.iter().copied()).collect(),
    );
    let last = *lambdas.last().expect("checked len");
    let prev = lambdas[lambdas.len() - 2];
    result.metrics.insert("lambda_min".to_string(), last);
    if last > 0.0 {
        result.metrics.insert("poincare_constant".to_string(), 1.0 / last.sqrt());
    }
    result.verdicts.push(Verdict {
        name: "lambda_min_positive".to_string(),
        pass: last > LAMBDA_MIN_FLOOR,
        tolerance: LAMBDA_MIN_FLOOR,
        observed: last,
    });
    let rel_change = if last > 0.0 { (last - prev).abs() / last } else { f64::INFINITY };
    result.verdicts.push(Verdict {
        name: "refinement_stable".to_string(),
        pass: rel_change < 0.02,
        tolerance: 0.02,
        observed: rel_change,
    });
    Ok(result)
}

// ---------------------------------------------------------------------------
// Spectrum bound for -div(a grad .)
// ---------------------------------------------------------------------------

/// Coefficient fields exercised by the spectrum-bound experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientSpec {
    Constant(f64),
    /// `a = base + scale * rho`: a perturbation decaying toward the singular
    /// end.
    ConstantPlusRho { base: f64, scale: f64 },
}

impl CoefficientSpec {
    pub fn build(self, mesh: &SingularMesh) -> Result<Coefficient> {
        match self {
            CoefficientSpec::Constant(c) => Coefficient::constant(mesh, c),
            CoefficientSpec::ConstantPlusRho { base, scale } => {
                Coefficient::constant_plus_rho(mesh, base, scale)
            }
        }
    }
}

/// Checks the spectral gap of `-div(a grad .)`: positivity of the smallest
/// eigenvalue, the form comparison against `a_min` times the coefficient-1
/// gap, and L-infinity contractivity of the resolvent action on a seeded
/// corpus.
#[allow(clippy::too_many_arguments)]
pub fn spectrum_bound_experiment(
    config: &GeometryConfig,
    n_t: usize,
    n_theta: usize,
    spec: CoefficientSpec,
    lambda_grid: &[f64],
    corpus_size: usize,
    seed: u64,
    eig_tol: f64,
    tol: &SolverTolerances,
) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new(
        "spectrum_bound",
        &format!("{config:?}/{n_t}x{n_theta}/{spec:?}/{lambda_grid:?}/{corpus_size}/{seed}"),
    );
    let mesh = build_mesh(config, n_t, n_theta)?;
    let coeff = spec.build(&mesh)?;
    let a_min = coeff.a_min();
    let a_op = assemble_divergence_form(&mesh, &coeff)?;
    let a_one = assemble_laplacian(&mesh)?;
    let mass = mesh.volume_weights();

    let e_a = smallest_eigenpair(&a_op, mass, eig_tol)?;
    let e_one = smallest_eigenpair(&a_one, mass, eig_tol)?;
    result.metrics.insert("lambda_min".to_string(), e_a.value);
    result.metrics.insert("lambda_min_unit".to_string(), e_one.value);
    result.metrics.insert("a_min".to_string(), a_min);
    result.metrics.insert("a_max".to_string(), coeff.a_max());

    result.verdicts.push(Verdict {
        name: "lambda_min_positive".to_string(),
        pass: e_a.value > LAMBDA_MIN_FLOOR,
        tolerance: LAMBDA_MIN_FLOOR,
        observed: e_a.value,
    });
    // Form comparison a >= a_min pointwise transfers to the eigenvalues; the
    // tolerance absorbs the eigensolver error.
    let comparison_tol = 10.0 * eig_tol * a_min * e_one.value + 1e-12;
    let comparison_margin = e_a.value - a_min * e_one.value;
    result.verdicts.push(Verdict {
        name: "form_comparison".to_string(),
        pass: comparison_margin >= -comparison_tol,
        tolerance: comparison_tol,
        observed: comparison_margin,
    });

    // Resolvent contractivity in the sup norm.
    let corpus = field_corpus(&mesh, seed, corpus_size);
    let mut worst = f64::INFINITY;
    for &lambda in lambda_grid {
        for f in &corpus {
            let u = linear_resolvent(&a_op, mass, lambda, f, tol)?;
            worst = worst.min(mesh.norm_linf(f.values()) - mesh.norm_linf(u.values()));
        }
    }
    result.metrics.insert("worst_linf_contraction_margin".to_string(), worst);
    result.verdicts.push(Verdict {
        name: "linf_contractive".to_string(),
        pass: worst >= -1e-10,
        tolerance: 1e-10,
        observed: worst,
    });
    Ok(result)
}

// ---------------------------------------------------------------------------
// Exponential stability of constant equilibria
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityParams {
    /// The constant equilibrium.
    pub c_m: f64,
    pub n: f64,
    pub t_final: f64,
    pub steps: usize,
    pub formulation: Formulation,
    /// Relative tolerance on the fitted decay rate (default 0.1).
    pub rate_tolerance: f64,
    /// Admissible `||w0||_inf` as a fraction of `|C_M|` (default 0.3).
    pub smallness_factor: f64,
}

impl StabilityParams {
    pub fn new(c_m: f64, n: f64, t_final: f64, steps: usize, formulation: Formulation) -> Self {
        Self {
            c_m,
            n,
            t_final,
            steps,
            formulation,
            rate_tolerance: 0.1,
            smallness_factor: 0.3,
        }
    }
}

/// Evolve a perturbed constant against the unperturbed reference and fit the
/// exponential decay rate of the difference over the tail half of the run.
/// The predicted rate is `n |C_M|^{n-1} lambda_min` for the `Phi` form and
/// `|C_M|^{n-1} lambda_min` for the divergence form.
///
/// Both traces share the Dirichlet boundary treatment, so the fitted rate
/// measures the difference flow only; this is recorded as a note since the
/// constant itself is not a discrete equilibrium on meshes with singular
/// faces.
pub fn stability_experiment(
    config: &GeometryConfig,
    n_t: usize,
    n_theta: usize,
    w0: &ScalarField,
    params: &StabilityParams,
    eig_tol: f64,
    tol: &SolverTolerances,
) -> Result<ExperimentResult> {
    if params.c_m == 0.0 {
        return Err(Error::InvalidArgument {
            reason: String::from("the constant equilibrium must be nonzero"),
        });
    }
    let mut result = ExperimentResult::new(
        "stability",
        &format!("{config:?}/{n_t}x{n_theta}/{params:?}"),
    );
    let mesh = build_mesh(config, n_t, n_theta)?;
    let sup_w0 = mesh.norm_linf(w0.values());
    let bound = params.smallness_factor * params.c_m.abs();
    if sup_w0 > bound {
        return Err(Error::BallConditionViolated { sup_norm: sup_w0, bound });
    }

    let a = assemble_laplacian(&mesh)?;
    let lambda_min = smallest_eigenpair(&a, mesh.volume_weights(), eig_tol)?.value;
    let rate_factor = params.c_m.abs().powf(params.n - 1.0) * lambda_min;
    let omega_pred = match params.formulation {
        Formulation::Pme1 => params.n * rate_factor,
        Formulation::PmeDiv => rate_factor,
    };
    result.metrics.insert("lambda_min".to_string(), lambda_min);
    result.metrics.insert("omega_predicted".to_string(), omega_pred);

    let partition = TimePartition::uniform(params.t_final, params.steps)?;
    let u0_ref = ScalarField::constant(&mesh, params.c_m);
    let mut u0 = u0_ref.clone();
    for (x, w) in u0.values_mut().iter_mut().zip(w0.values()) {
        *x += w;
    }
    let trace_ref =
        evolve_formulated(&mesh, &u0_ref, params.n, &partition, params.formulation, tol)
            .map_err(|f| f.error)?;
    let trace = evolve_formulated(&mesh, &u0, params.n, &partition, params.formulation, tol)
        .map_err(|f| f.error)?;

    let mut diffs = Vec::with_capacity(trace.states.len());
    for (u, r) in trace.states.iter().zip(&trace_ref.states) {
        let d: Vec<f64> = u.values().iter().zip(r.values()).map(|(a, b)| a - b).collect();
        diffs.push(mesh.norm_l2(&d));
    }
    result.series.insert(
        "difference_l2".to_string(),
        partition.points().iter().copied().zip(diffs.iter().copied()).collect(),
    );
    let max_diff = diffs.iter().fold(0.0f64, |m, &d| m.max(d));
    if max_diff <= 1e-14 {
        result.metrics.insert("difference_max".to_string(), max_diff);
        result.verdicts.push(Verdict {
            name: "difference_identically_zero".to_string(),
            pass: true,
            tolerance: 1e-14,
            observed: max_diff,
        });
        return Ok(result);
    }

    // Least-squares slope of log(diff) over the tail half of the run.
    let points = partition.points();
    let start = diffs.len() / 2;
    let tail: Vec<(f64, f64)> = (start..diffs.len())
        .filter(|&i| diffs[i] > 0.0)
        .map(|i| (points[i], diffs[i].ln()))
        .collect();
    if tail.len() < 3 {
        return Err(Error::InvalidArgument {
            reason: String::from("too few usable samples in the fit window"),
        });
    }
    let m = tail.len() as f64;
    let sx: f64 = tail.iter().map(|p| p.0).sum();
    let sy: f64 = tail.iter().map(|p| p.1).sum();
    let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let omega = -slope;
    let rel_err = (omega - omega_pred).abs() / omega_pred;

    result.metrics.insert("omega_measured".to_string(), omega);
    result.metrics.insert("omega_relative_error".to_string(), rel_err);
    result.metrics.insert("difference_initial".to_string(), diffs[0]);
    result.metrics.insert("difference_final".to_string(), *diffs.last().expect("nonempty"));
    result.verdicts.push(Verdict {
        name: "decay_rate_matches_linearization".to_string(),
        pass: rel_err <= params.rate_tolerance,
        tolerance: params.rate_tolerance,
        observed: rel_err,
    });
    result.notes.push(String::from(
        "rate fitted on the difference of two traces sharing the Dirichlet boundary \
         treatment; the constant itself is not a discrete equilibrium on singular meshes",
    ));
    Ok(result)
}

// ---------------------------------------------------------------------------
// Maximum principle sweep
// ---------------------------------------------------------------------------

/// Sweep the linear resolvent over a lambda grid and a seeded corpus,
/// recording the worst sup-bound margin and the worst positivity margin.
pub fn max_principle_sweep(
    config: &GeometryConfig,
    n_t: usize,
    n_theta: usize,
    lambda_grid: &[f64],
    corpus_size: usize,
    seed: u64,
    tol: &SolverTolerances,
) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new(
        "max_principle",
        &format!("{config:?}/{n_t}x{n_theta}/{lambda_grid:?}/{corpus_size}/{seed}"),
    );
    let mesh = build_mesh(config, n_t, n_theta)?;
    let a = assemble_laplacian(&mesh)?;
    let mass = mesh.volume_weights();
    let corpus = field_corpus(&mesh, seed, corpus_size);

    let mut worst_sup = f64::INFINITY;
    let mut worst_pos = f64::INFINITY;
    let mut by_lambda: Vec<(f64, f64)> = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let mut lambda_worst = f64::INFINITY;
        for f in &corpus {
            let u = linear_resolvent(&a, mass, lambda, f, tol)?;
            let sup_margin = f.max().max(0.0) - u.max();
            let inf_margin = u.min() - f.min().min(0.0);
            lambda_worst = lambda_worst.min(sup_margin.min(inf_margin));

            // Positivity corollary on the nonnegative part of the corpus.
            let f_abs =
                ScalarField::from_values(f.values().iter().map(|x| x.abs()).collect());
            let u_abs = linear_resolvent(&a, mass, lambda, &f_abs, tol)?;
            worst_pos = worst_pos.min(u_abs.min());
        }
        worst_sup = worst_sup.min(lambda_worst);
        by_lambda.push((lambda, lambda_worst));
    }
    result.series.insert("worst_margin_by_lambda".to_string(), by_lambda);
    result.metrics.insert("worst_sup_margin".to_string(), worst_sup);
    result.metrics.insert("worst_positivity".to_string(), worst_pos);
    result.verdicts.push(Verdict {
        name: "sup_bound".to_string(),
        pass: worst_sup >= -1e-10,
        tolerance: 1e-10,
        observed: worst_sup,
    });
    result.verdicts.push(Verdict {
        name: "positivity".to_string(),
        pass: worst_pos >= -1e-12,
        tolerance: 1e-12,
        observed: worst_pos,
    });
    Ok(result)
}

// ---------------------------------------------------------------------------
// L1 lower bound
// ---------------------------------------------------------------------------

/// Empirical constant in `alpha ||u||_1 <= ||Delta u||_1` for the
/// coefficient-1 operator: the smallest observed ratio over a seeded corpus
/// plus the constant field. No specific value is asserted, only positivity.
pub fn l1_bound_probe(
    config: &GeometryConfig,
    n_t: usize,
    n_theta: usize,
    sample_size: usize,
    seed: u64,
    eig_tol: f64,
) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new(
        "l1_bound",
        &format!("{config:?}/{n_t}x{n_theta}/{sample_size}/{seed}"),
    );
    let mesh = build_mesh(config, n_t, n_theta)?;
    let a = assemble_laplacian(&mesh)?;

    let ratio = |u: &[f64]| -> Result<f64> {
        let au = spmv(&a, u)?;
        // The L1 norm of M^{-1} A u in the mass inner product is the plain
        // entry sum of A u.
        let num: f64 = au.iter().map(|x| x.abs()).sum();
        let den = mesh.norm_l1(u);
        Ok(num / den)
    };

    let mut corpus = field_corpus(&mesh, seed, sample_size);
    corpus.push(ScalarField::constant(&mesh, 1.0));
    let mut alpha = f64::INFINITY;
    for u in &corpus {
        alpha = alpha.min(ratio(u.values())?);
    }
    result.metrics.insert("alpha_empirical".to_string(), alpha);

    // Record (not assert) the ground-state ratio, which equals lambda_min.
    let e = smallest_eigenpair(&a, mesh.volume_weights(), eig_tol)?;
    if !e.singular {
        result.metrics.insert("ground_state_ratio".to_string(), ratio(&e.vector)?);
    }

    result.verdicts.push(Verdict {
        name: "alpha_positive".to_string(),
        pass: alpha > 1e-6,
        tolerance: 1e-6,
        observed: alpha,
    });
    Ok(result)
}
