//! Implicit time discretization of the porous-medium flow.
//!
//! States advance by `u_i = (id + delta_i * A)^{-1} u_{i-1}` with
//! `A(u) = -Delta Phi(u)`; the piecewise-constant interpolant of the discrete
//! states is the approximate solution attached to a partition. Monitors check
//! the L1 contraction between traces, positivity, and mass budgets, and a
//! Richardson-style refinement study quantifies the Cauchy behavior of the
//! approximations as the partition size shrinks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::SingularMesh;
use crate::linalg::SparseOperator;
#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::operators::{assemble_laplacian, ScalarField};
use crate::resolvent::{pme_resolvent_step, SolverTolerances};
use crate::{Error, Result};

/// Which form of the flow a study targets. The divergence form evolves
/// `d/dt u = div(|u|^{n-1} grad u)`, which equals the `Phi`-form flow run at
/// `1/n` speed, so steps are rescaled rather than re-discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// `d/dt u = Delta(|u|^{n-1} u)`.
    Pme1,
    /// `d/dt u = div(|u|^{n-1} grad u)`.
    PmeDiv,
}

impl Formulation {
    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Pme1 => "pme1",
            Formulation::PmeDiv => "pme_div",
        }
    }
}

/// A partition `0 = t_0 <= ... <= t_N = T` with positive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    points: Vec<f64>,
}

impl TimePartition {
    pub fn uniform(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || steps == 0 {
            return Err(Error::InvalidPartition {
                reason: format!("need t_final > 0 and steps > 0, got ({t_final}, {steps})"),
            });
        }
        let points = (0..=steps).map(|i| t_final * i as f64 / steps as f64).collect();
        Ok(Self { points })
    }

    pub fn from_breakpoints(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition {
                reason: String::from("need at least two breakpoints"),
            });
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidPartition {
                reason: format!("partition must start at 0, got {}", points[0]),
            });
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidPartition {
                    reason: format!("breakpoints must increase strictly: {} -> {}", w[0], w[1]),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
    pub fn t_final(&self) -> f64 {
        *self.points.last().expect("nonempty")
    }
    pub fn delta(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }
    /// The mesh size `eps` of the partition (largest step).
    pub fn eps(&self) -> f64 {
        (0..self.steps()).fold(0.0f64, |m, i| m.max(self.delta(i)))
    }
}

/// Norms and solver statistics attached to one state of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub time: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub min: f64,
    pub max: f64,
    pub mass: f64,
    pub newton_iters: usize,
    pub residual_l1: f64,
}

/// The discrete states produced by the implicit stepper.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub partition: TimePartition,
    pub states: Vec<ScalarField>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl EvolutionTrace {
    pub fn final_state(&self) -> &ScalarField {
        self.states.last().expect("trace holds the initial state")
    }

    /// Piecewise-constant (right-continuous) evaluation of the trace.
    pub fn state_at(&self, t: f64) -> &ScalarField {
        let pts = self.partition.points();
        let idx = pts.partition_point(|&p| p <= t).saturating_sub(1);
        &self.states[idx.min(self.states.len() - 1)]
    }
}

/// A failed run carrying everything computed before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveFailure {
    pub step: usize,
    pub error: Error,
    pub partial: EvolutionTrace,
}

fn diagnostics_for(
    mesh: &SingularMesh,
    time: f64,
    u: &ScalarField,
    newton_iters: usize,
    residual_l1: f64,
) -> StepDiagnostics {
    StepDiagnostics {
        time,
        l1: mesh.norm_l1(u.values()),
        l2: mesh.norm_l2(u.values()),
        linf: mesh.norm_linf(u.values()),
        min: u.min(),
        max: u.max(),
        mass: mesh.mass(u.values()),
        newton_iters,
        residual_l1,
    }
}

/// Run the implicit stepper over the whole partition. Any step failure
/// aborts with the partial trace. Steps warm-start from the previous
/// `Phi`-variable solution.
pub fn evolve(
    mesh: &SingularMesh,
    u0: &ScalarField,
    n: f64,
    partition: &TimePartition,
    tol: &SolverTolerances,
) -> Result<EvolutionTrace, EvolveFailure> {
    evolve_formulated(mesh, u0, n, partition, Formulation::Pme1, tol)
}

/// [`evolve`] with an explicit formulation choice; the divergence form runs
/// the same resolvent with steps scaled by `1/n`.
pub fn evolve_formulated(
    mesh: &SingularMesh,
    u0: &ScalarField,
    n: f64,
    partition: &TimePartition,
    formulation: Formulation,
    tol: &SolverTolerances,
) -> Result<EvolutionTrace, EvolveFailure> {
    let mut states = Vec::with_capacity(partition.steps() + 1);
    let mut diagnostics = Vec::with_capacity(partition.steps() + 1);
    states.push(u0.clone());
    diagnostics.push(diagnostics_for(mesh, 0.0, u0, 0, 0.0));

    let fail = |step: usize, error: Error, states: Vec<ScalarField>, diags: Vec<StepDiagnostics>, partition: &TimePartition| {
        EvolveFailure {
            step,
            error,
            partial: EvolutionTrace {
                partition: partition.clone(),
                states,
                diagnostics: diags,
            },
        }
    };

    let a = match assemble_laplacian(mesh) {
        Ok(a) => a,
        Err(e) => return Err(fail(0, e, states, diagnostics, partition)),
    };

    let scale = match formulation {
        Formulation::Pme1 => 1.0,
        Formulation::PmeDiv => 1.0 / n,
    };

    let mut v_hint: Option<Vec<f64>> = None;
    for step in 0..partition.steps() {
        let delta = partition.delta(step) * scale;
        let prev = states.last().expect("states nonempty");
        match pme_resolvent_step(mesh, &a, prev, delta, n, tol, v_hint.as_deref()) {
            Ok(out) => {
                diagnostics.push(diagnostics_for(
                    mesh,
                    partition.points()[step + 1],
                    &out.u,
                    out.newton_iters,
                    out.residual_l1,
                ));
                v_hint = Some(out.v.into_values());
                states.push(out.u);
            }
            Err(e) => return Err(fail(step, e, states, diagnostics, partition)),
        }
    }
    Ok(EvolutionTrace { partition: partition.clone(), states, diagnostics })
}

/// Run the stepper on a prebuilt operator (shared across studies).
pub fn evolve_with_operator(
    mesh: &SingularMesh,
    a: &SparseOperator,
    u0: &ScalarField,
    n: f64,
    partition: &TimePartition,
    scale: f64,
    tol: &SolverTolerances,
) -> Result<EvolutionTrace, EvolveFailure> {
    let mut states = Vec::with_capacity(partition.steps() + 1);
    let mut diagnostics = Vec::with_capacity(partition.steps() + 1);
    states.push(u0.clone());
    diagnostics.push(diagnostics_for(mesh, 0.0, u0, 0, 0.0));
    let mut v_hint: Option<Vec<f64>> = None;
    for step in 0..partition.steps() {
        let delta = partition.delta(step) * scale;
        let prev = states.last().expect("states nonempty");
        match pme_resolvent_step(mesh, a, prev, delta, n, tol, v_hint.as_deref()) {
            Ok(out) => {
                diagnostics.push(diagnostics_for(
                    mesh,
                    partition.points()[step + 1],
                    &out.u,
                    out.newton_iters,
                    out.residual_l1,
                ));
                v_hint = Some(out.v.into_values());
                states.push(out.u);
            }
            Err(e) => {
                return Err(EvolveFailure {
                    step,
                    error: e,
                    partial: EvolutionTrace {
                        partition: partition.clone(),
                        states,
                        diagnostics,
                    },
                })
            }
        }
    }
    Ok(EvolutionTrace { partition: partition.clone(), states, diagnostics })
}

/// One row of the refinement table: the final-time L1 gap between the runs
/// at `eps` and at the next (finer) entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MildGapRow {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    pub gap_l1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MildConvergence {
    pub rows: Vec<MildGapRow>,
    /// Gaps are nonincreasing and the last one clears the threshold.
    pub cauchy: bool,
    pub final_gap_threshold: f64,
}

/// Richardson-style refinement study: evolve with uniform partitions of size
/// `eps` for each entry of `eps_list` (strictly decreasing) and tabulate the
/// final-time L1 gaps between successive runs.
pub fn mild_convergence_study(
    mesh: &SingularMesh,
    u0: &ScalarField,
    n: f64,
    t_final: f64,
    eps_list: &[f64],
    final_gap_threshold: f64,
    tol: &SolverTolerances,
) -> Result<MildConvergence> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidArgument {
            reason: String::from("refinement study needs at least two eps values"),
        });
    }
    for w in eps_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument {
                reason: format!("eps list must decrease strictly: {} -> {}", w[0], w[1]),
            });
        }
    }
    let a = assemble_laplacian(mesh)?;
    let mut finals: Vec<ScalarField> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        // ceil(T/eps) uniform steps, so every step is at most eps.
        let steps = (t_final / eps).ceil() as usize;
        let partition = TimePartition::uniform(t_final, steps.max(1))?;
        let trace = evolve_with_operator(mesh, &a, u0, n, &partition, 1.0, tol)
            .map_err(|f| f.error)?;
        finals.push(trace.states.into_iter().last().expect("nonempty"));
    }
    let mut rows = Vec::with_capacity(eps_list.len() - 1);
    for i in 0..finals.len() - 1 {
        let diff: Vec<f64> = finals[i]
            .values()
            .iter()
            .zip(finals[i + 1].values())
            .map(|(a, b)| a - b)
            .collect();
        rows.push(MildGapRow {
            eps_coarse: eps_list[i],
            eps_fine: eps_list[i + 1],
            gap_l1: mesh.norm_l1(&diff),
        });
    }
    let nonincreasing = rows.windows(2).all(|w| w[1].gap_l1 <= w[0].gap_l1 + 1e-14);
    let last_ok = rows.last().map(|r| r.gap_l1 <= final_gap_threshold).unwrap_or(false);
    Ok(MildConvergence { rows, cauchy: nonincreasing && last_ok, final_gap_threshold })
}

/// Per-step L1 distances between two traces on the same mesh and partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub distances: Vec<f64>,
    /// Largest single-step increase `d_{i+1} - d_i`.
    pub max_step_increase: f64,
    /// `d_i <= d_0 + 1e-8` for every i.
    pub within_initial: bool,
    /// Distances are nonincreasing up to 1e-8.
    pub nonincreasing: bool,
}

pub fn contraction_monitor(
    mesh: &SingularMesh,
    trace1: &EvolutionTrace,
    trace2: &EvolutionTrace,
) -> Result<ContractionReport> {
    if trace1.partition != trace2.partition {
        return Err(Error::TraceMismatch { reason: String::from("partitions differ") });
    }
    if trace1.states.len() != trace2.states.len() {
        return Err(Error::TraceMismatch { reason: String::from("state counts differ") });
    }
    let mut distances = Vec::with_capacity(trace1.states.len());
    for (u, w) in trace1.states.iter().zip(&trace2.states) {
        if u.len() != mesh.n_cells() || w.len() != mesh.n_cells() {
            return Err(Error::TraceMismatch { reason: String::from("state sizes differ") });
        }
        let diff: Vec<f64> =
            u.values().iter().zip(w.values()).map(|(a, b)| a - b).collect();
        distances.push(mesh.norm_l1(&diff));
    }
    let mut max_inc = f64::NEG_INFINITY;
    for w in distances.windows(2) {
        max_inc = max_inc.max(w[1] - w[0]);
    }
    let d0 = distances[0];
    let within_initial = distances.iter().all(|&d| d <= d0 + 1e-8);
    let nonincreasing = max_inc <= 1e-8;
    Ok(ContractionReport { distances, max_step_increase: max_inc, within_initial, nonincreasing })
}

/// Positivity and mass budget of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityMassReport {
    /// Smallest value over every state of the trace.
    pub min_value: f64,
    pub masses: Vec<f64>,
    /// Largest single-step mass increase.
    pub max_mass_increase: f64,
    /// Largest absolute mass deviation from the initial state.
    pub max_mass_drift: f64,
}

pub fn positivity_and_mass_report(trace: &EvolutionTrace) -> PositivityMassReport {
    let min_value = trace.states.iter().fold(f64::INFINITY, |m, s| m.min(s.min()));
    let masses: Vec<f64> = trace.diagnostics.iter().map(|d| d.mass).collect();
    let mut max_inc = f64::NEG_INFINITY;
    for w in masses.windows(2) {
        max_inc = max_inc.max(w[1] - w[0]);
    }
    let m0 = masses[0];
    let max_drift = masses.iter().fold(0.0f64, |m, &x| m.max((x - m0).abs()));
    PositivityMassReport { min_value, masses, max_mass_increase: max_inc, max_mass_drift: max_drift }
}
