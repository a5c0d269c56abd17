//! Finite-volume kernels for porous-medium flow on manifolds with cusp and
//! wedge singular ends.
//!
//! The crate builds cell-centered meshes for stretched wedge cylinders and
//! slit tori, assembles divergence-form diffusion operators with the singular
//! end encoded as a Dirichlet ghost boundary, solves the semilinear resolvent
//! problem that realizes one implicit porous-medium time step, and drives the
//! resulting nonlinear semigroup with contraction, positivity and spectral
//! monitors.
//!
//! `no_std` builds are supported with `default-features = false` plus the
//! `libm` feature; everything allocates through `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]
// Guards are written `!(x > 0.0)` so NaN inputs fail validation too, and the
// kernels use indexed loops over multiple slices of equal length.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("cuspflow-core requires either the `std` feature or the `libm` feature");

mod math;

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod resolvent;
pub mod sampling;

pub use error::{Error, Result};
pub use evolution::{
    contraction_monitor, evolve, evolve_formulated, mild_convergence_study,
    positivity_and_mass_report, ContractionReport, EvolutionTrace, EvolveFailure, Formulation,
    MildConvergence, MildGapRow, PositivityMassReport, StepDiagnostics, TimePartition,
};
pub use experiments::{
    l1_bound_probe, max_principle_sweep, poincare_experiment, spectrum_bound_experiment,
    stability_experiment, CoefficientSpec, ExperimentResult, StabilityParams, Verdict,
};
pub use sampling::{field_corpus, field_pairs, random_field, FieldProfile};
pub use geometry::{
    build_mesh, build_mesh_with_budget, build_singularity_function, validate_cusp_characteristic,
    BoundaryFlag, CuspCharacteristic, CuspClass, CuspValidation, Face, GeometryConfig, MeshShape,
    SingularMesh,
};
pub use linalg::{
    smallest_eigenpair, solve_cg, solve_cg_operator, spmv, CgOutcome, EigenEstimate,
    LinearOperator, MassShifted, SparseOperator,
};
pub use operators::{
    assemble_divergence_form, assemble_laplacian, coefficient_from_state, discrete_divergence,
    discrete_gradient, face_inner, weighted_norm, Coefficient, CoefficientDecay, ScalarField,
};
pub use resolvent::{
    accretivity_probe, brezis_strauss_solve, brezis_strauss_solve_with_hint, linear_resolvent,
    pme_resolvent_step, AccretivityReport, BrezisStraussOutcome, SemilinearProblem,
    SolverTolerances,
};
