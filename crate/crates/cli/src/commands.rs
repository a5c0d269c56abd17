//! The seven subcommands. Each builds what it needs from the parsed
//! configuration, runs the corresponding library operation, persists
//! `summary.json` plus tables, and reports pass/fail through the exit code.

use std::path::Path;

use cuspflow_core::experiments::Verdict;
use cuspflow_core::{
    accretivity_probe, assemble_laplacian, brezis_strauss_solve, evolve_formulated, field_pairs,
    max_principle_sweep, poincare_experiment, stability_experiment, validate_cusp_characteristic,
    CuspClass, ExperimentResult, ScalarField, SemilinearProblem, StabilityParams,
};

use crate::config::RunConfig;
use crate::output::OutputWriter;
use crate::CliError;

fn finish(
    config: &RunConfig,
    mut writer: OutputWriter,
    result: &ExperimentResult,
) -> Result<bool, CliError> {
    writer.write_series(result)?;
    let path = writer.write_summary(config, result)?;
    println!("{}: {} ({})", result.name, if result.passed() { "pass" } else { "FAIL" }, path.display());
    for v in &result.verdicts {
        println!("  {}: {} (observed {:.3e}, tolerance {:.1e})", v.name, v.pass, v.observed, v.tolerance);
    }
    Ok(result.passed())
}

/// Classify the configured cusp profile and dump the mesh.
pub fn geometry_check(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let cusp = config.cusp()?;
    let validation = validate_cusp_characteristic(&cusp, 512).map_err(CliError::Geometry)?;
    let mesh = config.build_mesh()?;

    let mut result = ExperimentResult::new("geometry_check", &config.to_toml());
    let flags = [
        ("endpoints_ok", validation.endpoints_ok),
        ("integral_diverges", validation.integral_diverges),
        ("derivative_bounded", validation.derivative_bounded),
        ("uniformly_mild", validation.uniformly_mild),
    ];
    for (name, value) in flags {
        result.metrics.insert(name.to_string(), if value { 1.0 } else { 0.0 });
    }
    result.metrics.insert("log_slope".to_string(), validation.log_slope);
    result.metrics.insert("max_derivative".to_string(), validation.max_derivative);
    result.metrics.insert("total_measure".to_string(), mesh.total_measure());
    result
        .metrics
        .insert("dirichlet_faces".to_string(), mesh.dirichlet_face_count() as f64);
    result.metrics.insert("neumann_faces".to_string(), mesh.neumann_face_count() as f64);
    result.notes.push(format!("classification: {}", validation.class.as_str()));
    if !validation.integral_diverges {
        result
            .notes
            .push("condition (ii) fails: the profile integral stays bounded toward 0".to_string());
    }
    result.verdicts.push(Verdict {
        name: "is_cusp_characteristic".to_string(),
        pass: validation.class != CuspClass::NotCusp,
        tolerance: 0.0,
        observed: match validation.class {
            CuspClass::NotCusp => 0.0,
            CuspClass::Cusp => 1.0,
            CuspClass::UniformlyMildCusp => 2.0,
        },
    });

    let mut writer = OutputWriter::create(config, out, "geometry_check")?;
    writer.write_mesh(&mesh)?;
    finish(config, writer, &result)
}

/// Spectral-gap refinement study for the configured geometry.
pub fn poincare(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let geometry = config.geometry()?;
    let result = poincare_experiment(
        &geometry,
        &config.experiment.refinement_levels,
        config.discretization.eig_tol,
    )
    .map_err(CliError::Solver)?;
    let writer = OutputWriter::create(config, out, "poincare")?;
    finish(config, writer, &result)
}

/// One semilinear resolvent solve with the configured data.
pub fn resolvent(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let mesh = config.build_mesh()?;
    let a = assemble_laplacian(&mesh).map_err(CliError::Geometry)?;
    let f = config.initial_field(&mesh)?;
    let problem = SemilinearProblem {
        mesh: &mesh,
        lambda: config.problem.lambda,
        f: &f,
        n: config.problem.n,
        delta_schedule: config.discretization.delta_schedule.clone(),
        tol: config.tolerances(),
    };
    let outcome = brezis_strauss_solve(&problem, &a).map_err(CliError::Solver)?;

    let mut result = ExperimentResult::new("resolvent", &config.to_toml());
    result.metrics.insert("lambda".to_string(), config.problem.lambda);
    result.metrics.insert("n".to_string(), config.problem.n);
    for (i, d) in outcome.delta_schedule.iter().enumerate() {
        result.metrics.insert(format!("delta_schedule_{i}"), *d);
    }
    result.metrics.insert("newton_iters".to_string(), outcome.newton_iters as f64);
    result.metrics.insert("residual_l1".to_string(), outcome.residual_l1);
    result
        .metrics
        .insert("max_principle_margin".to_string(), outcome.max_principle_margin);
    result
        .metrics
        .insert("derivative_cap_hits".to_string(), outcome.derivative_cap_hits as f64);
    let f_scale = mesh.norm_l1(f.values()).max(1.0);
    result.verdicts.push(Verdict {
        name: "residual_contract".to_string(),
        pass: outcome.residual_l1 <= config.discretization.residual_tol * f_scale,
        tolerance: config.discretization.residual_tol * f_scale,
        observed: outcome.residual_l1,
    });
    result.verdicts.push(Verdict {
        name: "max_principle".to_string(),
        pass: outcome.max_principle_margin >= -1e-10,
        tolerance: 1e-10,
        observed: outcome.max_principle_margin,
    });

    let mut writer = OutputWriter::create(config, out, "resolvent")?;
    if config.output.dump_fields {
        writer.write_field("u.csv", &mesh, &outcome.u)?;
        writer.write_field("v.csv", &mesh, &outcome.v)?;
    }
    finish(config, writer, &result)
}

/// Run the implicit stepper over the configured partition.
pub fn evolve(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let mesh = config.build_mesh()?;
    let u0 = config.initial_field(&mesh)?;
    let partition = config.partition()?;
    let formulation = config.formulation()?;
    let tol = config.tolerances();

    let mut writer = OutputWriter::create(config, out, "evolve")?;
    match evolve_formulated(&mesh, &u0, config.problem.n, &partition, formulation, &tol) {
        Ok(trace) => {
            writer.write_trace(&trace)?;
            if config.output.dump_fields {
                writer.write_trace_fields(&mesh, &trace)?;
            }
            let report = cuspflow_core::positivity_and_mass_report(&trace);
            let mut result = ExperimentResult::new("evolve", &config.to_toml());
            result.metrics.insert("steps".to_string(), partition.steps() as f64);
            result.metrics.insert("eps".to_string(), partition.eps());
            result.metrics.insert("min_value".to_string(), report.min_value);
            result.metrics.insert("max_mass_increase".to_string(), report.max_mass_increase);
            result.metrics.insert("max_mass_drift".to_string(), report.max_mass_drift);
            let last = trace.diagnostics.last().expect("trace has states");
            result.metrics.insert("final_l1".to_string(), last.l1);
            result.metrics.insert("final_mass".to_string(), last.mass);
            finish(config, writer, &result)
        }
        Err(failure) => {
            // Persist whatever was computed before the failing step.
            writer.write_trace(&failure.partial)?;
            Err(CliError::Solver(failure.error))
        }
    }
}

/// Stability of the constant equilibrium under the configured perturbation.
pub fn stability(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let geometry = config.geometry()?;
    let mesh = config.build_mesh()?;
    let w0 = config.initial_field(&mesh)?;
    let steps = config.problem.steps.ok_or_else(|| {
        CliError::Config("stability needs problem.steps (uniform partitions only)".into())
    })?;
    let params = StabilityParams {
        c_m: config.experiment.c_m,
        n: config.problem.n,
        t_final: config.problem.t_final,
        steps,
        formulation: config.formulation()?,
        rate_tolerance: config.experiment.rate_tolerance,
        smallness_factor: config.experiment.smallness_factor,
    };
    let result = stability_experiment(
        &geometry,
        config.discretization.n_t,
        config.discretization.n_theta,
        &w0,
        &params,
        config.discretization.eig_tol,
        &config.tolerances(),
    )
    .map_err(CliError::Solver)?;
    let writer = OutputWriter::create(config, out, "stability")?;
    finish(config, writer, &result)
}

/// Resolvent maximum-principle sweep over the configured lambda grid.
pub fn max_principle(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let geometry = config.geometry()?;
    let result = max_principle_sweep(
        &geometry,
        config.discretization.n_t,
        config.discretization.n_theta,
        &config.experiment.lambda_grid,
        config.experiment.corpus_size,
        config.discretization.seed,
        &config.tolerances(),
    )
    .map_err(CliError::Solver)?;
    let writer = OutputWriter::create(config, out, "max_principle")?;
    finish(config, writer, &result)
}

/// Accretivity margins of the nonlinear operator on seeded pairs.
pub fn accretivity(config: &RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let mesh = config.build_mesh()?;
    let a = assemble_laplacian(&mesh).map_err(CliError::Geometry)?;
    let pairs: Vec<(ScalarField, ScalarField)> =
        field_pairs(&mesh, config.discretization.seed, config.experiment.sample_pairs);
    let report = accretivity_probe(
        &mesh,
        &a,
        config.problem.n,
        &config.experiment.lambda_grid,
        &pairs,
    )
    .map_err(CliError::Solver)?;

    let mut result = ExperimentResult::new("accretivity", &config.to_toml());
    result.metrics.insert("min_margin".to_string(), report.min_margin);
    result.metrics.insert("n".to_string(), config.problem.n);
    result.metrics.insert("sample_pairs".to_string(), pairs.len() as f64);
    result
        .series
        .insert("min_margin_by_lambda".to_string(), report.per_lambda.clone());
    result.verdicts.push(Verdict {
        name: "accretive".to_string(),
        pass: report.pass,
        tolerance: 1e-10,
        observed: report.min_margin,
    });
    let writer = OutputWriter::create(config, out, "accretivity")?;
    finish(config, writer, &result)
}
