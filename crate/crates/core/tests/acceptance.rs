//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line. Run with `cargo test -p cuspflow-core --test acceptance`.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use cuspflow_core::*;

fn wedge_config() -> GeometryConfig {
    GeometryConfig::wedge(1.0, TAU, CuspCharacteristic::cone())
}

/// Angularly uniform Gaussian bump, rescaled so its sup norm is exactly
/// `height` on this grid.
fn ring_bump(mesh: &SingularMesh, center: f64, width: f64, height: f64) -> ScalarField {
    let raw = ScalarField::from_fn(mesh, |t, _| {
        (-(t - center) * (t - center) / (2.0 * width * width)).exp()
    });
    let sup = mesh.norm_linf(raw.values());
    ScalarField::from_values(raw.values().iter().map(|x| height * x / sup).collect())
}

fn bump2d(mesh: &SingularMesh, center: (f64, f64), width: f64, height: f64) -> ScalarField {
    ScalarField::from_fn(mesh, |t, th| {
        let dt = t - center.0;
        let dth = th - center.1;
        height * (-(dt * dt + dth * dth) / (2.0 * width * width)).exp()
    })
}

/// Criterion 1: the spectral gap of the unit-coefficient wedge operator
/// reaches (pi/2)^2 within 1% at 256 x 256, inside 30 s.
#[test]
fn criterion_1_poincare_spectral_gap() {
    let start = Instant::now();
    let result = poincare_experiment(&wedge_config(), &[128, 256], 1e-9).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let lambda = result.metrics["lambda_min_n256"];
    let expected = FRAC_PI_2 * FRAC_PI_2;
    let rel = (lambda - expected).abs() / expected;
    let pass = rel <= 0.01 && result.passed() && elapsed < 30.0;
    println!(
        "{} criterion 1 (Poincare gap): lambda_min = {lambda:.6}, target {expected:.6}, \
         rel err {rel:.2e}, C = {:.4}, {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" },
        result.metrics["poincare_constant"],
    );
    assert!(rel <= 0.01, "lambda_min {lambda} misses {expected} by {rel}");
    assert!(result.passed(), "experiment verdicts failed: {:?}", result.verdicts);
    assert!(elapsed < 30.0, "runtime {elapsed}s exceeds 30s");
}

/// Criterion 2: resolvent sup bound over five lambdas and 100 seeded fields
/// per lambda, worst violation at most 1e-10, inside 20 s.
#[test]
fn criterion_2_maximum_principle_sweep() {
    let start = Instant::now();
    let result = max_principle_sweep(
        &wedge_config(),
        32,
        32,
        &[0.01, 0.1, 1.0, 10.0, 1000.0],
        100,
        20240601,
        &SolverTolerances::default(),
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = result.metrics["worst_sup_margin"];
    let pass = worst >= -1e-10 && elapsed < 20.0;
    println!(
        "{} criterion 2 (maximum principle): worst margin {worst:.2e}, \
         positivity {:.2e}, {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" },
        result.metrics["worst_positivity"],
    );
    assert!(worst >= -1e-10, "sup bound violated by {worst}");
    assert!(result.passed(), "verdicts failed: {:?}", result.verdicts);
    assert!(elapsed < 20.0, "runtime {elapsed}s exceeds 20s");
}

/// Criterion 3: the semilinear solve agrees with the independent
/// lagged-diffusivity fixed point to 1e-6 in L1 on an 8 x 8 wedge mesh for
/// n in {1.5, 2, 3} and lambda in {0.05, 0.5}, with the residual contract
/// held at 1e-10.
#[test]
fn criterion_3_nonlinear_resolvent_oracle() {
    let mesh = build_mesh(&wedge_config(), 8, 8).unwrap();
    let a = assemble_laplacian(&mesh).unwrap();
    let f = bump2d(&mesh, (0.6, PI), 0.25, 1.0);
    let f_scale = mesh.norm_l1(f.values()).max(1.0);
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    for &n in &[1.5, 2.0, 3.0] {
        for &lambda in &[0.05, 0.5] {
            let problem = SemilinearProblem::new(&mesh, lambda, &f, n);
            let out = brezis_strauss_solve(&problem, &a).unwrap();
            let oracle = common::lagged_diffusivity_solve(&mesh, &a, lambda, &f, n, 20_000);
            let diff: Vec<f64> = out
                .u
                .values()
                .iter()
                .zip(oracle.values())
                .map(|(x, y)| x - y)
                .collect();
            let gap = mesh.norm_l1(&diff);
            worst_gap = worst_gap.max(gap);
            worst_residual = worst_residual.max(out.residual_l1 / f_scale);
            assert!(gap <= 1e-6, "n={n} lambda={lambda}: oracle gap {gap}");
            assert!(
                out.residual_l1 <= 1e-10 * f_scale,
                "n={n} lambda={lambda}: residual {} breaks the contract",
                out.residual_l1
            );
        }
    }
    println!(
        "PASS criterion 3 (nonlinear resolvent): worst oracle gap {worst_gap:.2e}, \
         worst relative residual {worst_residual:.2e}"
    );
}

/// Criterion 4: accretivity margins over 50 seeded pairs and four lambdas
/// stay above -1e-10 for n in {2, 3}.
#[test]
fn criterion_4_m_accretivity_probe() {
    let mesh = build_mesh(&wedge_config(), 16, 16).unwrap();
    let a = assemble_laplacian(&mesh).unwrap();
    let pairs = field_pairs(&mesh, 77, 50);
    let mut worst = f64::INFINITY;
    for &n in &[2.0, 3.0] {
        let report =
            accretivity_probe(&mesh, &a, n, &[0.01, 0.1, 1.0, 10.0], &pairs).unwrap();
        worst = worst.min(report.min_margin);
        assert!(report.pass, "n={n}: min margin {}", report.min_margin);
    }
    println!("PASS criterion 4 (m-accretivity): min margin {worst:.2e}");
}

/// Criterion 5: per-step L1 distances between 20 seeded pairs of traces are
/// nonincreasing to 1e-8 over 100 steps at 64 x 64, inside 60 s.
#[test]
fn criterion_5_global_l1_contraction() {
    let start = Instant::now();
    let mesh = build_mesh(&wedge_config(), 64, 64).unwrap();
    let partition = TimePartition::uniform(0.5, 100).unwrap();
    let tol = SolverTolerances::default();
    let pairs = field_pairs(&mesh, 32, 20);
    let mut worst_increase = f64::NEG_INFINITY;
    for (u0, w0) in &pairs {
        let t1 = evolve(&mesh, u0, 2.0, &partition, &tol).unwrap();
        let t2 = evolve(&mesh, w0, 2.0, &partition, &tol).unwrap();
        let report = contraction_monitor(&mesh, &t1, &t2).unwrap();
        worst_increase = worst_increase.max(report.max_step_increase);
        assert!(
            report.nonincreasing,
            "distance grew by {}",
            report.max_step_increase
        );
        assert!(report.within_initial);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_increase <= 1e-8 && elapsed < 60.0;
    println!(
        "{} criterion 5 (L1 contraction): worst step increase {worst_increase:.2e}, {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(elapsed < 60.0, "runtime {elapsed}s exceeds 60s");
}

/// Criterion 6: nonnegative data stay nonnegative to 1e-10 and mass is
/// nonincreasing on the Dirichlet wedge; mass is constant to 1e-10 on the
/// all-Neumann interval.
#[test]
fn criterion_6_positivity_and_mass() {
    let tol = SolverTolerances { residual_tol: 1e-12, ..Default::default() };

    let mesh = build_mesh(&wedge_config(), 32, 32).unwrap();
    let u0 = bump2d(&mesh, (0.6, PI), 0.2, 1.0);
    let partition = TimePartition::uniform(0.5, 50).unwrap();
    let trace = evolve(&mesh, &u0, 2.0, &partition, &tol).unwrap();
    let report = positivity_and_mass_report(&trace);
    assert!(report.min_value >= -1e-10, "positivity violated: {}", report.min_value);
    assert!(
        report.max_mass_increase <= 1e-10,
        "mass grew by {}",
        report.max_mass_increase
    );

    let interval = build_mesh(&GeometryConfig::neumann_interval(1.0), 32, 1).unwrap();
    let u0 = ScalarField::from_fn(&interval, |t, _| {
        0.1 + (-(t - 0.5) * (t - 0.5) / 0.02).exp()
    });
    let trace = evolve(&interval, &u0, 2.0, &partition, &tol).unwrap();
    let closed = positivity_and_mass_report(&trace);
    assert!(closed.min_value >= -1e-10);
    assert!(
        closed.max_mass_drift <= 1e-10,
        "closed-geometry mass drifted by {}",
        closed.max_mass_drift
    );
    println!(
        "PASS criterion 6 (positivity and mass): min {:.2e}, wedge mass increase {:.2e}, \
         interval mass drift {:.2e}",
        report.min_value, report.max_mass_increase, closed.max_mass_drift
    );
}

/// Criterion 7: for n = 2, C_M = 1 and a bump perturbation of sup norm 0.1,
/// the fitted decay rate of the difference trace on the 128 x 128 wedge mesh
/// is within 10% of 2 lambda_min, inside 120 s.
#[test]
fn criterion_7_exponential_stability() {
    let start = Instant::now();
    let config = wedge_config();
    let mesh = build_mesh(&config, 128, 128).unwrap();
    let w0 = ring_bump(&mesh, 0.6, 0.12, 0.1);
    assert!((mesh.norm_linf(w0.values()) - 0.1).abs() <= 1e-12);
    let params = StabilityParams::new(1.0, 2.0, 0.05, 50, Formulation::Pme1);
    let result = stability_experiment(
        &config,
        128,
        128,
        &w0,
        &params,
        1e-9,
        &SolverTolerances::default(),
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let rel = result.metrics["omega_relative_error"];
    let pass = rel <= 0.1 && elapsed < 120.0;
    println!(
        "{} criterion 7 (exponential stability): omega {:.4} vs predicted {:.4} \
         (rel err {rel:.3}), {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" },
        result.metrics["omega_measured"],
        result.metrics["omega_predicted"],
    );
    assert!(result.passed(), "verdicts failed: {:?}", result.verdicts);
    assert!(elapsed < 120.0, "runtime {elapsed}s exceeds 120s");
}

/// Criterion 8: refinement gaps for n = 2 shrink monotonically with ratio at
/// most 0.8, and the linear stepper matches the dense matrix exponential to
/// 1e-4 in L1 on a 100-cell mesh.
#[test]
fn criterion_8_mild_solution_refinement() {
    let mesh = build_mesh(&wedge_config(), 32, 32).unwrap();
    let u0 = bump2d(&mesh, (0.6, PI), 0.2, 1.0);
    let tol = SolverTolerances::default();
    let study = mild_convergence_study(
        &mesh,
        &u0,
        2.0,
        0.5,
        &[0.1, 0.05, 0.025, 0.0125],
        1.0,
        &tol,
    )
    .unwrap();
    let mut worst_ratio = 0.0f64;
    for w in study.rows.windows(2) {
        assert!(w[1].gap_l1 <= w[0].gap_l1, "gaps must not grow");
        worst_ratio = worst_ratio.max(w[1].gap_l1 / w[0].gap_l1);
    }
    assert!(worst_ratio <= 0.8, "gap ratio {worst_ratio} exceeds 0.8");

    // Linear case against the dense matrix exponential.
    let small = build_mesh(&wedge_config(), 10, 10).unwrap();
    let a = assemble_laplacian(&small).unwrap();
    let u0 = bump2d(&small, (0.6, PI), 0.25, 1.0);
    let t_final = 0.1;
    let partition = TimePartition::uniform(t_final, 1000).unwrap();
    let trace = evolve(&small, &u0, 1.0, &partition, &tol).unwrap();
    let exact = common::heat_expm(&a, small.volume_weights(), u0.values(), t_final);
    let diff: Vec<f64> = trace
        .final_state()
        .values()
        .iter()
        .zip(&exact)
        .map(|(x, y)| x - y)
        .collect();
    let gap = small.norm_l1(&diff);
    assert!(gap <= 1e-4, "matrix exponential gap {gap}");
    println!(
        "PASS criterion 8 (mild refinement): worst gap ratio {worst_ratio:.3}, \
         linear expm gap {gap:.2e}"
    );
}

/// Criterion 9: power profiles classify correctly: k = 1 uniformly mild,
/// k = 2 a cusp but not uniformly mild, k = 1/2 rejected outright.
#[test]
fn criterion_9_geometry_classification() {
    let mild = validate_cusp_characteristic(&CuspCharacteristic::power(1.0).unwrap(), 256)
        .unwrap();
    assert_eq!(mild.class, CuspClass::UniformlyMildCusp);

    let steep = validate_cusp_characteristic(&CuspCharacteristic::power(2.0).unwrap(), 256)
        .unwrap();
    assert_eq!(steep.class, CuspClass::Cusp);
    assert!(!steep.uniformly_mild);

    assert!(matches!(
        CuspCharacteristic::power(0.5),
        Err(Error::CuspExponentTooSmall { .. })
    ));
    println!(
        "PASS criterion 9 (geometry classification): k=1 uniformly mild, k=2 cusp, \
         k=1/2 rejected"
    );
}
