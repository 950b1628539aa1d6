//! Acceptance suite: one test per release criterion, each printing a single
//! PASS line (or failing its assertion) with the measured quantities.
//!
//! The configuration shared by most criteria is the two-dimensional
//! reference setup: baseline order 0.5 with order 0.7 on a centered ball of
//! radius 1.2 (shape exponent s = 8) in the box [-2π, 2π)², and a centered
//! Gaussian initial datum with σ = 0.8.

use std::time::Instant;

use num_complex::Complex64;
use vord_core::{
    bounded_by_first_sample, caputo_l1_march, envelope_check, evaluate_solution, indicator_mask,
    masked_resolvent_norm, sample_decay, schatten_norm, shift_composition_norm, ContourSpec,
    Domain, GridFunction, KappaProfile, OrderField, PolarPoint, Region, Solver, Spectral,
};

const SEED: u64 = 2024;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const THETA: f64 = 2.0 * std::f64::consts::PI / 3.0;

fn reference_field(n: usize) -> OrderField {
    let domain = Domain::new(2, n, TWO_PI).unwrap();
    let mask = indicator_mask(
        &domain,
        &Region::Ball { center: vec![0.0, 0.0], radius: 1.2 },
    )
    .unwrap();
    OrderField::build(
        domain,
        0.5,
        (0.5, 0.7),
        8.0,
        mask,
        &KappaProfile::Constant(0.7),
    )
    .unwrap()
}

fn gaussian(domain: Domain, sigma: f64) -> GridFunction {
    GridFunction::from_real_fn(domain, move |x| {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

/// Criterion 1 — constant-order exactness. d=2, n=128, box [-2π, 2π)²,
/// α ≡ 0.5, u0 = e^{i x·(1,0)} (Laplacian eigenvalue 1). The contour
/// solution at t ∈ {0.1, 1, 10, 100} must match E_{1/2}(−√t) per mode to
/// 1e-6 relative, within one minute.
#[test]
fn criterion_01_constant_order_exactness() {
    let started = Instant::now();
    let domain = Domain::new(2, 128, TWO_PI).unwrap();
    let spectral = Spectral::new(domain);
    let field = OrderField::constant(domain, 0.5, 8.0).unwrap();
    let solver = Solver::new(&spectral, &field).unwrap();
    let u0 = GridFunction::from_fn(domain, |x| Complex64::new(x[0].cos(), x[0].sin()));

    // E_{1/2}(−√t) reference values (independent dual-series/integral route,
    // frozen at 18 significant digits).
    let cases = [
        (0.1, 0.723578438477615492),
        (1.0, 0.427583576155807004),
        (10.0, 0.170577718325972646),
        (100.0, 0.0561409927438225859),
    ];

    let mut worst = 0.0f64;
    for &(t, expected) in &cases {
        let spec = ContourSpec::for_time(t, 0.5);
        let (u, _) = evaluate_solution(&solver, &u0, t, &spec).unwrap();
        let mut diff = u.clone();
        diff.axpy(Complex64::new(-expected, 0.0), &u0);
        let rel = diff.l2_norm() / (expected * u0.l2_norm());
        worst = worst.max(rel);
        assert!(
            rel <= 1e-6,
            "criterion 1: FAIL — t = {t}: relative deviation {rel:.3e} exceeds 1e-6"
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "criterion 1: FAIL — runtime {elapsed:.1}s exceeds 60s");
    println!("criterion 1 (constant-order exactness): PASS — max relative deviation {worst:.3e} ≤ 1e-6, runtime {elapsed:.1}s");
}

/// Criterion 2 — variable-order oracle agreement. Reference field at n=64,
/// Gaussian u0. Contour solution vs implicit L1 march with 4096 steps at
/// t ∈ {0.5, 1, 2}: relative L² discrepancy ≤ 2%, and the discrepancy
/// decreases when the step count doubles from 2048 to 4096. ≤ 10 minutes.
#[test]
fn criterion_02_variable_order_oracle_agreement() {
    let started = Instant::now();
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let u0 = gaussian(field.domain(), 0.8);
    let times = [0.5, 1.0, 2.0];
    let t_final = 2.0;

    let contour_solutions: Vec<GridFunction> = times
        .iter()
        .map(|&t| {
            let spec = ContourSpec::for_time(t, 0.5);
            evaluate_solution(&solver, &u0, t, &spec).unwrap().0
        })
        .collect();

    let discrepancy = |n_steps: usize| -> f64 {
        let trajectory = caputo_l1_march(&solver, &u0, t_final, n_steps).unwrap();
        times
            .iter()
            .zip(&contour_solutions)
            .map(|(&t, contour)| {
                let march = trajectory.at_time(t).expect("snapshot on step grid");
                contour.sub(march).l2_norm() / march.l2_norm()
            })
            .fold(0.0f64, f64::max)
    };

    let fine = discrepancy(4096);
    assert!(
        fine <= 0.02,
        "criterion 2: FAIL — max relative discrepancy {fine:.3e} exceeds 2%"
    );
    let coarse = discrepancy(2048);
    assert!(
        fine < coarse,
        "criterion 2: FAIL — discrepancy did not decrease under doubling: {coarse:.3e} → {fine:.3e}"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 600.0, "criterion 2: FAIL — runtime {elapsed:.1}s exceeds 600s");
    println!("criterion 2 (variable-order oracle agreement): PASS — discrepancy {fine:.3e} ≤ 2e-2, improves on doubling ({coarse:.3e} → {fine:.3e}), runtime {elapsed:.1}s");
}

/// Criterion 3 — perturbative contraction. Reference field, θ = 2π/3, 9
/// phases spanning [−θ, θ], moduli on a geometric grid at and below the
/// empirical radius: every perturbation norm ≤ 1/2, and the log-log slope
/// of the sup-over-phases norm is within 20% of 0.125.
///
/// The slope window keeps the shift r^{α*} above the spectral gap
/// (π/(2L))² = 1/4 of the discrete Laplacian, i.e. r ≥ r₀/16: below that
/// the compactified domain's zero mode saturates the norm and the continuum
/// scaling is no longer resolved.
#[test]
fn criterion_03_contraction_lemma() {
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();

    let r0 = solver.empirical_contraction_radius(THETA, 9, SEED).unwrap();
    let radii = [r0 / 8.0, r0 / 4.0, r0 / 2.0, r0];
    assert!(radii.iter().all(|&r| r <= r0), "criterion 3: FAIL — grid not below r₀ = {r0}");

    let betas: Vec<f64> = (0..9).map(|i| -THETA + 2.0 * THETA * i as f64 / 8.0).collect();
    let mut sups = Vec::new();
    let mut task = 0u64;
    for &r in &radii {
        let mut sup = 0.0f64;
        for &beta in &betas {
            let p = PolarPoint::new(r, beta).unwrap();
            let estimate = solver.perturbation_norm(p, SEED.wrapping_add(task)).unwrap();
            task += 1;
            assert!(
                estimate.converged,
                "criterion 3: FAIL — norm estimate did not converge at r = {r}, β = {beta}"
            );
            assert!(
                estimate.value <= 0.5,
                "criterion 3: FAIL — perturbation norm {} at r = {r}, β = {beta} exceeds 1/2",
                estimate.value
            );
            sup = sup.max(estimate.value);
        }
        sups.push(sup);
    }

    // Least-squares slope of ln sup vs ln r.
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|v| v.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!(
        (0.100..=0.150).contains(&slope),
        "criterion 3: FAIL — modulus-sweep slope {slope:.4} outside 0.125 ± 20%"
    );
    println!("criterion 3 (contraction lemma): PASS — r₀ = {r0}, all 36 norms ≤ 1/2, slope {slope:.4} ∈ [0.100, 0.150]");
}

/// Criterion 4 — sectorial resolvent bound. 25 (r, β) pairs with moduli
/// spanning [1e-3, 1e3] and phases {0, ±π/3, ±2π/3}: the measured resolvent
/// norm stays below C_β · max_{j ∈ {m,M}} r^{−α_j}, where C_β = 1 on the
/// positive axis and max_j 1/|sin(α_j β)| off it. Zero violations allowed.
#[test]
fn criterion_04_resolvent_bound() {
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let (alpha_m, alpha_big) = (0.5f64, 0.7f64);

    let moduli = [1e-3, 10f64.powf(-1.5), 1.0, 10f64.powf(1.5), 1e3];
    let phases = [
        0.0,
        std::f64::consts::FRAC_PI_3,
        -std::f64::consts::FRAC_PI_3,
        THETA,
        -THETA,
    ];

    let mut checked = 0usize;
    let mut worst_ratio = 0.0f64;
    let mut task = 0u64;
    for &r in &moduli {
        for &beta in &phases {
            let p = PolarPoint::new(r, beta).unwrap();
            let c_beta = if beta == 0.0 {
                1.0
            } else {
                (1.0 / (alpha_m * beta).sin().abs()).max(1.0 / (alpha_big * beta).sin().abs())
            };
            let bound = c_beta * r.powf(-alpha_m).max(r.powf(-alpha_big));
            let estimate = solver.resolvent_norm(p, 1e-11, SEED.wrapping_add(task)).unwrap();
            task += 1;
            assert!(
                estimate.converged,
                "criterion 4: FAIL — estimate did not converge at r = {r}, β = {beta}"
            );
            assert!(
                estimate.value <= bound * (1.0 + 1e-6),
                "criterion 4: FAIL — r = {r}, β = {beta}: measured {:.6e} above bound {bound:.6e}",
                estimate.value
            );
            worst_ratio = worst_ratio.max(estimate.value / bound);
            checked += 1;
        }
    }
    assert_eq!(checked, 25);
    println!("criterion 4 (sectorial resolvent bound): PASS — 25/25 pairs below bound, worst measured/bound ratio {worst_ratio:.4}");
}

/// Criterion 5 — constant-order composed bound: ‖(−Δ_h + r^α)(−Δ_h +
/// p^α)^{−1}‖ ≤ 3 for 12 sampled (r, β) with |β| ≤ θ. Zero violations.
#[test]
fn criterion_05_composed_bound() {
    let domain = Domain::new(2, 64, TWO_PI).unwrap();
    let spectral = Spectral::new(domain);
    let alpha = 0.5;

    let moduli = [1e-3, 1e-1, 10.0, 1e3];
    let phases = [0.0, THETA, -THETA];
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for &r in &moduli {
        for &beta in &phases {
            let p = PolarPoint::new(r, beta).unwrap();
            let value = shift_composition_norm(&spectral, p, alpha).unwrap();
            assert!(
                value <= 3.0,
                "criterion 5: FAIL — composed norm {value:.6e} at r = {r}, β = {beta} exceeds 3"
            );
            worst = worst.max(value);
            checked += 1;
        }
    }
    assert_eq!(checked, 12);
    println!("criterion 5 (composed bound): PASS — 12/12 pairs ≤ 3, max composed norm {worst:.4}");
}

/// Criterion 6 — Schatten scaling. d=2, n=32 dense route for
/// 𝟙_K(−Δ_h + r^{1/2})^{−1}: the Schatten value dominates the independent
/// operator-norm estimate at every sample, and the log-log slope of the
/// 𝔖^{s/2} = 𝔖⁴ norm over r ∈ [1, 1024] is within 20% of −0.375.
/// ≤ 5 minutes.
#[test]
fn criterion_06_schatten_scaling() {
    let started = Instant::now();
    let domain = Domain::new(2, 32, std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(domain);
    let mask = indicator_mask(
        &domain,
        &Region::Ball { center: vec![0.0, 0.0], radius: 1.2 },
    )
    .unwrap();
    let alpha = 0.5;
    let order = 4.0;

    let moduli: Vec<f64> = (0..=5).map(|k| 4f64.powi(k)).collect();
    let mut values = Vec::new();
    for &r in &moduli {
        let value = schatten_norm(&spectral, &mask, r, alpha, order).unwrap();
        let op = masked_resolvent_norm(&spectral, &mask, r, alpha, SEED).unwrap();
        assert!(op.converged, "criterion 6: FAIL — operator-norm estimate did not converge at r = {r}");
        assert!(
            value >= op.value * (1.0 - 1e-6),
            "criterion 6: FAIL — Schatten value {value:.6e} below operator norm {:.6e} at r = {r}",
            op.value
        );
        values.push(value);
    }

    let slope = (values.last().unwrap() / values[0]).ln() / (moduli.last().unwrap() / moduli[0]).ln();
    assert!(
        (-0.45..=-0.30).contains(&slope),
        "criterion 6: FAIL — Schatten sweep slope {slope:.4} outside −0.375 ± 20%"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 300.0, "criterion 6: FAIL — runtime {elapsed:.1}s exceeds 300s");
    println!("criterion 6 (Schatten scaling): PASS — slope {slope:.4} ∈ [−0.450, −0.300], norm dominance at 6/6 samples, runtime {elapsed:.1}s");
}

/// Criterion 7 — long-time decay. Reference field (exponent α_m − α*(1−d/s)
/// = 0.125), Gaussian u0, t ∈ {2, 4, ..., 1024}: the envelope check passes
/// at 10% slack and the fitted slope is at most −0.125 + 0.05.
#[test]
fn criterion_07_long_time_decay() {
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let u0 = gaussian(field.domain(), 0.8);

    let times: Vec<f64> = (1..=10).map(|k| 2f64.powi(k)).collect();
    let base = ContourSpec::for_time(times[0], 0.5);
    let report = sample_decay(&solver, &u0, &times, &base).unwrap();
    assert!((report.theoretical_exponent - 0.125).abs() < 1e-14);

    let outcome = envelope_check(&report, 0.10, 0.05);
    assert!(
        outcome.envelope_pass,
        "criterion 7: FAIL — scaled norms rose {:.3}% in one step (> 10% slack)",
        100.0 * outcome.max_step_excess
    );
    assert!(
        report.fitted_slope <= -0.125 + 0.05,
        "criterion 7: FAIL — fitted slope {:.4} above −0.075",
        report.fitted_slope
    );
    assert!(outcome.pass, "criterion 7: FAIL — envelope check did not pass");
    println!("criterion 7 (long-time decay): PASS — fitted slope {:.4} ≤ −0.075, max step excess {:.3e}", report.fitted_slope, outcome.max_step_excess);
}

/// Criterion 8 — short-time behavior. Same field, t geometric in [1e-2, 1]
/// (exponent α_m − α_M = −0.2): scaled norms ‖u(t)‖·t^{0.2} stay within the
/// fitted envelope at 10% slack and the fitted constant is commensurate with
/// ‖u0‖; a constant-order control run (exponent 0) shows no blow-up toward
/// t → 0.
#[test]
fn criterion_08_short_time_behavior() {
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let u0 = gaussian(field.domain(), 0.8);

    let times: Vec<f64> = (0..7).map(|k| 1e-2 * 100f64.powf(k as f64 / 6.0)).collect();
    let base = ContourSpec::for_time(times[0], 0.5);
    let report = sample_decay(&solver, &u0, &times, &base).unwrap();
    assert!((report.theoretical_exponent + 0.2).abs() < 1e-14);

    let outcome = envelope_check(&report, 0.10, 0.05);
    assert!(
        outcome.pass,
        "criterion 8: FAIL — envelope violated: max step excess {:.3e}",
        outcome.max_step_excess
    );
    let scale = u0.l2_norm();
    assert!(
        report.envelope_constant <= 1.1 * scale,
        "criterion 8: FAIL — fitted constant {:.4e} not commensurate with ‖u0‖ = {:.4e}",
        report.envelope_constant,
        scale
    );

    // Constant-order control: exponent 0, norms bounded by the t → 0 anchor.
    let control_field = OrderField::constant(field.domain(), 0.5, 8.0).unwrap();
    let control_solver = Solver::new(&spectral, &control_field).unwrap();
    let control = sample_decay(&control_solver, &u0, &times, &base).unwrap();
    assert_eq!(control.theoretical_exponent, 0.0);
    assert!(
        bounded_by_first_sample(&control, 0.10),
        "criterion 8: FAIL — constant-order control shows blow-up toward t → 0"
    );
    println!("criterion 8 (short-time behavior): PASS — fitted C = {:.4} ≤ 1.1·‖u0‖ = {:.4}, control anchored", report.envelope_constant, 1.1 * scale);
}

/// Criterion 9 — contour robustness: ε ∈ {1/t, 2/t} and θ ∈ {2π/3, 0.6π}
/// give solutions at t = 1 agreeing to 1e-7 relative.
#[test]
fn criterion_09_contour_robustness() {
    let field = reference_field(64);
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let u0 = gaussian(field.domain(), 0.8);
    let t = 1.0;

    let mut solutions = Vec::new();
    for &epsilon in &[1.0, 2.0] {
        for &theta in &[THETA, 0.6 * std::f64::consts::PI] {
            let mut spec = ContourSpec::for_time(t, 0.5);
            spec.epsilon = epsilon;
            spec.theta = theta;
            spec.quad_tol = 1e-9;
            spec.solve_tol = 1e-11;
            let (u, _) = evaluate_solution(&solver, &u0, t, &spec).unwrap();
            solutions.push((epsilon, theta, u));
        }
    }
    let scale = solutions[0].2.l2_norm();
    let mut worst = 0.0f64;
    for (eps, theta, u) in &solutions[1..] {
        let rel = u.sub(&solutions[0].2).l2_norm() / scale;
        worst = worst.max(rel);
        assert!(
            rel <= 1e-7,
            "criterion 9: FAIL — path (ε = {eps}, θ = {theta:.4}) deviates by {rel:.3e}"
        );
    }
    println!("criterion 9 (contour robustness): PASS — max deviation across 4 paths {worst:.3e} ≤ 1e-7");
}

/// Criterion 10 — determinism. The criterion-2 configuration run through the
/// `vord` binary with 1 worker and with 8 workers produces bit-identical CSV
/// outputs.
#[test]
fn criterion_10_determinism_across_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let config_body = "\
kind = oracle-compare
seed = 2024
domain.d = 2
domain.n = 64
domain.l = 6.283185307179586
field.alpha_star = 0.5
field.alpha_max = 0.7
field.region = ball
field.ball.center = 0.0,0.0
field.ball.radius = 1.2
field.kappa.kind = constant
field.kappa.value = 0.7
u0.kind = gaussian
u0.sigma = 0.8
oracle.times = 0.5,1.0,2.0
oracle.n_steps = 4096
oracle.tol = 0.02
";
    let config_path = tmp.path().join("criterion2.cfg");
    std::fs::write(&config_path, config_body).unwrap();

    let mut dirs = Vec::new();
    for (label, threads) in [("one", "1"), ("eight", "8")] {
        let out_root = tmp.path().join(label);
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_vord"))
            .arg("run")
            .arg(&config_path)
            .arg("--out")
            .arg(&out_root)
            .args(["--threads", threads])
            .output()
            .unwrap();
        assert_eq!(
            output.status.code(),
            Some(0),
            "criterion 10: FAIL — run with {threads} workers failed:\n{}{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let run_dir = std::fs::read_dir(&out_root)
            .unwrap()
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .find(|p| p.is_dir())
            .expect("run directory");
        dirs.push(run_dir);
    }

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dirs[0].join("manifest.json")).unwrap(),
    )
    .unwrap();
    let outputs: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(outputs.len() >= 7, "expected oracle.csv plus six snapshots");
    for name in &outputs {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(
            a, b,
            "criterion 10: FAIL — {name} differs between 1 and 8 workers"
        );
    }
    println!("criterion 10 (determinism): PASS — {} CSV outputs bit-identical across 1 vs 8 workers", outputs.len());
}
