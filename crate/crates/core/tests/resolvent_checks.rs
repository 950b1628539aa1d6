//! Verification of the resolvent estimates: sectorial norm bounds over a
//! modulus/phase fan, the composed-shift bound, conjugation symmetry of the
//! solves, cross-method agreement, and the empirical contraction radius of
//! the perturbative splitting.

use num_complex::Complex64;
use vord_core::{
    constant_resolvent_bound, indicator_mask, masked_resolvent_norm, resolvent_norm_bound,
    shift_composition_norm, Domain, GridFunction, KappaProfile, OrderField, PolarPoint, Region,
    SolveStrategy, Solver, Spectral,
};

const SEED: u64 = 7;

fn field_with(
    n: usize,
    half_width: f64,
    kappa: f64,
    radius: f64,
    bounds: (f64, f64),
) -> (Domain, OrderField) {
    let domain = Domain::new(2, n, half_width).unwrap();
    let mask = indicator_mask(
        &domain,
        &Region::Ball { center: vec![0.0, 0.0], radius },
    )
    .unwrap();
    let field = OrderField::build(
        domain,
        0.5,
        bounds,
        8.0,
        mask,
        &KappaProfile::Constant(kappa),
    )
    .unwrap();
    (domain, field)
}

fn bump(domain: Domain) -> GridFunction {
    GridFunction::from_real_fn(domain, |x| {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        (-r2).exp()
    })
}

/// Power-iteration estimates of ‖(−Δ + p^{α(x)})⁻¹‖ stay below the sectorial
/// bound C_β · max_x r^{−α(x)} across moduli and admissible phases.
#[test]
fn sectorial_bound_dominates_measured_norms() {
    let (_, field) = field_with(16, std::f64::consts::PI, 0.7, 1.2, (0.5, 0.7));
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();

    let phases = [0.0, std::f64::consts::FRAC_PI_3, -std::f64::consts::FRAC_PI_3];
    for &r in &[1e-2, 1.0, 1e2] {
        for &beta in &phases {
            let p = PolarPoint::new(r, beta).unwrap();
            let bound = resolvent_norm_bound(p, &field).unwrap();
            let measured = solver.resolvent_norm(p, 1e-11, SEED).unwrap();
            assert!(
                measured.converged,
                "norm estimate did not converge at r {r}, beta {beta}"
            );
            assert!(
                measured.value <= bound * (1.0 + 1e-6),
                "sectorial bound violated at r {r}, beta {beta}: \
                 measured {:.6e} > bound {bound:.6e}",
                measured.value
            );
        }
    }
}

/// For a constant order the bound specializes to r^{−α}/|sin(αβ)| and the
/// exact diagonal norm must sit below it.
#[test]
fn constant_order_bound_matches_diagonal_norm() {
    let domain = Domain::new(2, 16, std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(domain);
    let alpha = 0.6;

    for &r in &[1e-3, 0.1, 10.0, 1e3] {
        for &beta in &[0.0, 1.0, -2.0] {
            let p = PolarPoint::new(r, beta).unwrap();
            let m = vord_core::principal_power(p, alpha).unwrap();
            let exact = vord_core::diagonal_resolvent_norm(&spectral, m);
            let bound = constant_resolvent_bound(p, alpha);
            assert!(
                exact <= bound * (1.0 + 1e-12),
                "constant-order bound violated at r {r}, beta {beta}"
            );
        }
    }
}

/// ‖(−Δ + r^α)(−Δ + p^α)⁻¹‖ ≤ 3 on the admissible sector: the rotation from
/// the positive axis to phase β costs a bounded factor.
#[test]
fn composed_shift_norm_is_bounded_by_three() {
    let domain = Domain::new(2, 32, std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(domain);

    for &alpha in &[0.5, 0.7, 0.9] {
        let theta = vord_core::default_theta(alpha);
        for &r in &[1e-3, 1e-1, 1.0, 1e1, 1e3] {
            for &frac in &[0.0, 0.5, 1.0] {
                let p = PolarPoint::new(r, frac * theta).unwrap();
                let value = shift_composition_norm(&spectral, p, alpha).unwrap();
                assert!(
                    value <= 3.0,
                    "composed bound exceeded at alpha {alpha}, r {r}, frac {frac}: {value:.6e}"
                );
            }
        }
    }
}

/// Solving at the conjugate point with conjugate data must return the
/// conjugate solution.
#[test]
fn conjugate_points_give_conjugate_solutions() {
    let (domain, field) = field_with(16, std::f64::consts::PI, 0.7, 1.2, (0.5, 0.7));
    let spectral = Spectral::new(domain);
    let solver = Solver::new(&spectral, &field).unwrap();

    let rhs = GridFunction::from_fn(domain, |x| {
        Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.3 * (x[0] + 0.2 * x[1]).sin())
    });
    let rhs_conj = GridFunction::from_values(
        domain,
        rhs.values().iter().map(|v| v.conj()).collect(),
    )
    .unwrap();

    let p = PolarPoint::new(0.8, 1.9).unwrap();
    let (x, _) = solver.solve(p, &rhs, 1e-11).unwrap();
    let (x_mirror, _) = solver.solve(p.conj(), &rhs_conj, 1e-11).unwrap();

    let scale = x.l2_norm();
    let gap = x
        .values()
        .iter()
        .zip(x_mirror.values())
        .map(|(a, b)| (a - b.conj()).norm())
        .fold(0.0f64, f64::max);
    assert!(gap <= 1e-9 * scale, "conjugation symmetry violated by {gap:.3e}");
}

/// The perturbative and Krylov paths are independent algorithms; on a point
/// where both apply they must agree to solver tolerance.
#[test]
fn neumann_and_krylov_solutions_agree() {
    let (domain, field) = field_with(16, std::f64::consts::PI, 0.7, 1.2, (0.5, 0.7));
    let spectral = Spectral::new(domain);
    let solver = Solver::new(&spectral, &field).unwrap();
    let rhs = bump(domain);

    // Small modulus keeps the splitting contractive so both methods converge.
    let p = PolarPoint::new(0.05, 1.2).unwrap();
    let (x_neumann, report_n) = solver
        .solve_with(p, &rhs, 1e-11, SolveStrategy::NeumannOnly, None)
        .unwrap();
    let (x_krylov, report_k) = solver
        .solve_with(p, &rhs, 1e-11, SolveStrategy::KrylovOnly, None)
        .unwrap();

    assert!(report_n.relative_residual <= 1e-11);
    assert!(report_k.relative_residual <= 1e-11);
    let rel = x_neumann.sub(&x_krylov).l2_norm() / x_neumann.l2_norm();
    assert!(rel <= 1e-9, "methods disagree by {rel:.3e}");
}

/// On a field with a strong order contrast (0.9 on a wide ball over the 0.5
/// baseline) the unit radius is not certifiable and the search must bisect
/// down to a strictly interior radius.
#[test]
fn strong_contrast_forces_interior_contraction_radius() {
    let (_, field) = field_with(32, 2.0 * std::f64::consts::PI, 0.9, 3.0, (0.5, 0.9));
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let theta = 2.0 * std::f64::consts::PI / 3.0;

    let r0 = solver.empirical_contraction_radius(theta, 9, SEED).unwrap();
    assert!(
        (0.01..=0.5).contains(&r0),
        "contraction radius {r0:.4e} outside the expected interior bracket"
    );
}

/// Shrinking the support of the order perturbation weakens it, so the
/// certified radius can only grow.
#[test]
fn contraction_radius_grows_as_support_shrinks() {
    let theta = 2.0 * std::f64::consts::PI / 3.0;
    let mut previous = 0.0;
    for &radius in &[3.0, 1.5, 0.75] {
        let (_, field) = field_with(32, 2.0 * std::f64::consts::PI, 0.9, radius, (0.5, 0.9));
        let spectral = Spectral::new(field.domain());
        let solver = Solver::new(&spectral, &field).unwrap();
        let r0 = solver.empirical_contraction_radius(theta, 9, SEED).unwrap();
        assert!(
            r0 >= previous * (1.0 - 1e-3),
            "radius {r0:.4e} shrank when support went down to {radius}"
        );
        previous = r0;
    }
    assert!(previous >= 0.9, "smallest support should certify near unit radius");
}

/// The mild reference contrast (0.7 on a 1.2-ball) is certifiable at the
/// unit radius itself.
#[test]
fn reference_field_certifies_unit_radius() {
    let (_, field) = field_with(32, 2.0 * std::f64::consts::PI, 0.7, 1.2, (0.5, 0.7));
    let spectral = Spectral::new(field.domain());
    let solver = Solver::new(&spectral, &field).unwrap();
    let theta = 2.0 * std::f64::consts::PI / 3.0;
    let r0 = solver.empirical_contraction_radius(theta, 9, SEED).unwrap();
    assert_eq!(r0, 1.0);
}

/// With orders strictly below one, every representable phase |β| < π stays
/// inside the sector, so the bound is finite even arbitrarily close to the
/// branch cut.
#[test]
fn bound_stays_finite_up_to_the_cut() {
    let (_, sharp) = field_with(16, std::f64::consts::PI, 0.99, 1.2, (0.5, 0.99));
    let p_extreme = PolarPoint::new(1.0, 3.1).unwrap();
    let bound = resolvent_norm_bound(p_extreme, &sharp).unwrap();
    assert!(bound.is_finite() && bound > 0.0);
    // Approaching the cut inflates the constant: it must exceed the β = 0 one.
    let axis = resolvent_norm_bound(PolarPoint::new(1.0, 0.0).unwrap(), &sharp).unwrap();
    assert!(bound > axis);
}

/// The compressed operator 1_K R 1_K cannot exceed the full resolvent norm.
#[test]
fn masked_norm_is_dominated_by_full_norm() {
    let (domain, field) = field_with(16, std::f64::consts::PI, 0.7, 1.2, (0.5, 0.7));
    let spectral = Spectral::new(domain);
    let r = 4.0;
    let alpha = 0.5;

    let masked = masked_resolvent_norm(&spectral, field.mask(), r, alpha, SEED).unwrap();
    assert!(masked.converged);
    // Full diagonal norm at the real point r with constant order alpha.
    let m = vord_core::principal_power(PolarPoint::new(r, 0.0).unwrap(), alpha).unwrap();
    let full = vord_core::diagonal_resolvent_norm(&spectral, m);
    assert!(
        masked.value <= full * (1.0 + 1e-6),
        "masked norm {:.6e} exceeds full norm {full:.6e}",
        masked.value
    );
}
