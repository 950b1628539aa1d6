//! One-dimensional quadrature building blocks.
//!
//! Gauss–Legendre rules (computed by Newton iteration on the Legendre
//! recurrence, symmetrized so the node set is exactly even), geometric panel
//! subdivision for semi-infinite ranges, and an adaptive Simpson integrator
//! for smooth scalar integrands.

/// Gauss–Legendre rule with `n` points on [-1, 1].
///
/// Returns `(nodes, weights)` with nodes in ascending order. The rule is
/// exact for polynomials of degree `2n - 1`; weights sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre requires n >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th root from the top.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        // The guess above descends from +1, so index from the top and mirror.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Affine image of a reference rule on [a, b].
pub fn map_to_interval(nodes: &[f64], weights: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let x = nodes.iter().map(|t| mid + half * t).collect();
    let w = weights.iter().map(|w| half * w).collect();
    (x, w)
}

/// Splits [a, b] into panels whose widths grow geometrically by `ratio`,
/// starting with a first panel of width `a * (ratio - 1)` (so panel edges sit
/// at a, a·ratio, a·ratio², … until b). The last panel is clipped to end
/// exactly at b.
pub fn geometric_panels(a: f64, b: f64, ratio: f64) -> Vec<(f64, f64)> {
    assert!(a > 0.0 && b > a && ratio > 1.0, "invalid panel parameters");
    let mut panels = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = (lo * ratio).min(b);
        panels.push((lo, hi));
        lo = hi;
    }
    panels
}

/// Adaptive Simpson integration of a smooth scalar function on [a, b] to the
/// requested absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    assert!(b > a && tol > 0.0, "invalid integration parameters");
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}
