//! Inverse-Laplace contour quadrature for the time-domain solution.
//!
//! The solution at time t is recovered from resolvent data along a keyhole
//! contour γ = γ_- ∪ γ_0 ∪ γ_+ in the cut plane:
//!
//!   u(t) = (1/2πi) ∮_γ e^{tp} (-Δ + p^{α(x)})^{-1} p^{α(x)-1} u0 dp,
//!
//! with γ_0 the arc {ε e^{iβ} : β ∈ [-θ, θ]} and γ_± the rays
//! {s e^{±iθ} : s ≥ ε}, traversed upward (descending s on γ_-, ascending β,
//! ascending s on γ_+). The half-angle must satisfy θ > π/2 so e^{tp} decays
//! along the rays; the truncation radius is chosen so the discarded ray tail
//! contributes below the quadrature tolerance: |e^{tp}| = e^{ts cos θ} gives
//! r_max = -ln(quad_tol)/(t |cos θ|).
//!
//! Quadrature: Gauss–Legendre on the arc, composite Gauss–Legendre on
//! ratio-2 geometric panels along each ray (the integrand varies on the
//! scale of s itself, so geometric panels equidistribute the error; node
//! counts double until two successive levels agree in L²). Each node costs
//! one verified resolvent solve; node work is batched in fixed chunks and
//! combined by pairwise summation in a fixed order, so results are
//! bit-identical for any worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::power::PolarPoint;
use crate::quadrature::{gauss_legendre, geometric_panels, map_to_interval};
use crate::resolvent::{SolveMethod, Solver};

/// Default contour half-angle: min(2π/3, π/(2α)).
pub fn default_theta(alpha_star: f64) -> f64 {
    debug_assert!(alpha_star > 0.0 && alpha_star <= 1.0);
    (2.0 * std::f64::consts::PI / 3.0).min(std::f64::consts::PI / (2.0 * alpha_star))
}

/// Geometry and refinement parameters of one contour evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ContourSpec {
    /// Ray half-angle θ ∈ (π/2, π).
    pub theta: f64,
    /// Arc radius ε (default 1/t).
    pub epsilon: f64,
    /// Base Gauss–Legendre points on the arc.
    pub n_arc: usize,
    /// Base total points per ray (distributed over geometric panels).
    pub n_ray: usize,
    /// Ray truncation radius; 0 selects -ln(quad_tol)/(t |cos θ|).
    pub r_max: f64,
    /// Relative L² tolerance for the node-doubling loop.
    pub quad_tol: f64,
    /// Relative residual tolerance for each per-node solve.
    pub solve_tol: f64,
    /// Refinement budget: levels of node doubling to try.
    pub max_doublings: usize,
}

impl ContourSpec {
    /// Standard parameters for evaluation at time t with baseline order α*.
    pub fn for_time(t: f64, alpha_star: f64) -> Self {
        Self {
            theta: default_theta(alpha_star),
            epsilon: 1.0 / t,
            n_arc: 16,
            n_ray: 48,
            r_max: 0.0,
            quad_tol: 1e-8,
            solve_tol: 1e-10,
            max_doublings: 6,
        }
    }
}

/// Which contour piece a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourPiece {
    RayMinus,
    Arc,
    RayPlus,
}

/// One quadrature node: location, composite weight (including the measure
/// factor dp and the 1/2πi prefactor), and the piece it lies on.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureNode {
    pub p: PolarPoint,
    pub weight: Complex64,
    pub piece: ContourPiece,
}

/// Builds the contour nodes for time t in path order (descending s on the
/// lower ray, ascending β on the arc, ascending s on the upper ray).
pub fn build_contour(t: f64, spec: &ContourSpec) -> Result<Vec<QuadratureNode>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    if !(spec.theta > std::f64::consts::FRAC_PI_2 && spec.theta < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "contour half-angle must lie in (pi/2, pi), got {}",
            spec.theta
        )));
    }
    if !(spec.epsilon.is_finite() && spec.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "arc radius must be positive, got {}",
            spec.epsilon
        )));
    }
    if !(spec.quad_tol > 0.0 && spec.quad_tol <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must lie in (0, 0.1], got {}",
            spec.quad_tol
        )));
    }
    if spec.n_arc < 4 || spec.n_ray < 8 {
        return Err(Error::InvalidArgument(
            "need at least 4 arc points and 8 ray points".into(),
        ));
    }
    let r_max = if spec.r_max > 0.0 {
        spec.r_max
    } else {
        -spec.quad_tol.ln() / (t * spec.theta.cos().abs())
    }
    .max(2.0 * spec.epsilon);

    let inv_two_pi_i = Complex64::new(0.0, -0.5 / std::f64::consts::PI);
    let ray_plus_dir = Complex64::new(spec.theta.cos(), spec.theta.sin());
    let ray_minus_dir = ray_plus_dir.conj();

    // Composite Gauss–Legendre on geometric panels for the rays.
    let panels = geometric_panels(spec.epsilon, r_max, 2.0);
    let per_panel = (spec.n_ray.div_ceil(panels.len())).max(2);
    let (ref_nodes, ref_weights) = gauss_legendre(per_panel);
    let mut ray: Vec<(f64, f64)> = Vec::with_capacity(panels.len() * per_panel);
    for &(a, b) in &panels {
        let (xs, ws) = map_to_interval(&ref_nodes, &ref_weights, a, b);
        ray.extend(xs.into_iter().zip(ws));
    }

    let mut nodes = Vec::with_capacity(2 * ray.len() + spec.n_arc);
    for &(s, w) in ray.iter().rev() {
        nodes.push(QuadratureNode {
            p: PolarPoint::new(s, -spec.theta)?,
            weight: -Complex64::new(w, 0.0) * ray_minus_dir * inv_two_pi_i,
            piece: ContourPiece::RayMinus,
        });
    }
    let (arc_nodes, arc_weights) = gauss_legendre(spec.n_arc);
    let (betas, beta_weights) = map_to_interval(&arc_nodes, &arc_weights, -spec.theta, spec.theta);
    for (&beta, &w) in betas.iter().zip(&beta_weights) {
        let p = PolarPoint::new(spec.epsilon, beta)?;
        nodes.push(QuadratureNode {
            p,
            weight: Complex64::new(0.0, 1.0) * p.to_complex() * w * inv_two_pi_i,
            piece: ContourPiece::Arc,
        });
    }
    for &(s, w) in &ray {
        nodes.push(QuadratureNode {
            p: PolarPoint::new(s, spec.theta)?,
            weight: Complex64::new(w, 0.0) * ray_plus_dir * inv_two_pi_i,
            piece: ContourPiece::RayPlus,
        });
    }
    Ok(nodes)
}

/// The three per-piece partial solutions (their sum is the solution).
#[derive(Clone, Debug)]
pub struct ContourComponents {
    pub ray_minus: GridFunction,
    pub arc: GridFunction,
    pub ray_plus: GridFunction,
}

impl ContourComponents {
    /// Fixed-order sum γ_- + γ_0 + γ_+ (the exact value returned by
    /// [`evaluate_solution`]).
    pub fn total(&self) -> GridFunction {
        let mut out = self.ray_minus.clone();
        out.axpy(Complex64::new(1.0, 0.0), &self.arc);
        out.axpy(Complex64::new(1.0, 0.0), &self.ray_plus);
        out
    }
}

/// Convergence and solver statistics for one contour evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ContourSummary {
    pub t: f64,
    /// Refinement levels actually evaluated (≥ 2: base level plus checks).
    pub levels_used: usize,
    /// Final arc / per-ray node budgets.
    pub n_arc: usize,
    pub n_ray: usize,
    /// Total nodes at the accepted level.
    pub node_count: usize,
    /// Final successive-difference norm relative to the solution norm.
    pub quadrature_error: f64,
    pub max_solve_iterations: usize,
    pub max_relative_residual: f64,
    pub neumann_nodes: usize,
    pub krylov_nodes: usize,
    pub diagonal_nodes: usize,
}

#[derive(Clone, Copy, Default)]
struct SolveStats {
    max_iterations: usize,
    max_residual: f64,
    neumann: usize,
    krylov: usize,
    diagonal: usize,
}

impl SolveStats {
    fn merge(&mut self, other: &SolveStats) {
        self.max_iterations = self.max_iterations.max(other.max_iterations);
        self.max_residual = self.max_residual.max(other.max_residual);
        self.neumann += other.neumann;
        self.krylov += other.krylov;
        self.diagonal += other.diagonal;
    }
}

/// Pairwise (tree) summation of equally shaped vectors in a fixed order.
fn pairwise_sum(mut parts: Vec<Vec<Complex64>>, len: usize) -> Vec<Complex64> {
    if parts.is_empty() {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut iter = parts.into_iter();
        while let Some(mut a) = iter.next() {
            if let Some(b) = iter.next() {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}

const NODE_CHUNK: usize = 8;

fn accumulate_piece(
    solver: &Solver,
    u0: &GridFunction,
    t: f64,
    nodes: &[QuadratureNode],
    solve_tol: f64,
) -> Result<(Vec<Complex64>, SolveStats)> {
    let len = solver.spectral().domain().len();
    // Fixed-size chunks are the parallel work units; the partials are then
    // combined pairwise in chunk order, independent of the worker count.
    let partials: Vec<Result<(Vec<Complex64>, SolveStats)>> = nodes
        .par_chunks(NODE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut stats = SolveStats::default();
            for node in chunk {
                let rhs = solver.laplace_rhs(node.p, u0)?;
                let (u, report) = solver.solve(node.p, &rhs, solve_tol)?;
                stats.max_iterations = stats.max_iterations.max(report.iterations);
                stats.max_residual = stats.max_residual.max(report.relative_residual);
                match report.method {
                    SolveMethod::Neumann => stats.neumann += 1,
                    SolveMethod::DirectKrylov => stats.krylov += 1,
                    SolveMethod::ConstantDiagonal => stats.diagonal += 1,
                }
                let factor = node.weight * (node.p.to_complex() * t).exp();
                for (a, v) in acc.iter_mut().zip(u.values()) {
                    *a += factor * v;
                }
            }
            Ok((acc, stats))
        })
        .collect();
    let mut vecs = Vec::with_capacity(partials.len());
    let mut stats = SolveStats::default();
    for part in partials {
        let (v, s) = part?;
        stats.merge(&s);
        vecs.push(v);
    }
    Ok((pairwise_sum(vecs, len), stats))
}

/// Evaluates the per-piece contour sums at time t, refining the node count
/// until two successive levels agree to `quad_tol` in relative L².
pub fn evaluate_components(
    solver: &Solver,
    u0: &GridFunction,
    t: f64,
    spec: &ContourSpec,
) -> Result<(ContourComponents, ContourSummary)> {
    let domain = solver.spectral().domain();
    if u0.domain() != domain {
        return Err(Error::InvalidArgument("initial data domain mismatch".into()));
    }
    if !(spec.solve_tol > 0.0 && spec.solve_tol < spec.quad_tol) {
        return Err(Error::InvalidArgument(format!(
            "per-node solve tolerance {} must be positive and below the quadrature tolerance {}",
            spec.solve_tol, spec.quad_tol
        )));
    }

    let mut previous: Option<(ContourComponents, GridFunction, ContourSummary)> = None;
    for level in 0..=spec.max_doublings {
        let level_spec = ContourSpec {
            n_arc: spec.n_arc << level,
            n_ray: spec.n_ray << level,
            ..*spec
        };
        let nodes = build_contour(t, &level_spec)?;
        let split = |piece: ContourPiece| -> Vec<QuadratureNode> {
            nodes.iter().copied().filter(|n| n.piece == piece).collect()
        };
        let minus_nodes = split(ContourPiece::RayMinus);
        let arc_nodes = split(ContourPiece::Arc);
        let plus_nodes = split(ContourPiece::RayPlus);
        let (minus, s1) = accumulate_piece(solver, u0, t, &minus_nodes, level_spec.solve_tol)?;
        let (arc, s2) = accumulate_piece(solver, u0, t, &arc_nodes, level_spec.solve_tol)?;
        let (plus, s3) = accumulate_piece(solver, u0, t, &plus_nodes, level_spec.solve_tol)?;
        let mut stats = s1;
        stats.merge(&s2);
        stats.merge(&s3);
        let components = ContourComponents {
            ray_minus: GridFunction::from_values(domain, minus)?,
            arc: GridFunction::from_values(domain, arc)?,
            ray_plus: GridFunction::from_values(domain, plus)?,
        };
        let total = components.total();
        let summary = ContourSummary {
            t,
            levels_used: level + 1,
            n_arc: level_spec.n_arc,
            n_ray: level_spec.n_ray,
            node_count: nodes.len(),
            quadrature_error: f64::INFINITY,
            max_solve_iterations: stats.max_iterations,
            max_relative_residual: stats.max_residual,
            neumann_nodes: stats.neumann,
            krylov_nodes: stats.krylov,
            diagonal_nodes: stats.diagonal,
        };
        if let Some((_, prev_total, prev_summary)) = &previous {
            let diff = total.sub(prev_total).l2_norm();
            let scale = total.l2_norm().max(f64::MIN_POSITIVE);
            if diff <= spec.quad_tol * scale {
                let mut summary = summary;
                summary.quadrature_error = diff / scale;
                summary.max_solve_iterations =
                    summary.max_solve_iterations.max(prev_summary.max_solve_iterations);
                summary.max_relative_residual =
                    summary.max_relative_residual.max(prev_summary.max_relative_residual);
                return Ok((components, summary));
            }
        }
        previous = Some((components, total, summary));
    }

    let (_, last_total, _) = previous.expect("at least one level evaluated");
    Err(Error::QuadratureDidNotConverge {
        difference: last_total.l2_norm(),
        tolerance: spec.quad_tol,
        doublings: spec.max_doublings,
    })
}

/// Evaluates the solution u(t): the fixed-order sum of the converged
/// contour components.
pub fn evaluate_solution(
    solver: &Solver,
    u0: &GridFunction,
    t: f64,
    spec: &ContourSpec,
) -> Result<(GridFunction, ContourSummary)> {
    let (components, summary) = evaluate_components(solver, u0, t, spec)?;
    Ok((components.total(), summary))
}
