//! Decay-rate sampling and envelope verification.
//!
//! For an admissible order field the solution obeys one-sided power bounds
//! in each time regime:
//!
//! - long time: ‖u(t)‖ ≤ C t^{-σ} with σ = α_min - α*(1 - d/s) (positive
//!   exactly when the decay condition holds);
//! - short time: ‖u(t)‖ ≤ C t^{α_min - α_max} (a bound that *allows* mild
//!   blow-up as t → 0; actual solutions may decay more slowly than the
//!   bound permits, e.g. stay bounded).
//!
//! Because the bounds are one-sided, verification multiplies the sampled
//! norms into envelope values norm·t^{|exponent|} and checks, processing the
//! samples toward the regime limit (ascending t for long time, descending t
//! for short time), that after a transient quarter the envelope never rises
//! more than a fixed slack above its running maximum. The long-time check
//! additionally requires the fitted log-log slope to reach the theoretical
//! rate up to a small slack; the short-time bound carries no slope claim.

use rayon::prelude::*;

use crate::contour::{evaluate_solution, ContourSpec};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::order_field::OrderField;
use crate::resolvent::Solver;

/// Which time regime a decay study targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayRegime {
    /// t ≥ 1, bound ‖u‖ ≤ C t^{-σ}, σ > 0.
    LongTime,
    /// t ≤ 1, bound ‖u‖ ≤ C t^{α_min - α_max}.
    ShortTime,
}

/// Sampled norms with the theoretical rate and a least-squares slope.
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub regime: DecayRegime,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Long time: σ > 0 (decay t^{-σ}). Short time: α_min - α_max ≤ 0.
    pub theoretical_exponent: f64,
    /// Log-log slope fitted on the regime-relevant half of the samples.
    pub fitted_slope: f64,
    /// Largest envelope value norm·t^{|exponent|} over the samples.
    pub envelope_constant: f64,
}

/// Long-time decay rate σ = α_min - α*(1 - d/s); errs unless the decay
/// condition holds with positive margin.
pub fn long_time_exponent(field: &OrderField) -> Result<f64> {
    let (holds, margin) = field.validate_decay_condition()?;
    if !holds {
        return Err(Error::DecayConditionViolated(format!(
            "alpha*(1 - d/s) = {} is not below alpha_min = {}",
            field.alpha_star() * (1.0 - field.domain().dimension() as f64 / field.s()),
            field.alpha_min()
        )));
    }
    Ok(margin)
}

/// Short-time exponent α_min - α_max ≤ 0.
pub fn short_time_exponent(field: &OrderField) -> f64 {
    field.alpha_min() - field.alpha_max()
}

/// Assembles a report from already computed norms: validates the sample
/// layout, fits the slope, and records the envelope constant.
pub fn decay_report(
    regime: DecayRegime,
    times: Vec<f64>,
    norms: Vec<f64>,
    theoretical_exponent: f64,
) -> Result<DecayReport> {
    if times.len() != norms.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times vs {} norms",
            times.len(),
            norms.len()
        )));
    }
    if times.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || times[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "times must be positive and strictly increasing".into(),
        ));
    }
    if norms.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidArgument("norms must be positive and finite".into()));
    }
    match regime {
        DecayRegime::LongTime if times[0] < 1.0 => {
            return Err(Error::InvalidArgument(
                "long-time samples must satisfy t >= 1".into(),
            ));
        }
        DecayRegime::ShortTime if *times.last().unwrap() > 1.0 => {
            return Err(Error::InvalidArgument(
                "short-time samples must satisfy t <= 1".into(),
            ));
        }
        _ => {}
    }

    // Fit on the half of the samples nearest the regime limit.
    let mid = (times[0] * times[times.len() - 1]).sqrt();
    let subset: Vec<(f64, f64)> = times
        .iter()
        .zip(&norms)
        .filter(|(&t, _)| match regime {
            DecayRegime::LongTime => t >= mid,
            DecayRegime::ShortTime => t <= mid,
        })
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    let fitted_slope = least_squares_slope(&subset);

    let mult = theoretical_exponent.abs();
    let envelope_constant = times
        .iter()
        .zip(&norms)
        .map(|(&t, &v)| v * t.powf(mult))
        .fold(0.0, f64::max);

    Ok(DecayReport { regime, times, norms, theoretical_exponent, fitted_slope, envelope_constant })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Samples ‖u(t)‖ over a time ladder via the contour solver and assembles
/// the decay report for the regime the ladder lies in. The base spec's
/// ε and truncation radius are re-derived per time (ε = 1/t, automatic
/// r_max); its tolerances, angles and node budgets apply to every sample.
pub fn sample_decay(
    solver: &Solver,
    u0: &GridFunction,
    times: &[f64],
    base: &ContourSpec,
) -> Result<DecayReport> {
    if times.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 sample times".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || times[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "times must be positive and strictly increasing".into(),
        ));
    }
    let regime = if times[0] >= 1.0 {
        DecayRegime::LongTime
    } else if *times.last().unwrap() <= 1.0 {
        DecayRegime::ShortTime
    } else {
        return Err(Error::InvalidArgument(
            "sample ladder straddles t = 1; decay regimes must be sampled separately".into(),
        ));
    };
    let exponent = match regime {
        DecayRegime::LongTime => long_time_exponent(solver.field())?,
        DecayRegime::ShortTime => short_time_exponent(solver.field()),
    };
    let norms: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let spec = ContourSpec { epsilon: 1.0 / t, r_max: 0.0, ..*base };
            evaluate_solution(solver, u0, t, &spec).map(|(u, _)| u.l2_norm())
        })
        .collect::<Result<_>>()?;
    decay_report(regime, times.to_vec(), norms, exponent)
}

/// Outcome of the envelope verification.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeOutcome {
    /// Conjunction of the envelope and slope conditions.
    pub pass: bool,
    /// Envelope values never rose more than `slack` above the running max
    /// after the transient quarter.
    pub envelope_pass: bool,
    /// Long time: fitted slope ≤ -σ + slope_slack. Always true short-time.
    pub slope_pass: bool,
    /// Long time: (-σ + slope_slack) - fitted_slope (≥ 0 when passing).
    pub slope_margin: Option<f64>,
    /// Worst post-transient rise of the envelope above its running max.
    pub max_step_excess: f64,
}

/// Checks the one-sided power bound on a decay report.
///
/// Envelope values norm·t^{|exponent|} are processed toward the regime limit
/// (ascending t for long time, descending t for short time). The first
/// quarter of the processed sequence is a transient; afterwards each value
/// must stay within `(1 + slack)` of the running maximum. For the long-time
/// regime the fitted slope must also satisfy slope ≤ -σ + slope_slack.
pub fn envelope_check(report: &DecayReport, slack: f64, slope_slack: f64) -> EnvelopeOutcome {
    let len = report.times.len();
    let mult = report.theoretical_exponent.abs();
    let ordered: Vec<f64> = match report.regime {
        DecayRegime::LongTime => (0..len)
            .map(|i| report.norms[i] * report.times[i].powf(mult))
            .collect(),
        DecayRegime::ShortTime => (0..len)
            .rev()
            .map(|i| report.norms[i] * report.times[i].powf(mult))
            .collect(),
    };
    let transient = len.div_ceil(4);
    let mut running_max = ordered[0];
    let mut envelope_pass = true;
    let mut max_step_excess = f64::NEG_INFINITY;
    for (i, &e) in ordered.iter().enumerate().skip(1) {
        if i >= transient {
            let excess = e / running_max - 1.0;
            max_step_excess = max_step_excess.max(excess);
            if e > (1.0 + slack) * running_max {
                envelope_pass = false;
            }
        }
        running_max = running_max.max(e);
    }
    let (slope_pass, slope_margin) = match report.regime {
        DecayRegime::LongTime => {
            let limit = -report.theoretical_exponent + slope_slack;
            (report.fitted_slope <= limit, Some(limit - report.fitted_slope))
        }
        DecayRegime::ShortTime => (true, None),
    };
    EnvelopeOutcome {
        pass: envelope_pass && slope_pass,
        envelope_pass,
        slope_pass,
        slope_margin,
        max_step_excess,
    }
}

/// The explicit-constant variant: the envelope constant is fitted from the
/// sample nearest the regime limit (smallest t short-time, largest t
/// long-time) and every envelope value must stay within `(1 + slack)` of it.
pub fn bounded_by_first_sample(report: &DecayReport, slack: f64) -> bool {
    let len = report.times.len();
    let mult = report.theoretical_exponent.abs();
    let e = |i: usize| report.norms[i] * report.times[i].powf(mult);
    let anchor = match report.regime {
        DecayRegime::ShortTime => e(0),
        DecayRegime::LongTime => e(len - 1),
    };
    (0..len).all(|i| e(i) <= (1.0 + slack) * anchor)
}
