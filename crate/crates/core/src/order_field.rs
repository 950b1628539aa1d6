//! Spatially varying fractional orders α(x).
//!
//! An order field consists of a baseline order α* valid outside a compact
//! perturbation region K, together with order values κ(x) on K. Admissibility
//! requires global pointwise bounds 0 < α_min ≤ α(x) ≤ α_max < 1, a baseline
//! inside the same bracket, and a perturbation region that stays strictly
//! inside the box (no masked point may touch a boundary layer of the grid),
//! so that K is genuinely compact in the open box.
//!
//! The field also carries an integrability exponent s > d used by the decay
//! analysis: the long-time rate α_min - α*(1 - d/s) is positive exactly when
//! α*(1 - d/s) < α_min, which [`OrderField::validate_decay_condition`]
//! evaluates together with its margin.

use crate::error::{Error, Result};
use crate::grid::Domain;

/// Order profile on the perturbation region.
#[derive(Clone, Debug)]
pub enum KappaProfile {
    /// κ ≡ value on K.
    Constant(f64),
    /// Smooth bump κ(x) = base + amplitude · exp(1 - 1/(1 - ρ²)) with
    /// ρ = |x - center| / radius (the exponential factor is 0 for ρ ≥ 1).
    Bump { base: f64, amplitude: f64, center: Vec<f64>, radius: f64 },
    /// Arbitrary per-point table over the full grid; entries off K are ignored.
    Table(Vec<f64>),
}

/// A validated variable-order field over one domain.
#[derive(Clone, Debug)]
pub struct OrderField {
    domain: Domain,
    alpha_star: f64,
    alpha_min: f64,
    alpha_max: f64,
    s: f64,
    mask: Vec<bool>,
    alpha: Vec<f64>,
}

impl OrderField {
    /// The constant-order field α ≡ α* (empty perturbation region).
    pub fn constant(domain: Domain, alpha_star: f64, s: f64) -> Result<Self> {
        Self::build(
            domain,
            alpha_star,
            (alpha_star, alpha_star),
            s,
            vec![false; domain.len()],
            &KappaProfile::Constant(alpha_star),
        )
    }

    /// Builds and validates a field from a mask and an order profile.
    ///
    /// `bounds = (alpha_min, alpha_max)` is the admissibility bracket; the
    /// realized orders must satisfy it pointwise and the baseline must lie in
    /// it. The mask must not touch the outermost grid layer on any axis.
    pub fn build(
        domain: Domain,
        alpha_star: f64,
        bounds: (f64, f64),
        s: f64,
        mask: Vec<bool>,
        kappa: &KappaProfile,
    ) -> Result<Self> {
        let (alpha_min, alpha_max) = bounds;
        if !(alpha_min.is_finite() && alpha_max.is_finite() && 0.0 < alpha_min && alpha_max < 1.0)
        {
            return Err(Error::InvalidOrderField(format!(
                "order bounds must satisfy 0 < alpha_min <= alpha_max < 1, got ({alpha_min}, {alpha_max})"
            )));
        }
        if alpha_min > alpha_max {
            return Err(Error::InvalidOrderField(format!(
                "alpha_min {alpha_min} exceeds alpha_max {alpha_max}"
            )));
        }
        if !(alpha_star >= alpha_min && alpha_star <= alpha_max) {
            return Err(Error::InvalidOrderField(format!(
                "baseline order {alpha_star} outside bounds [{alpha_min}, {alpha_max}]"
            )));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidOrderField(format!(
                "integrability exponent must be positive, got {s}"
            )));
        }
        if mask.len() != domain.len() {
            return Err(Error::InvalidOrderField(format!(
                "mask has {} entries, domain has {} points",
                mask.len(),
                domain.len()
            )));
        }
        let n = domain.points_per_axis();
        let d = domain.dimension();
        for (idx, &inside) in mask.iter().enumerate() {
            if !inside {
                continue;
            }
            let mi = domain.multi_index(idx);
            if (0..d).any(|a| mi[a] == 0 || mi[a] == n - 1) {
                return Err(Error::InvalidOrderField(
                    "perturbation region touches the box boundary; it must be compactly contained"
                        .into(),
                ));
            }
        }
        if let KappaProfile::Table(values) = kappa {
            if values.len() != domain.len() {
                return Err(Error::InvalidOrderField(format!(
                    "order table has {} entries, domain has {} points",
                    values.len(),
                    domain.len()
                )));
            }
        }
        if let KappaProfile::Bump { center, radius, .. } = kappa {
            if center.len() != d {
                return Err(Error::InvalidOrderField(format!(
                    "bump center has {} coordinates on a {d}-dimensional domain",
                    center.len()
                )));
            }
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::InvalidOrderField(format!(
                    "bump radius must be positive, got {radius}"
                )));
            }
        }

        let mut alpha = vec![alpha_star; domain.len()];
        for idx in 0..domain.len() {
            if !mask[idx] {
                continue;
            }
            let value = match kappa {
                KappaProfile::Constant(v) => *v,
                KappaProfile::Table(values) => values[idx],
                KappaProfile::Bump { base, amplitude, center, radius } => {
                    let pos = domain.position(idx);
                    let rho_sq: f64 = (0..d)
                        .map(|a| ((pos[a] - center[a]) / radius).powi(2))
                        .sum();
                    if rho_sq < 1.0 {
                        base + amplitude * (1.0 - 1.0 / (1.0 - rho_sq)).exp()
                    } else {
                        *base
                    }
                }
            };
            if !(value.is_finite() && value >= alpha_min && value <= alpha_max) {
                return Err(Error::InvalidOrderField(format!(
                    "order value {value} at grid index {idx} violates bounds [{alpha_min}, {alpha_max}]"
                )));
            }
            alpha[idx] = value;
        }

        Ok(Self { domain, alpha_star, alpha_min, alpha_max, s, mask, alpha })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Baseline order α*.
    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    /// Lower admissibility bound α_min.
    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    /// Upper admissibility bound α_max.
    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    /// Integrability exponent s.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Indicator of the perturbation region K.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Pointwise orders α(x) in grid order.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// True when α ≡ α* (no masked point differs from the baseline).
    pub fn is_constant(&self) -> bool {
        self.alpha.iter().all(|&a| a == self.alpha_star)
    }

    /// Realized (min, max) of α over the grid.
    pub fn order_extrema(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &a in &self.alpha {
            lo = lo.min(a);
            hi = hi.max(a);
        }
        (lo, hi)
    }

    /// Evaluates the long-time decay condition α*(1 - d/s) < α_min.
    ///
    /// Returns `(holds, margin)` with margin = α_min - α*(1 - d/s); the
    /// condition holds exactly when the margin is positive. Errors when
    /// s ≤ max(d, 4), where the decay analysis is not applicable.
    pub fn validate_decay_condition(&self) -> Result<(bool, f64)> {
        let d = self.domain.dimension() as f64;
        if self.s <= d.max(4.0) {
            return Err(Error::DecayConditionViolated(format!(
                "integrability exponent s = {} must exceed max(d, 4) = {}",
                self.s,
                d.max(4.0)
            )));
        }
        let margin = self.alpha_min - self.alpha_star * (1.0 - d / self.s);
        Ok((margin > 0.0, margin))
    }
}
