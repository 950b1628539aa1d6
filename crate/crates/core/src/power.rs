//! Principal-branch complex powers p^a in polar form.
//!
//! Every power used by the solver is evaluated from an explicit polar
//! representation p = r e^{iβ} with |β| < π, via
//!
//!   p^a = exp(a ln r) (cos aβ + i sin aβ),
//!
//! which keeps the branch choice unambiguous on the contour (no atan2
//! round-trips near the negative real axis) and makes the conjugation
//! symmetry conj(p)^a = conj(p^a) exact in floating point.
//!
//! On the sector |β| ≤ θ with θ ≤ min(2π/3, π/(2a)) the principal power has
//! nonnegative real part for a ∈ (0, 1]; the resolvent analysis relies on
//! that geometry, and property tests pin it down.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::order_field::OrderField;

/// A nonzero complex number r e^{iβ} off the branch cut (|β| < π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarPoint {
    r: f64,
    beta: f64,
}

impl PolarPoint {
    /// Validates r > 0 and |β| < π.
    pub fn new(r: f64, beta: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "polar modulus must be positive and finite, got {r}"
            )));
        }
        if !(beta.is_finite() && beta.abs() < std::f64::consts::PI) {
            return Err(Error::InvalidArgument(format!(
                "polar argument must satisfy |beta| < pi, got {beta}"
            )));
        }
        Ok(Self { r, beta })
    }

    /// Polar form of a Cartesian point; rejects zero and the branch cut
    /// (the closed negative real axis).
    pub fn from_complex(z: Complex64) -> Result<Self> {
        let r = z.norm();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!("cannot take polar form of {z}")));
        }
        let beta = z.im.atan2(z.re);
        if beta.abs() >= std::f64::consts::PI {
            return Err(Error::InvalidArgument(format!(
                "point {z} lies on the branch cut"
            )));
        }
        Ok(Self { r, beta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cartesian value r e^{iβ}.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.r * self.beta.cos(), self.r * self.beta.sin())
    }

    /// Complex conjugate (β ↦ -β).
    pub fn conj(&self) -> Self {
        Self { r: self.r, beta: -self.beta }
    }
}

/// p^a for arbitrary real exponent, without domain checks (internal).
pub(crate) fn power_raw(r: f64, beta: f64, a: f64) -> Complex64 {
    let modulus = (a * r.ln()).exp();
    let phase = a * beta;
    Complex64::new(modulus * phase.cos(), modulus * phase.sin())
}

/// Principal power p^a for exponents a ∈ (0, 1].
pub fn principal_power(p: PolarPoint, a: f64) -> Result<Complex64> {
    if !(a.is_finite() && a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "power exponent must lie in (0, 1], got {a}"
        )));
    }
    Ok(power_raw(p.r, p.beta, a))
}

/// Whether the exponent field enters as α(x) or α(x) - 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerShift {
    /// p^{α(x)} — the zeroth-order symbol of the operator.
    Zero,
    /// p^{α(x)-1} — the multiplier applied to initial data on the contour.
    MinusOne,
}

/// Pointwise powers p^{α(x)+shift} over the grid of an order field.
pub fn power_field(p: PolarPoint, field: &OrderField, shift: PowerShift) -> Vec<Complex64> {
    let offset = match shift {
        PowerShift::Zero => 0.0,
        PowerShift::MinusOne => -1.0,
    };
    let ln_r = p.r.ln();
    // Exponents repeat heavily (piecewise-constant fields); cache per distinct
    // exponent since exp/cos/sin dominate the cost on large grids.
    let mut cache: Vec<(f64, Complex64)> = Vec::with_capacity(8);
    field
        .alpha()
        .iter()
        .map(|&alpha| {
            let a = alpha + offset;
            if let Some(&(_, v)) = cache.iter().find(|(key, _)| *key == a) {
                return v;
            }
            let modulus = (a * ln_r).exp();
            let phase = a * p.beta;
            let v = Complex64::new(modulus * phase.cos(), modulus * phase.sin());
            if cache.len() < 64 {
                cache.push((a, v));
            }
            v
        })
        .collect()
}

/// Uniform bound on the symbol gap: sup_x |p^{α*} - p^{α(x)}| ≤ 2 r^{α_min}
/// for r < 1 (each term has modulus r^{α} ≤ r^{α_min} there).
///
/// Returns the supremum over the grid; errs when r ≥ 1 where the bound has
/// no such monotone form.
pub fn power_gap_bound(p: PolarPoint, field: &OrderField) -> Result<f64> {
    if p.r >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "gap bound requires modulus below 1, got {}",
            p.r
        )));
    }
    let base = power_raw(p.r, p.beta, field.alpha_star());
    let mut sup: f64 = 0.0;
    for (&alpha, &inside) in field.alpha().iter().zip(field.mask()) {
        if !inside {
            continue;
        }
        let gap = (base - power_raw(p.r, p.beta, alpha)).norm();
        sup = sup.max(gap);
    }
    debug_assert!(
        sup <= 2.0 * p.r.powf(field.alpha_min()) * (1.0 + 1e-12),
        "gap bound arithmetic violated"
    );
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{indicator_mask, Domain, Region};
    use crate::order_field::KappaProfile;

    #[test]
    fn polar_validation() {
        assert!(PolarPoint::new(1.0, 0.5).is_ok());
        assert!(PolarPoint::new(0.0, 0.5).is_err());
        assert!(PolarPoint::new(-1.0, 0.5).is_err());
        assert!(PolarPoint::new(1.0, std::f64::consts::PI).is_err());
        assert!(PolarPoint::from_complex(Complex64::new(-2.0, 0.0)).is_err());
        assert!(PolarPoint::from_complex(Complex64::new(0.0, 0.0)).is_err());
        let p = PolarPoint::from_complex(Complex64::new(3.0, 4.0)).unwrap();
        assert!((p.r() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn powers_match_cartesian_reference() {
        // Square roots and identity exponents where closed forms exist.
        let p = PolarPoint::new(4.0, 0.0).unwrap();
        let v = principal_power(p, 0.5).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let p = PolarPoint::new(2.0, 1.0).unwrap();
        let v = principal_power(p, 1.0).unwrap();
        assert!((v - p.to_complex()).norm() < 1e-14);
        // i^{1/2} = e^{iπ/4}.
        let p = PolarPoint::new(1.0, std::f64::consts::FRAC_PI_2).unwrap();
        let v = principal_power(p, 0.5).unwrap();
        let expected = Complex64::new(
            std::f64::consts::FRAC_PI_4.cos(),
            std::f64::consts::FRAC_PI_4.sin(),
        );
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn exponent_domain_is_enforced() {
        let p = PolarPoint::new(2.0, 0.3).unwrap();
        assert!(principal_power(p, 0.0).is_err());
        assert!(principal_power(p, 1.2).is_err());
        assert!(principal_power(p, -0.5).is_err());
        assert!(principal_power(p, 1.0).is_ok());
    }

    fn test_field() -> OrderField {
        let domain = Domain::new(2, 16, 2.0).unwrap();
        let mask = indicator_mask(
            &domain,
            &Region::Ball { center: vec![0.0, 0.0], radius: 0.9 },
        )
        .unwrap();
        OrderField::build(domain, 0.5, (0.5, 0.7), 8.0, mask, &KappaProfile::Constant(0.7))
            .unwrap()
    }

    #[test]
    fn power_field_matches_pointwise_powers() {
        let field = test_field();
        let p = PolarPoint::new(0.3, 1.2).unwrap();
        let zero = power_field(p, &field, PowerShift::Zero);
        let minus = power_field(p, &field, PowerShift::MinusOne);
        for (idx, &alpha) in field.alpha().iter().enumerate() {
            let expected = power_raw(0.3, 1.2, alpha);
            assert!((zero[idx] - expected).norm() <= 1e-15 * expected.norm());
            let expected = power_raw(0.3, 1.2, alpha - 1.0);
            assert!((minus[idx] - expected).norm() <= 1e-15 * expected.norm());
        }
    }

    #[test]
    fn gap_bound_holds_and_rejects_large_modulus() {
        let field = test_field();
        for &r in &[0.9, 0.5, 0.1, 1e-3, 1e-6] {
            for &beta in &[0.0, 1.0, -2.0] {
                let p = PolarPoint::new(r, beta).unwrap();
                let gap = power_gap_bound(p, &field).unwrap();
                assert!(gap <= 2.0 * r.powf(field.alpha_min()) * (1.0 + 1e-12));
                assert!(gap >= 0.0);
            }
        }
        let p = PolarPoint::new(1.0, 0.5).unwrap();
        assert!(power_gap_bound(p, &field).is_err());
    }

    #[test]
    fn conjugation_symmetry_is_exact() {
        for &(r, beta, a) in &[(0.7, 1.1, 0.5), (3.0, 2.0, 0.9), (10.0, -0.4, 0.3)] {
            let p = PolarPoint::new(r, beta).unwrap();
            let direct = principal_power(p.conj(), a).unwrap();
            let conjugated = principal_power(p, a).unwrap().conj();
            assert_eq!(direct, conjugated);
        }
    }
}
