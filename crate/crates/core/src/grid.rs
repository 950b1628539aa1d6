//! Periodic-box grids, grid functions, and the spectral Laplacian.
//!
//! The computational domain is the box [-L, L)^d, d ∈ {1, 2, 3}, sampled on a
//! uniform grid with n points per axis (n a power of two), spacing h = 2L/n.
//! Plane waves exp(iπ k·x / L) with integer frequencies k ∈ [-n/2, n/2)^d
//! diagonalize the periodic Laplacian with eigenvalues Σ_a (π k_a / L)².
//!
//! Discrete transforms are unitary — each axis pass carries a 1/√n factor —
//! so Parseval holds exactly (up to roundoff) between the weighted physical
//! norm √(h^d Σ|v|²) and the identically weighted frequency norm. All norms
//! and inner products in this crate use that weighting.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A periodic box [-L, L)^d with n grid points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    d: usize,
    n: usize,
    l: f64,
}

impl Domain {
    /// Creates a domain after validating dimension (1–3), per-axis size
    /// (power of two, at least 8) and half-width (positive, finite).
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidDomain(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::InvalidDomain(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidDomain(format!("box half-width must be positive, got {l}")));
        }
        Ok(Self { d, n, l })
    }

    /// Spatial dimension.
    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Grid points per axis.
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Box half-width L.
    pub fn half_width(&self) -> f64 {
        self.l
    }

    /// Total number of grid points n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// True only for the degenerate case (never constructible).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing h = 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Decomposes a flattened row-major index into per-axis indices
    /// (unused axes are zero).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        debug_assert!(idx < self.len());
        let mut out = [0usize; 3];
        let mut rest = idx;
        for axis in (0..self.d).rev() {
            out[axis] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    /// Physical coordinates of a flattened index (unused axes are zero).
    /// Axis i of the grid point m is -L + h·m.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let h = self.spacing();
        let mut out = [0.0f64; 3];
        for axis in 0..self.d {
            out[axis] = -self.l + h * mi[axis] as f64;
        }
        out
    }

    /// Signed integer frequency of per-axis index m: m for m ≤ n/2, m - n
    /// otherwise (the standard FFT ordering).
    pub fn frequency(&self, m: usize) -> i64 {
        debug_assert!(m < self.n);
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }
}

/// A complex scalar field sampled on a [`Domain`], flattened row-major.
#[derive(Clone, Debug)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<Complex64>,
}

impl GridFunction {
    /// The zero function.
    pub fn zeros(domain: Domain) -> Self {
        Self { domain, values: vec![Complex64::new(0.0, 0.0); domain.len()] }
    }

    /// Wraps an existing value vector; its length must match the domain.
    pub fn from_values(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "value vector has length {}, domain has {} points",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, values })
    }

    /// Samples a function of position.
    pub fn from_fn(domain: Domain, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..domain.len())
            .map(|idx| {
                let pos = domain.position(idx);
                f(&pos[..domain.dimension()])
            })
            .collect();
        Self { domain, values }
    }

    /// Samples a real-valued function of position.
    pub fn from_real_fn(domain: Domain, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(domain, |x| Complex64::new(f(x), 0.0))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Weighted L² norm √(h^d Σ|v|²).
    pub fn l2_norm(&self) -> f64 {
        let volume = self.domain.spacing().powi(self.domain.dimension() as i32);
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (volume * sum).sqrt()
    }

    /// Weighted inner product h^d Σ conj(self)·other.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        debug_assert_eq!(self.domain, other.domain);
        let volume = self.domain.spacing().powi(self.domain.dimension() as i32);
        let sum: Complex64 =
            self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        volume * sum
    }

    /// Largest |Im v| over the grid.
    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest |v| over the grid.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// self ← self + a·x.
    pub fn axpy(&mut self, a: Complex64, x: &GridFunction) {
        debug_assert_eq!(self.domain, x.domain);
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    /// self ← a·self.
    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// Componentwise difference self - other.
    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        debug_assert_eq!(self.domain, other.domain);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction { domain: self.domain, values }
    }
}

/// A real multiplier field in frequency space (flattened like grid data).
#[derive(Clone, Debug)]
pub struct SpectralSymbol {
    domain: Domain,
    values: Vec<f64>,
}

impl SpectralSymbol {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Eigenvalues of -Δ on the box, flattened in FFT index order:
/// λ(k) = Σ_axes (π k_axis / L)² ≥ 0, with λ = 0 exactly at the zero mode.
pub fn laplacian_symbol(domain: &Domain) -> SpectralSymbol {
    let scale = std::f64::consts::PI / domain.half_width();
    let values = (0..domain.len())
        .map(|idx| {
            let mi = domain.multi_index(idx);
            (0..domain.dimension())
                .map(|axis| {
                    let k = domain.frequency(mi[axis]) as f64;
                    (scale * k).powi(2)
                })
                .sum()
        })
        .collect();
    SpectralSymbol { domain: *domain, values }
}

/// Pre-planned unitary FFTs and the Laplacian symbol for one domain.
pub struct Spectral {
    domain: Domain,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    symbol: SpectralSymbol,
}

impl Spectral {
    pub fn new(domain: Domain) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(domain.points_per_axis());
        let inverse = planner.plan_fft_inverse(domain.points_per_axis());
        let symbol = laplacian_symbol(&domain);
        Self { domain, forward, inverse, symbol }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Eigenvalues of -Δ in FFT index order.
    pub fn symbol(&self) -> &SpectralSymbol {
        &self.symbol
    }

    /// Unitary forward transform.
    pub fn forward(&self, f: &GridFunction) -> GridFunction {
        let mut values = f.values.clone();
        self.forward_in_place(&mut values);
        GridFunction { domain: self.domain, values }
    }

    /// Unitary inverse transform.
    pub fn inverse(&self, f: &GridFunction) -> GridFunction {
        let mut values = f.values.clone();
        self.inverse_in_place(&mut values);
        GridFunction { domain: self.domain, values }
    }

    pub(crate) fn forward_in_place(&self, values: &mut [Complex64]) {
        self.transform_in_place(values, true);
    }

    pub(crate) fn inverse_in_place(&self, values: &mut [Complex64]) {
        self.transform_in_place(values, false);
    }

    fn transform_in_place(&self, values: &mut [Complex64], forward: bool) {
        debug_assert_eq!(values.len(), self.domain.len());
        let n = self.domain.points_per_axis();
        let d = self.domain.dimension();
        let plan = if forward { &self.forward } else { &self.inverse };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];

        // Last axis: contiguous rows.
        for row in values.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut scratch);
        }
        // Earlier axes: gather strided lines into a contiguous buffer.
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..d.saturating_sub(1) {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            let outer = values.len() / block;
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * block + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = values[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, slot) in line.iter().enumerate() {
                        values[base + j * stride] = *slot;
                    }
                }
            }
        }
        // Unitary normalization: 1/√n per axis, i.e. N^{-1/2} overall.
        let scale = (self.domain.len() as f64).sqrt().recip();
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    /// Applies the Laplacian Δ (negative semidefinite): plane waves with
    /// frequency k are scaled by -λ(k).
    pub fn apply_laplacian(&self, f: &GridFunction) -> GridFunction {
        let mut values = f.values.clone();
        self.forward_in_place(&mut values);
        for (v, lam) in values.iter_mut().zip(self.symbol.values()) {
            *v *= -lam;
        }
        self.inverse_in_place(&mut values);
        GridFunction { domain: self.domain, values }
    }
}

/// Axis-aligned compact regions used to carve out the perturbation support.
#[derive(Clone, Debug)]
pub enum Region {
    /// Closed Euclidean ball { |x - center| ≤ radius }.
    Ball { center: Vec<f64>, radius: f64 },
    /// Closed axis box { lo ≤ x ≤ hi componentwise }.
    Cuboid { lo: Vec<f64>, hi: Vec<f64> },
}

/// Boolean mask of the grid points inside a region.
pub fn indicator_mask(domain: &Domain, region: &Region) -> Result<Vec<bool>> {
    let d = domain.dimension();
    match region {
        Region::Ball { center, radius } => {
            if center.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "ball center has {} coordinates on a {d}-dimensional domain",
                    center.len()
                )));
            }
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
            }
            Ok((0..domain.len())
                .map(|idx| {
                    let pos = domain.position(idx);
                    let dist_sq: f64 =
                        (0..d).map(|a| (pos[a] - center[a]).powi(2)).sum();
                    dist_sq <= radius * radius
                })
                .collect())
        }
        Region::Cuboid { lo, hi } => {
            if lo.len() != d || hi.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "cuboid bounds have {}/{} coordinates on a {d}-dimensional domain",
                    lo.len(),
                    hi.len()
                )));
            }
            if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
                return Err(Error::InvalidArgument(
                    "cuboid requires finite lo <= hi componentwise".into(),
                ));
            }
            Ok((0..domain.len())
                .map(|idx| {
                    let pos = domain.position(idx);
                    (0..d).all(|a| lo[a] <= pos[a] && pos[a] <= hi[a])
                })
                .collect())
        }
    }
}
