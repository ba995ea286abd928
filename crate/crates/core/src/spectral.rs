//! Periodic grids, discrete Fourier transforms and Fourier-multiplier
//! operators on the circle `S = R / 2πZ`.
//!
//! Coefficients follow `c_k = (1/n) Σ_j f(x_j) e^{-i k x_j}`, so `c_0` is
//! the mean and `f(x_j) = Σ_k c_k e^{i k x_j}`. They are stored in FFT
//! order: index `0..=n/2` holds `k = 0..=n/2`, index `n/2+1..n` holds
//! `k = -(n/2-1)..=-1`. The Nyquist mode `k = n/2` is stored once.
//!
//! Multipliers with odd symbol (`H`, `∂ₓ`) zero the Nyquist mode; the even
//! ones (`Λ^s`, heat) keep it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Equispaced grid `x_j = 2πj/n` on the circle, with cached FFT plans.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidGrid { n });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Highest resolved wavenumber, `n/2`.
    pub fn kmax(&self) -> usize {
        self.n / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed wavenumber stored at FFT index `idx`.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    #[inline]
    fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k.abs() > half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else if k == -half {
            Some(self.n / 2)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for PeriodicGrid {}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

/// Grid samples of a periodic real function. Values are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f` at the grid points. Panics if `f` produces a non-finite value.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values).expect("from_fn: non-finite sample")
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n],
        }
    }

    // Callers guarantee length; finiteness is checked where it can fail.
    pub(crate) fn from_raw(grid: &PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(&self.grid, values))
    }

    pub fn sub(&self, other: &RealField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `sqrt(∫ f² dx)` by the grid rule.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fourier coefficients of a [`RealField`], Hermitian-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Builds a spectral field from FFT-ordered coefficients, checking
    /// Hermitian symmetry.
    pub fn new(grid: &PeriodicGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: coeffs.len(),
            });
        }
        let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
        for idx in 0..=grid.n / 2 {
            let k = grid.wavenumber(idx);
            let mirror = (grid.n - idx) % grid.n;
            if (coeffs[idx] - coeffs[mirror].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::NotHermitian { k });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub(crate) fn from_raw(grid: &PeriodicGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.n);
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Sets `c_k` and its mirror `c_{-k} = conj(c_k)`.
    pub fn set_mode(&mut self, k: i64, c: Complex64) -> Result<()> {
        let idx = self
            .grid
            .index_of(k)
            .ok_or_else(|| Error::invalid("k", format!("|{k}| exceeds kmax")))?;
        let mirror = self.grid.index_of(-k).expect("mirror in range");
        if idx == mirror {
            self.coeffs[idx] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[idx] = c;
            self.coeffs[mirror] = c.conj();
        }
        Ok(())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `c_k` for `-kmax <= k <= kmax`; zero outside.
    pub fn coeff(&self, k: i64) -> Complex64 {
        match self.grid.index_of(k) {
            Some(idx) if self.grid.is_nyquist(idx) && k < 0 => self.coeffs[idx].conj(),
            Some(idx) => self.coeffs[idx],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Applies a Fourier multiplier `m(k, is_nyquist)`.
    pub fn multiply(&self, m: impl Fn(i64, bool) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * m(self.grid.wavenumber(idx), self.grid.is_nyquist(idx)))
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn hilbert(&self) -> Self {
        self.multiply(|k, nyq| {
            if nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -(k.signum() as f64))
            }
        })
    }

    pub fn derivative(&self) -> Self {
        self.multiply(|k, nyq| {
            if nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k as f64)
            }
        })
    }

    pub fn second_derivative(&self) -> Self {
        self.multiply(|k, _| Complex64::new(-((k * k) as f64), 0.0))
    }

    pub fn frac_laplacian(&self) -> Self {
        self.multiply(|k, _| Complex64::new(k.abs() as f64, 0.0))
    }

    pub fn heat(&self, tau: f64) -> Self {
        self.multiply(|k, _| Complex64::new((-tau * (k * k) as f64).exp(), 0.0))
    }

    /// Shift `f(x) ↦ f(x - a)`; the Nyquist mode is handled as `cos(n/2·(x - a))`.
    pub fn shift(&self, a: f64) -> Self {
        self.multiply(|k, nyq| {
            if nyq {
                Complex64::new((k as f64 * a).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -(k as f64) * a)
            }
        })
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `Σ_{k≠0} 2π |k|^{2s} |c_k|²`.
    pub fn sobolev_seminorm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, c)| {
                let k = self.grid.wavenumber(idx).unsigned_abs() as f64;
                k.powf(2.0 * s) * c.norm_sqr()
            })
            .sum::<f64>()
            * 2.0
            * PI
    }

    /// Zero-pads (or truncates) onto `target`, preserving each mode `c_k`.
    /// Modes at or beyond the smaller Nyquist frequency are dropped.
    pub fn resample(&self, target: &PeriodicGrid) -> Self {
        let mut out = SpectralField::zeros(target);
        let keep = (self.grid.n.min(target.n) / 2) as i64;
        for k in 0..keep {
            let c = self.coeff(k);
            out.coeffs[k as usize] = c;
            if k > 0 {
                out.coeffs[target.n - k as usize] = c.conj();
            }
        }
        out
    }
}

pub fn forward(f: &RealField) -> SpectralField {
    let grid = &f.grid;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.forward.process(&mut buf);
    let scale = 1.0 / grid.n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    SpectralField {
        grid: grid.clone(),
        coeffs: buf,
    }
}

pub fn inverse(spec: &SpectralField) -> RealField {
    let grid = &spec.grid;
    let mut buf = spec.coeffs.clone();
    grid.inverse.process(&mut buf);
    RealField::from_raw(grid, buf.into_iter().map(|c| c.re).collect())
}

pub fn hilbert(f: &RealField) -> RealField {
    inverse(&forward(f).hilbert())
}

pub fn frac_laplacian(f: &RealField) -> RealField {
    inverse(&forward(f).frac_laplacian())
}

pub fn derivative(f: &RealField) -> RealField {
    inverse(&forward(f).derivative())
}

pub fn heat_propagate(f: &RealField, tau: f64) -> Result<RealField> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(f.clone());
    }
    Ok(inverse(&forward(f).heat(tau)))
}

/// `‖Λ^s f‖_{L²}` with the mean excluded.
pub fn sobolev_seminorm(f: &RealField, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::invalid("s", "order must be finite"));
    }
    let spec = forward(f);
    if s < 0.0 {
        let mean = spec.mean();
        if mean.abs() > 1e-13 * f.linf_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NonZeroMean { s, mean });
        }
    }
    Ok(spec.sobolev_seminorm_sq(s).sqrt())
}

/// `Λf(x) = (1/4π) pv ∫ (f(x) - f(x-α)) / sin²(α/2) dα` by the midpoint rule
/// with `m` nodes `α_j = (j + 1/2)·2π/m`. Shifted samples `f(x - α)` come
/// from the trigonometric interpolant.
pub fn frac_laplacian_kernel(f: &RealField, m: usize) -> Result<RealField> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::invalid("m", format!("need an even node count >= 2, got {m}")));
    }
    let spec = forward(f);
    let weight = (2.0 * PI / m as f64) / (4.0 * PI);
    let mut acc = vec![0.0; f.grid.n];
    // Nodes α and 2π - α are paired so the odd 1/α part cancels term by term.
    for j in 0..m / 2 {
        let alpha = (j as f64 + 0.5) * 2.0 * PI / m as f64;
        let w = weight / (alpha / 2.0).sin().powi(2);
        let left = inverse(&spec.shift(alpha));
        let right = inverse(&spec.shift(-alpha));
        for ((a, &u), (&l, &r)) in acc
            .iter_mut()
            .zip(&f.values)
            .zip(left.values.iter().zip(&right.values))
        {
            *a += w * ((u - l) + (u - r));
        }
    }
    Ok(RealField::from_raw(&f.grid, acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.sub(b).unwrap().linf_norm()
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(matches!(PeriodicGrid::new(15), Err(Error::InvalidGrid { .. })));
        assert!(matches!(PeriodicGrid::new(8), Err(Error::InvalidGrid { .. })));
        assert!(matches!(PeriodicGrid::new(33), Err(Error::InvalidGrid { .. })));
        let g = grid(16);
        assert_eq!(g.kmax(), 8);
        assert!((g.dx() - 2.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn real_field_rejects_nan() {
        let g = grid(16);
        let mut v = vec![1.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(RealField::new(&g, v), Err(Error::NonFinite { index: 3, .. })));
        assert!(matches!(
            RealField::new(&g, vec![1.0; 15]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn forward_of_constant_and_cosine() {
        let g = grid(32);
        let spec = forward(&RealField::constant(&g, 1.0));
        assert!((spec.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 1..=16 {
            assert!(spec.coeff(k).norm() < 1e-15);
        }
        let spec = forward(&RealField::from_fn(&g, f64::cos));
        for k in -16..=16_i64 {
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((spec.coeff(k) - Complex64::new(expect, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn hilbert_pure_modes() {
        let g = grid(64);
        let h = hilbert(&RealField::from_fn(&g, f64::cos));
        assert!(max_diff(&h, &RealField::from_fn(&g, f64::sin)) < 1e-14);
        let h = hilbert(&RealField::from_fn(&g, |x| (3.0 * x).sin()));
        assert!(max_diff(&h, &RealField::from_fn(&g, |x| -(3.0 * x).cos())) < 1e-14);
        assert!(hilbert(&RealField::constant(&g, 2.5)).linf_norm() < 1e-15);
    }

    #[test]
    fn nyquist_handling() {
        let g = grid(16);
        let nyq = RealField::from_fn(&g, |x| (8.0 * x).cos());
        assert!(hilbert(&nyq).linf_norm() < 1e-14);
        assert!(derivative(&nyq).linf_norm() < 1e-14);
        assert!(max_diff(&frac_laplacian(&nyq), &nyq.map(|v| 8.0 * v)) < 1e-13);
    }

    #[test]
    fn lambda_derivative_and_heat_pure_modes() {
        let g = grid(64);
        let cos = RealField::from_fn(&g, f64::cos);
        assert!(max_diff(&frac_laplacian(&cos), &cos) < 1e-13);
        let s2 = RealField::from_fn(&g, |x| (2.0 * x).sin());
        assert!(max_diff(&frac_laplacian(&s2), &s2.map(|v| 2.0 * v)) < 1e-13);
        assert!(max_diff(&derivative(&RealField::from_fn(&g, f64::sin)), &cos) < 1e-13);
        let heated = heat_propagate(&cos, 0.5).unwrap();
        assert!(max_diff(&heated, &cos.map(|v| (-0.5f64).exp() * v)) < 1e-15);
        assert_eq!(heat_propagate(&cos, 0.0).unwrap(), cos);
        let c = RealField::constant(&g, 3.0);
        assert!(max_diff(&heat_propagate(&c, 7.0).unwrap(), &c) < 1e-15);
        assert!(heat_propagate(&cos, -1e-3).is_err());
    }

    #[test]
    fn seminorm_values() {
        let g = grid(64);
        let cos = RealField::from_fn(&g, f64::cos);
        for s in [0.0, 0.5, 1.0, 2.5] {
            assert!((sobolev_seminorm(&cos, s).unwrap() - PI.sqrt()).abs() < 1e-13);
        }
        assert_eq!(sobolev_seminorm(&RealField::constant(&g, 4.0), 0.5).unwrap(), 0.0);
        let f = RealField::from_fn(&g, |x| x.cos() + (2.0 * x).sin());
        assert!((sobolev_seminorm(&f, 0.5).unwrap() - (3.0 * PI).sqrt()).abs() < 1e-13);
        assert!(sobolev_seminorm(&cos, -0.5).is_ok());
        assert!(matches!(
            sobolev_seminorm(&cos.map(|v| v + 1.0), -0.5),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn kernel_matches_multiplier_on_modes() {
        let g = grid(32);
        let cos = RealField::from_fn(&g, f64::cos);
        assert!(max_diff(&frac_laplacian_kernel(&cos, 128).unwrap(), &cos) < 1e-12);
        let c = RealField::constant(&g, 1.7);
        assert_eq!(frac_laplacian_kernel(&c, 64).unwrap().linf_norm(), 0.0);
        assert!(frac_laplacian_kernel(&c, 3).is_err());
    }

    #[test]
    fn spectral_field_hermitian_check() {
        let g = grid(16);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 16];
        coeffs[1] = Complex64::new(0.5, 0.1);
        assert!(matches!(SpectralField::new(&g, coeffs.clone()), Err(Error::NotHermitian { k: 1 })));
        coeffs[15] = Complex64::new(0.5, -0.1);
        assert!(SpectralField::new(&g, coeffs).is_ok());
    }

    #[test]
    fn resample_pads_and_truncates() {
        let g = grid(16);
        let big = grid(48);
        let f = RealField::from_fn(&g, |x| 1.0 + x.cos() + 0.3 * (5.0 * x).sin());
        let padded = inverse(&forward(&f).resample(&big));
        let expect = RealField::from_fn(&big, |x| 1.0 + x.cos() + 0.3 * (5.0 * x).sin());
        assert!(max_diff(&padded, &expect) < 1e-14);
        let back = inverse(&forward(&padded).resample(&g));
        assert!(max_diff(&back, &f) < 1e-14);
    }
}
