//! Standalone battery for the spectral operators and the two tendency forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::OperatorConfig;
use super::output::{Category, Summary};
use crate::dynamics::{tendency_flux, tendency_regularized};
use crate::error::Result;
use crate::spectral::{
    derivative, frac_laplacian, frac_laplacian_kernel, heat_propagate, hilbert, inverse,
    PeriodicGrid, RealField, SpectralField,
};

/// Random real field with modes `1..=bandwidth`, unit-order amplitudes.
pub fn random_band_limited(grid: &PeriodicGrid, bandwidth: usize, rng: &mut impl Rng) -> Result<RealField> {
    let mut spec = SpectralField::zeros(grid);
    spec.set_mode(0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))?;
    for k in 1..=bandwidth as i64 {
        let c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        spec.set_mode(k, c)?;
    }
    Ok(inverse(&spec))
}

/// Smooth positive field with `min u = min_value`.
pub fn random_positive(grid: &PeriodicGrid, modes: usize, min_value: f64, rng: &mut impl Rng) -> Result<RealField> {
    let mut spec = SpectralField::zeros(grid);
    for k in 1..=modes as i64 {
        let scale = 0.5 / (k * k * k) as f64;
        let c = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
        spec.set_mode(k, c)?;
    }
    let f = inverse(&spec);
    let shift = min_value - f.min();
    Ok(f.map(|v| v + shift))
}

fn rel_diff(a: &RealField, b: &RealField) -> f64 {
    let scale = b.linf_norm().max(1.0);
    a.sub(b).map_or(f64::INFINITY, |d| d.linf_norm() / scale)
}

/// Largest relative error of `H`, `Λ`, `∂ₓ` and the heat multiplier on
/// `cos kx` and `sin kx`.
pub fn pure_mode_error(grid: &PeriodicGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [1usize, 2, 5, grid.kmax() / 2, grid.kmax() - 1] {
        let kf = k as f64;
        let c = RealField::from_fn(grid, |x| (kf * x).cos());
        let s = RealField::from_fn(grid, |x| (kf * x).sin());
        let neg_c = c.map(|v| -v);
        let tau = 1.0 / (kf * kf);
        worst = worst
            .max(rel_diff(&hilbert(&c), &s))
            .max(rel_diff(&hilbert(&s), &neg_c))
            .max(rel_diff(&frac_laplacian(&c), &c.map(|v| kf * v)))
            .max(rel_diff(&derivative(&s), &c.map(|v| kf * v)))
            .max(rel_diff(&heat_propagate(&c, tau)?, &c.map(|v| (-1.0f64).exp() * v)));
    }
    Ok(worst)
}

pub fn run_operator_battery(cfg: &OperatorConfig, seed: u64, summary: &mut Summary) -> Result<()> {
    let grid = PeriodicGrid::new(cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let modes = pure_mode_error(&grid)?;
    summary.check(
        Category::Operators,
        "pure_modes",
        modes <= cfg.tol,
        format!("max relative error {modes:e}"),
        format!("<= {:e}", cfg.tol),
    );

    let mut identity: f64 = 0.0;
    for _ in 0..cfg.fields {
        let f = random_band_limited(&grid, cfg.bandwidth, &mut rng)?;
        let lam = frac_laplacian(&f);
        identity = identity
            .max(rel_diff(&derivative(&hilbert(&f)), &lam))
            .max(rel_diff(&hilbert(&derivative(&f)), &lam));
    }
    summary.check(
        Category::Operators,
        "lambda_equals_dx_hilbert",
        identity <= cfg.tol,
        format!("max relative error {identity:e} over {} fields", cfg.fields),
        format!("<= {:e}", cfg.tol),
    );

    let m = cfg.kernel_factor * cfg.n;
    let mut kernel: f64 = 0.0;
    for _ in 0..cfg.kernel_fields {
        let f = random_band_limited(&grid, cfg.bandwidth, &mut rng)?;
        let k = frac_laplacian_kernel(&f, m)?;
        kernel = kernel.max(k.sub(&frac_laplacian(&f))?.linf_norm());
    }
    summary.check(
        Category::Operators,
        "kernel_vs_multiplier",
        kernel <= cfg.kernel_tol,
        format!("max error {kernel:e} with m = {m}"),
        format!("<= {:e}", cfg.kernel_tol),
    );

    let mut form: f64 = 0.0;
    for _ in 0..cfg.form_fields {
        let u = random_positive(&grid, 8, 0.5, &mut rng)?;
        let a = tendency_flux(&u)?;
        let b = tendency_regularized(&u, 0.0)?;
        form = form.max(a.sub(&b)?.linf_norm());
    }
    summary.check(
        Category::Operators,
        "flux_vs_quotient_form",
        form <= cfg.form_tol,
        format!("max difference {form:e} over {} fields", cfg.form_fields),
        format!("<= {:e}", cfg.form_tol),
    );
    Ok(())
}
