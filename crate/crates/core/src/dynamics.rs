//! Coefficients and right-hand sides of
//! `∂ₜu + (1/π)(uΛu - (Hu)∂ₓu)/(δ + u² + (Hu)²) - δ∂ₓ²u = 0`,
//! which at `δ = 0` is the flux form `∂ₜu + (1/π)∂ₓ arctan(Hu/u) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{forward, inverse, PeriodicGrid, RealField, SpectralField};

/// With `δ = 0` fields must satisfy `min u > POSITIVITY_EPS`.
pub const POSITIVITY_EPS: f64 = 1e-10;

/// Transport velocity `V`, dissipation weight `γ` and modulus `ρ` of the
/// quasilinear form `∂ₜu + V∂ₓu + γΛu - δ∂ₓ²u = 0`.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub velocity: RealField,
    pub gamma: RealField,
    pub rho: RealField,
    pub delta: f64,
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    Ok(())
}

pub(crate) fn check_positive(u: &RealField) -> Result<()> {
    let min = u.min();
    if min <= POSITIVITY_EPS {
        return Err(Error::Positivity {
            min,
            threshold: POSITIVITY_EPS,
        });
    }
    Ok(())
}

fn check_admissible(u: &RealField, delta: f64) -> Result<()> {
    check_delta(delta)?;
    if delta == 0.0 {
        check_positive(u)?;
    }
    Ok(())
}

pub fn coefficients(u: &RealField, delta: f64) -> Result<Coefficients> {
    check_admissible(u, delta)?;
    let hu = inverse(&forward(u).hilbert());
    let grid = u.grid();
    let n = grid.n();
    let (mut v, mut g, mut r) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (&ui, &hi) in u.values().iter().zip(hu.values()) {
        let denom = delta + ui * ui + hi * hi;
        v.push(-hi / (PI * denom));
        g.push(ui / (PI * denom));
        r.push(denom.sqrt());
    }
    Ok(Coefficients {
        velocity: RealField::new(grid, v)?,
        gamma: RealField::new(grid, g)?,
        rho: RealField::new(grid, r)?,
        delta,
    })
}

/// `∂ₜu = -(1/π)(uΛu - (Hu)∂ₓu)/(δ + u² + (Hu)²) + δ∂ₓ²u`, pointwise.
pub fn tendency_regularized(u: &RealField, delta: f64) -> Result<RealField> {
    check_admissible(u, delta)?;
    let spec = forward(u);
    let nonlinear = regularized_quotient(&spec, delta, None);
    if delta == 0.0 {
        return Ok(inverse(&nonlinear));
    }
    let diffusion = spec.second_derivative();
    let mut out = inverse(&nonlinear).into_values();
    for (o, d) in out.iter_mut().zip(inverse(&diffusion).values()) {
        *o += delta * d;
    }
    RealField::new(u.grid(), out)
}

/// `∂ₜu = -(1/π)∂ₓ arctan(Hu/u)`, an exact spectral derivative.
pub fn tendency_flux(u: &RealField) -> Result<RealField> {
    check_positive(u)?;
    Ok(inverse(&flux_divergence(&forward(u), None)))
}

/// Spectral coefficients of `-(1/π)(uΛu - (Hu)∂ₓu)/(δ + u² + (Hu)²)`.
///
/// With `pad = Some(fine)` the factors are evaluated on the finer grid and
/// the quotient is truncated back.
pub(crate) fn regularized_quotient(
    spec: &SpectralField,
    delta: f64,
    pad: Option<&PeriodicGrid>,
) -> SpectralField {
    let work = match pad {
        Some(fine) => spec.resample(fine),
        None => spec.clone(),
    };
    let u = inverse(&work);
    let hu = inverse(&work.hilbert());
    let lu = inverse(&work.frac_laplacian());
    let du = inverse(&work.derivative());
    let q: Vec<f64> = u
        .values()
        .iter()
        .zip(hu.values())
        .zip(lu.values().iter().zip(du.values()))
        .map(|((&u, &h), (&l, &d))| -(u * l - h * d) / (PI * (delta + u * u + h * h)))
        .collect();
    let out = forward(&RealField::from_raw(work.grid(), q));
    match pad {
        Some(_) => out.resample(spec.grid()),
        None => out,
    }
}

/// Spectral coefficients of `-(1/π)∂ₓ arctan(Hu/u)`.
pub(crate) fn flux_divergence(spec: &SpectralField, pad: Option<&PeriodicGrid>) -> SpectralField {
    let work = match pad {
        Some(fine) => spec.resample(fine),
        None => spec.clone(),
    };
    let u = inverse(&work);
    let hu = inverse(&work.hilbert());
    // u > 0, so the principal branch of atan2 equals arctan(Hu/u).
    let theta: Vec<f64> = u
        .values()
        .iter()
        .zip(hu.values())
        .map(|(&u, &h)| h.atan2(u))
        .collect();
    let mut flux = forward(&RealField::from_raw(work.grid(), theta));
    if pad.is_some() {
        flux = flux.resample(spec.grid());
    }
    flux.derivative().multiply(|_, _| (-1.0 / PI).into())
}

/// Fine grid for 3/2 zero-padding of an `n`-point field.
pub(crate) fn padded_grid(grid: &PeriodicGrid) -> PeriodicGrid {
    let m = 3 * grid.n() / 2;
    PeriodicGrid::new(m + m % 2).expect("padded size is even and >= 24")
}
