//! Functionals evaluated on fields and trajectories: mass, dissipation,
//! the Ḣ^{1/2} energy budget, extremum drifts, smoothing rates and the
//! L∞ growth factor between paired runs.

use crate::dynamics::check_delta;
use crate::error::{Error, Result};
use crate::spectral::{forward, inverse, sobolev_seminorm, RealField};
use crate::solver::Trajectory;

/// Seminorms below this fraction of `max |u|` count as zero.
const DEGENERATE_SEMINORM: f64 = 1e-12;

/// `∫ u dx` by the grid rule `(2π/n) Σ u_j`.
pub fn mass(u: &RealField) -> f64 {
    u.grid().dx() * u.values().iter().sum::<f64>()
}

/// `∫ u (Λu)² / (δ + u² + (Hu)²) dx`.
pub fn dissipation(u: &RealField, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if delta == 0.0 {
        crate::dynamics::check_positive(u)?;
    }
    let spec = forward(u);
    let hu = inverse(&spec.hilbert());
    let lu = inverse(&spec.frac_laplacian());
    let sum: f64 = u
        .values()
        .iter()
        .zip(hu.values())
        .zip(lu.values())
        .map(|((&u, &h), &l)| u * l * l / (delta + u * u + h * h))
        .sum();
    Ok(u.grid().dx() * sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBudget {
    /// `sup_t ‖u(t)‖²_{Ḣ^{1/2}}` over all accepted steps.
    pub h12_sq_sup: f64,
    /// Trapezoidal `∫ D(u(t)) dt`.
    pub dissipation_cum: f64,
    pub initial_h12_sq: f64,
    /// `(h12_sq_sup + dissipation_cum) / initial_h12_sq`, or 0 when the
    /// initial seminorm vanishes.
    pub bound_ratio: f64,
}

impl EnergyBudget {
    pub fn within(&self, bound: f64) -> bool {
        self.bound_ratio <= bound
    }
}

pub fn energy_budget(traj: &Trajectory) -> Result<EnergyBudget> {
    let records = &traj.scalars;
    let first = records
        .first()
        .ok_or_else(|| Error::Trajectory("no scalar records".into()))?;
    let h12_sq_sup = records.iter().map(|r| r.h12 * r.h12).fold(0.0, f64::max);
    let dissipation_cum = records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].dissipation + w[1].dissipation))
        .sum();
    let initial_h12_sq = first.h12 * first.h12;
    let scale = first.max_u.abs().max(first.min_u.abs());
    let bound_ratio = if first.h12 <= DEGENERATE_SEMINORM * scale {
        0.0
    } else {
        (h12_sq_sup + dissipation_cum) / initial_h12_sq
    };
    Ok(EnergyBudget {
        h12_sq_sup,
        dissipation_cum,
        initial_h12_sq,
        bound_ratio,
    })
}

/// Worst drifts of the extrema relative to the raw initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremumReport {
    /// `min_t (min u(t) - min u₀)`; the maximum principle wants `>= 0`.
    pub min_drift: f64,
    /// `max_t (max u(t) - max u₀)`; the maximum principle wants `<= 0`.
    pub max_drift: f64,
}

impl ExtremumReport {
    pub fn within(&self, tol: f64) -> bool {
        self.min_drift >= -tol && self.max_drift <= tol
    }
}

pub fn extremum_report(traj: &Trajectory) -> ExtremumReport {
    let (lo, hi) = (traj.raw_initial.min(), traj.raw_initial.max());
    let min_drift = traj
        .scalars
        .iter()
        .map(|r| r.min_u - lo)
        .fold(f64::INFINITY, f64::min);
    let max_drift = traj
        .scalars
        .iter()
        .map(|r| r.max_u - hi)
        .fold(f64::NEG_INFINITY, f64::max);
    ExtremumReport {
        min_drift: min_drift.min(0.0),
        max_drift: max_drift.max(0.0),
    }
}

/// `max_t |∫u(t) - ∫u(0)|` over the accepted steps.
pub fn mass_drift(traj: &Trajectory) -> f64 {
    let Some(first) = traj.scalars.first() else {
        return 0.0;
    };
    traj.scalars
        .iter()
        .map(|r| (r.mass - first.mass).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingReport {
    pub s: f64,
    pub eps0: f64,
    /// `sup t^{s+eps0} ‖u(t)‖_{Ḣ^{1/2+s}}` over the usable snapshots.
    pub sup_weighted: f64,
    /// Time at which the supremum is attained.
    pub sup_time: f64,
    /// Least-squares slope of `log ‖u(t)‖_{Ḣ^{1/2+s}}` against `log t`.
    pub slope: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

impl SmoothingReport {
    /// Slope no steeper than `-(s + eps0)(1 + slack)`.
    pub fn passes(&self, slack: f64) -> bool {
        self.slope >= -(self.s + self.eps0) * (1.0 + slack)
    }

    pub fn sup_at_earliest(&self) -> bool {
        self.times.first() == Some(&self.sup_time)
    }
}

pub fn smoothing_fit(traj: &Trajectory, s: f64, eps0: f64, t_min: f64) -> Result<SmoothingReport> {
    if !(t_min > 0.0) {
        return Err(Error::invalid("t_min", format!("must be > 0, got {t_min}")));
    }
    if !(s > 0.0) || !(eps0 > 0.0) {
        return Err(Error::invalid("s", "s and eps0 must be positive"));
    }
    let mut times = Vec::new();
    let mut norms = Vec::new();
    for snap in traj.snapshots.iter().filter(|sn| sn.t >= t_min) {
        times.push(snap.t);
        norms.push(sobolev_seminorm(&snap.u, 0.5 + s)?);
    }
    if times.len() < 3 {
        return Err(Error::Trajectory(format!(
            "smoothing fit needs 3 snapshots with t >= {t_min}, found {}",
            times.len()
        )));
    }
    if norms.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Trajectory("vanishing seminorm in smoothing fit".into()));
    }
    let (mut sup_weighted, mut sup_time) = (f64::NEG_INFINITY, times[0]);
    for (&t, &v) in times.iter().zip(&norms) {
        let w = t.powf(s + eps0) * v;
        if w > sup_weighted {
            sup_weighted = w;
            sup_time = t;
        }
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(SmoothingReport {
        s,
        eps0,
        sup_weighted,
        sup_time,
        slope: least_squares_slope(&lx, &ly),
        times,
        norms,
    })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `d(t) = max_x |u₁ - u₂|` at each snapshot.
    pub distances: Vec<f64>,
    /// Smallest `G` with `d(t) <= G·d(0)`; 0 when both runs coincide.
    pub growth: f64,
}

pub fn stability_compare(a: &Trajectory, b: &Trajectory) -> Result<StabilityReport> {
    if a.times() != b.times() {
        return Err(Error::Trajectory("snapshot times differ".into()));
    }
    let distances = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(sa, sb)| Ok(sa.u.sub(&sb.u)?.linf_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let d0 = distances.first().copied().unwrap_or(0.0);
    let dmax = distances.iter().copied().fold(0.0, f64::max);
    let growth = if dmax == 0.0 {
        0.0
    } else if d0 == 0.0 {
        f64::INFINITY
    } else {
        dmax / d0
    };
    Ok(StabilityReport {
        times: a.times(),
        distances,
        growth,
    })
}

/// Largest relative deviation among `max_t d(t)/size` over a family of
/// perturbation sizes; 0 means perfectly linear response.
pub fn linear_response_spread(reports: &[StabilityReport], sizes: &[f64]) -> f64 {
    let ratios: Vec<f64> = reports
        .iter()
        .zip(sizes)
        .map(|(r, &s)| r.distances.iter().copied().fold(0.0, f64::max) / s)
        .collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}
