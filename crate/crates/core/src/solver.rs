//! Time integration of the regularized equation.
//!
//! Each step treats `δ∂ₓ²` exactly through the integrating factor
//! `e^{-δk²dt}` and advances the nonlinear tendency with a two-stage Heun
//! update. At `δ = 0` the nonlinear term is evaluated in flux form, so the
//! discrete mean is conserved to rounding.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::{dissipation, mass};
use crate::dynamics::{self, check_delta, coefficients, padded_grid};
use crate::error::{Error, Result};
use crate::spectral::{
    forward, heat_propagate, inverse, sobolev_seminorm, PeriodicGrid, RealField, SpectralField,
};

const VELOCITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtPolicy {
    /// `cfl · min(1/(max γ · kmax), dx / max|V|, dt_max)`.
    Adaptive,
    /// Constant step, shortened only to land on snapshot times.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Full,
    /// Only `δ∂ₓ²`; the control run for smoothing rates.
    HeatOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    /// Requested output times in `[0, t_end]`; `0` and `t_end` are always recorded.
    pub snapshot_times: Vec<f64>,
    pub dealias: bool,
    pub pos_floor: f64,
    pub seed: u64,
    pub dt_policy: DtPolicy,
    pub model: Model,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 0.0,
            t_end: 1.0,
            cfl: 0.5,
            dt_max: 1e-2,
            snapshot_times: Vec::new(),
            dealias: false,
            pos_floor: 1e-10,
            seed: 0,
            dt_policy: DtPolicy::Adaptive,
            model: Model::Full,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::invalid("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::invalid("dt_max", format!("must be > 0, got {}", self.dt_max)));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::invalid("dt", format!("fixed step must be > 0, got {dt}")));
            }
        }
        if !self.pos_floor.is_finite() {
            return Err(Error::invalid("pos_floor", "must be finite"));
        }
        for w in self.snapshot_times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid("snapshot_times", "must be strictly increasing"));
            }
        }
        if let Some(&t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_end))
        {
            return Err(Error::invalid(
                "snapshot_times",
                format!("{t} lies outside [0, {}]", self.t_end),
            ));
        }
        Ok(())
    }

    /// Recorded times: `0`, the requested times and `t_end`, deduplicated.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        for &t in self.snapshot_times.iter().chain(std::iter::once(&self.t_end)) {
            if t > *times.last().unwrap() {
                times.push(t);
            }
        }
        times
    }

    fn next_output_after(&self, t: f64) -> f64 {
        self.output_times()
            .into_iter()
            .find(|&s| s > t)
            .unwrap_or(self.t_end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: RealField,
    pub step_count: usize,
    pub last_dt: f64,
}

impl SolverState {
    pub fn new(u: RealField) -> Self {
        Self {
            t: 0.0,
            u,
            step_count: 0,
            last_dt: 0.0,
        }
    }
}

/// Scalar diagnostics of one accepted step (the initial state has `dt = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub mass: f64,
    /// `‖u‖_{Ḣ^{1/2}}`.
    pub h12: f64,
    pub dissipation: f64,
}

impl StepRecord {
    pub fn of(u: &RealField, t: f64, dt: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            t,
            dt,
            min_u: u.min(),
            max_u: u.max(),
            mass: mass(u),
            h12: sobolev_seminorm(u, 0.5)?,
            dissipation: dissipation(u, delta)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: RealField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub delta: f64,
    /// Initial data before mollification.
    pub raw_initial: RealField,
    pub snapshots: Vec<Snapshot>,
    pub scalars: Vec<StepRecord>,
}

impl Trajectory {
    pub fn grid(&self) -> &PeriodicGrid {
        self.raw_initial.grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    pub fn final_field(&self) -> &RealField {
        &self.snapshots.last().expect("trajectory has snapshots").u
    }
}

/// `e^{δ∂ₓ²}u₀`.
pub fn mollified_initial(u0: &RealField, delta: f64) -> Result<RealField> {
    check_delta(delta)?;
    let min = u0.min();
    if min <= 0.0 {
        return Err(Error::Positivity { min, threshold: 0.0 });
    }
    heat_propagate(u0, delta)
}

pub fn stable_dt(state: &SolverState, cfg: &SolverConfig) -> Result<f64> {
    let dt = match cfg.dt_policy {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Adaptive => match cfg.model {
            Model::HeatOnly => cfg.cfl * cfg.dt_max,
            Model::Full => {
                let grid = state.u.grid();
                let c = coefficients(&state.u, cfg.delta)?;
                let gamma_max = c.gamma.max().max(f64::MIN_POSITIVE);
                let v_max = c.velocity.linf_norm().max(VELOCITY_FLOOR);
                let dissipative = 1.0 / (gamma_max * grid.kmax() as f64);
                let transport = grid.dx() / v_max;
                cfg.cfl * dissipative.min(transport).min(cfg.dt_max)
            }
        },
    };
    let remaining = cfg.next_output_after(state.t) - state.t;
    Ok(if remaining > 0.0 { dt.min(remaining) } else { dt })
}

/// Spectral nonlinear tendency (without `δ∂ₓ²`) for the configured model.
struct Rhs {
    delta: f64,
    model: Model,
    pad: Option<PeriodicGrid>,
}

impl Rhs {
    fn new(grid: &PeriodicGrid, cfg: &SolverConfig) -> Self {
        Self {
            delta: cfg.delta,
            model: cfg.model,
            pad: cfg.dealias.then(|| padded_grid(grid)),
        }
    }

    fn eval(&self, spec: &SpectralField) -> SpectralField {
        match self.model {
            Model::HeatOnly => SpectralField::zeros(spec.grid()),
            Model::Full if self.delta == 0.0 => dynamics::flux_divergence(spec, self.pad.as_ref()),
            Model::Full => dynamics::regularized_quotient(spec, self.delta, self.pad.as_ref()),
        }
    }
}

fn heun_step(u: &RealField, dt: f64, rhs: &Rhs) -> RealField {
    let grid = u.grid();
    let decay: Vec<f64> = (0..grid.n())
        .map(|idx| {
            let k = grid.wavenumber(idx) as f64;
            (-rhs.delta * k * k * dt).exp()
        })
        .collect();
    let spec = forward(u);
    let n0 = rhs.eval(&spec);
    let (c0, f0) = (spec.coeffs(), n0.coeffs());

    // û* = E(û₀ + dt·N₀)
    let predictor = (0..grid.n()).map(|i| decay[i] * (c0[i] + dt * f0[i])).collect();
    let n1 = rhs.eval(&SpectralField::from_raw(grid, predictor));
    let f1 = n1.coeffs();

    // û₁ = E(û₀ + dt/2·N₀) + dt/2·N(û*)
    let next = (0..grid.n())
        .map(|i| decay[i] * (c0[i] + 0.5 * dt * f0[i]) + 0.5 * dt * f1[i])
        .collect();
    inverse(&SpectralField::from_raw(grid, next))
}

/// One integrating-factor Heun step of size `dt`.
pub fn step(state: &SolverState, dt: f64, cfg: &SolverConfig) -> Result<SolverState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    step_with(state, dt, cfg, &Rhs::new(state.u.grid(), cfg))
}

fn step_with(state: &SolverState, dt: f64, cfg: &SolverConfig, rhs: &Rhs) -> Result<SolverState> {
    if cfg.delta == 0.0 && cfg.model == Model::Full {
        dynamics::check_positive(&state.u)?;
    }
    let u = heun_step(&state.u, dt, rhs);
    let t = state.t + dt;
    let step_count = state.step_count + 1;
    if !u.is_finite() {
        return Err(Error::NonFiniteField { t, step: step_count });
    }
    let min = u.min();
    if min <= cfg.pos_floor {
        return Err(Error::PositivityAbort {
            t,
            step: step_count,
            min,
            floor: cfg.pos_floor,
        });
    }
    Ok(SolverState {
        t,
        u,
        step_count,
        last_dt: dt,
    })
}

pub fn solve(u0: &RealField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let initial = mollified_initial(u0, cfg.delta)?;
    let mut state = SolverState::new(initial);
    let mut scalars = vec![StepRecord::of(&state.u, 0.0, 0.0, cfg.delta)?];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        u: state.u.clone(),
    }];
    let rhs = Rhs::new(u0.grid(), cfg);
    let outputs = cfg.output_times();
    for &target in outputs.iter().skip(1) {
        while state.t < target {
            let remaining = target - state.t;
            let mut dt = stable_dt(&state, cfg)?.min(remaining);
            // Absorb a sliver that would otherwise become its own tiny step.
            if remaining - dt <= 1e-12 * target.max(1.0) {
                dt = remaining;
            }
            let mut next = step_with(&state, dt, cfg, &rhs)?;
            if dt == remaining {
                next.t = target;
            }
            scalars.push(StepRecord::of(&next.u, next.t, dt, cfg.delta)?);
            state = next;
        }
        snapshots.push(Snapshot {
            t: target,
            u: state.u.clone(),
        });
    }
    Ok(Trajectory {
        delta: cfg.delta,
        raw_initial: u0.clone(),
        snapshots,
        scalars,
    })
}

/// Distance between consecutive members of a δ-continuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuationDistance {
    /// `sup_t ‖u_{δᵢ} - u_{δᵢ₊₁}‖_{Ḣ^{1/2}}` over the common snapshots.
    pub h12: f64,
    /// `sup_t ‖u_{δᵢ} - u_{δᵢ₊₁}‖_{L²}`.
    pub l2: f64,
}

#[derive(Clone, Debug)]
pub struct ContinuationMember {
    pub delta: f64,
    pub trajectory: Trajectory,
    /// Distance to the previous (larger-δ) member; `None` for the first.
    pub distance: Option<ContinuationDistance>,
}

/// Solves for each δ (concurrently) and reports successive distances.
pub fn delta_continuation(
    u0: &RealField,
    deltas: &[f64],
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Vec<ContinuationMember>> {
    if deltas.is_empty() {
        return Err(Error::invalid("deltas", "need at least one value"));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::invalid("deltas", "values must be positive"));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("deltas", "must be strictly decreasing"));
    }
    let trajectories: Vec<Result<Trajectory>> = deltas
        .par_iter()
        .map(|&delta| {
            let member_cfg = SolverConfig {
                delta,
                t_end,
                ..cfg.clone()
            };
            solve(u0, &member_cfg).map_err(|e| Error::Continuation {
                delta,
                source: Box::new(e),
            })
        })
        .collect();
    let mut members: Vec<ContinuationMember> = Vec::with_capacity(deltas.len());
    for (&delta, traj) in deltas.iter().zip(trajectories) {
        let trajectory = traj?;
        let distance = match members.last() {
            Some(prev) => Some(trajectory_distance(&prev.trajectory, &trajectory)?),
            None => None,
        };
        members.push(ContinuationMember {
            delta,
            trajectory,
            distance,
        });
    }
    Ok(members)
}

fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> Result<ContinuationDistance> {
    if a.times() != b.times() {
        return Err(Error::Trajectory("snapshot grids differ".into()));
    }
    let mut out = ContinuationDistance { h12: 0.0, l2: 0.0 };
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let diff = sa.u.sub(&sb.u)?;
        out.h12 = out.h12.max(sobolev_seminorm(&diff, 0.5)?);
        out.l2 = out.l2.max(diff.l2_norm());
    }
    Ok(out)
}

/// Rough initial data: `û_k = (1+|k|)^{-1-η} e^{iθ_k}` with seeded uniform
/// phases for `1 <= k < kmax`, scaled to sup-norm `amplitude` and shifted so
/// that `min u = c0`.
pub fn rough_initial(grid: &PeriodicGrid, c0: f64, eta: f64, amplitude: f64, seed: u64) -> Result<RealField> {
    if !(c0 > 0.0) {
        return Err(Error::invalid("c0", format!("must be > 0, got {c0}")));
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid("amplitude", format!("must be > 0, got {amplitude}")));
    }
    if !eta.is_finite() {
        return Err(Error::invalid("eta", "must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SpectralField::zeros(grid);
    for k in 1..grid.kmax() as i64 {
        let theta: f64 = rng.gen_range(0.0..2.0 * PI);
        let magnitude = (1.0 + k as f64).powf(-1.0 - eta);
        spec.set_mode(k, num_complex::Complex64::from_polar(magnitude, theta))?;
    }
    let fluct = inverse(&spec);
    let scale = amplitude / fluct.linf_norm();
    let scaled = fluct.map(|v| v * scale);
    let shift = c0 - scaled.min();
    let u = scaled.map(|v| v + shift);
    RealField::new(grid, u.into_values())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn mode1_amplitude(u: &RealField) -> f64 {
        2.0 * forward(u).coeff(1).norm()
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig { cfl: 0.0, ..ok.clone() },
            SolverConfig { cfl: 1.5, ..ok.clone() },
            SolverConfig { delta: -1.0, ..ok.clone() },
            SolverConfig { t_end: -1.0, ..ok.clone() },
            SolverConfig { snapshot_times: vec![0.5, 0.2], ..ok.clone() },
            SolverConfig { snapshot_times: vec![2.0], ..ok.clone() },
            SolverConfig { dt_policy: DtPolicy::Fixed(0.0), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn output_times_include_endpoints() {
        let cfg = SolverConfig {
            t_end: 1.0,
            snapshot_times: vec![0.0, 0.25, 1.0],
            ..Default::default()
        };
        assert_eq!(cfg.output_times(), vec![0.0, 0.25, 1.0]);
        let cfg = SolverConfig { t_end: 0.0, ..Default::default() };
        assert_eq!(cfg.output_times(), vec![0.0]);
    }

    #[test]
    fn mollified_initial_examples() {
        let g = grid(64);
        let u0 = RealField::from_fn(&g, |x| 1.0 + 0.5 * x.cos());
        assert_eq!(mollified_initial(&u0, 0.0).unwrap(), u0);
        let c = RealField::constant(&g, 2.0);
        assert!(mollified_initial(&c, 0.3).unwrap().sub(&c).unwrap().linf_norm() < 1e-15);
        let m = mollified_initial(&u0, 0.1).unwrap();
        let expect = RealField::from_fn(&g, |x| 1.0 + 0.5 * (-0.1f64).exp() * x.cos());
        assert!(m.sub(&expect).unwrap().linf_norm() < 1e-15);
        assert!(m.min() >= u0.min());
        assert!(mollified_initial(&u0.map(|v| v - 1.0), 0.1).is_err());
    }

    #[test]
    fn stable_dt_for_unit_constant() {
        let g = grid(256);
        let state = SolverState::new(RealField::constant(&g, 1.0));
        let cfg = SolverConfig {
            cfl: 1.0,
            dt_max: f64::INFINITY,
            t_end: 10.0,
            ..Default::default()
        };
        let dt = stable_dt(&state, &cfg).unwrap();
        assert!((dt - PI / 128.0).abs() < 1e-15);

        let g2 = grid(512);
        let dt2 = stable_dt(&SolverState::new(RealField::constant(&g2, 1.0)), &cfg).unwrap();
        assert!((dt2 - dt / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stable_dt_lands_on_snapshot() {
        let g = grid(64);
        let mut state = SolverState::new(RealField::constant(&g, 1.0));
        state.t = 0.3;
        let cfg = SolverConfig {
            t_end: 1.0,
            snapshot_times: vec![0.301],
            ..Default::default()
        };
        let dt = stable_dt(&state, &cfg).unwrap();
        assert!((dt - (0.301 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = grid(64);
        for delta in [0.0, 1e-2] {
            let cfg = SolverConfig { delta, ..Default::default() };
            let state = SolverState::new(RealField::constant(&g, 1.3));
            let next = step(&state, 0.05, &cfg).unwrap();
            assert!(next.u.values().iter().all(|&v| (v - 1.3).abs() < 1e-15));
            assert_eq!(next.step_count, 1);
            assert_eq!(next.t, 0.05);
        }
    }

    #[test]
    fn one_step_linear_dispersion() {
        let g = grid(64);
        let eps = 1e-5;
        let u = RealField::from_fn(&g, |x| 1.0 + eps * x.cos());
        let cfg = SolverConfig::default();
        for dt in [0.01, 0.02] {
            let next = step(&SolverState::new(u.clone()), dt, &cfg).unwrap();
            let expect = eps * (-dt / PI).exp();
            let tol = eps * dt.powi(3) / (6.0 * PI.powi(3)) * 1.5 + 10.0 * eps * eps;
            assert!((mode1_amplitude(&next.u) - expect).abs() < tol);
        }
    }

    #[test]
    fn positivity_abort_is_reported() {
        let g = grid(64);
        let u = RealField::from_fn(&g, |x| 1.0 + 0.5 * x.cos());
        let cfg = SolverConfig { pos_floor: 0.9, ..Default::default() };
        let err = step(&SolverState::new(u), 0.01, &cfg).unwrap_err();
        assert!(matches!(err, Error::PositivityAbort { .. }));
    }

    #[test]
    fn solve_with_zero_horizon_returns_mollified_data() {
        let g = grid(64);
        let u0 = RealField::from_fn(&g, |x| 1.0 + 0.5 * x.cos());
        let cfg = SolverConfig { t_end: 0.0, delta: 0.1, ..Default::default() };
        let traj = solve(&u0, &cfg).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].u, mollified_initial(&u0, 0.1).unwrap());
        assert_eq!(traj.scalars.len(), 1);
    }

    #[test]
    fn solve_lands_on_snapshots() {
        let g = grid(64);
        let u0 = RealField::from_fn(&g, |x| 1.0 + 0.3 * x.cos());
        let cfg = SolverConfig {
            t_end: 0.5,
            snapshot_times: vec![0.1, 0.123, 0.4],
            ..Default::default()
        };
        let traj = solve(&u0, &cfg).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.123, 0.4, 0.5]);
        for s in &traj.snapshots {
            assert!(traj.scalars.iter().any(|r| r.t == s.t));
        }
        for w in traj.scalars.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn continuation_examples() {
        let g = grid(32);
        let u0 = RealField::from_fn(&g, |x| 1.0 + 0.2 * x.cos());
        let cfg = SolverConfig { t_end: 0.1, ..Default::default() };
        let single = delta_continuation(&u0, &[1e-2], 0.1, &cfg).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].distance.is_none());

        let c = RealField::constant(&g, 2.0);
        let members = delta_continuation(&c, &[1e-2, 5e-3, 2.5e-3], 0.1, &cfg).unwrap();
        for m in &members[1..] {
            let d = m.distance.unwrap();
            assert!(d.h12 < 1e-14 && d.l2 < 1e-14);
        }
        assert!(delta_continuation(&u0, &[1e-3, 1e-2], 0.1, &cfg).is_err());
        assert!(delta_continuation(&u0, &[1e-2, 0.0], 0.1, &cfg).is_err());
    }

    #[test]
    fn rough_initial_properties() {
        let g = grid(128);
        let u = rough_initial(&g, 1.0, 0.01, 1.0, 7).unwrap();
        assert!((u.min() - 1.0).abs() < 1e-14);
        assert!((u.max() - u.min()) <= 2.0 + 1e-12);
        let again = rough_initial(&g, 1.0, 0.01, 1.0, 7).unwrap();
        assert_eq!(u, again);
        let other = rough_initial(&g, 1.0, 0.01, 1.0, 8).unwrap();
        assert_ne!(u, other);
        // Spectrum magnitudes follow (1+|k|)^{-1-η} up to the common scale.
        let spec = forward(&u);
        let r = spec.coeff(3).norm() / spec.coeff(30).norm();
        assert!((r - (31.0f64 / 4.0).powf(1.01)).abs() < 1e-9);
        assert!(spec.coeff(64).norm() < 1e-15);
    }
}
