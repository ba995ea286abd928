//! One driver per command. Each writes its files into the output directory
//! and returns the summary of its checks.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::{InitialKind, RunConfig};
use super::operators::run_operator_battery;
use super::output::{atomic_write, emit_diagnostics_csv, write_snapshot_csv, Category, Summary};
use crate::diagnostics::{
    energy_budget, extremum_report, linear_response_spread, mass, mass_drift, smoothing_fit, stability_compare,
};
use crate::error::Result;
use crate::roots::{quantile_sample, root_flow, wasserstein1, Density};
use crate::solver::{delta_continuation, rough_initial, solve, Model, SolverConfig, Trajectory};
use crate::spectral::{PeriodicGrid, RealField};

/// `exp(-1/(1 - (x/w)²))` on `|x| < w`, zero elsewhere, scaled to unit mass.
pub fn smooth_bump(grid: &PeriodicGrid, half_width: f64) -> RealField {
    let raw = RealField::from_fn(grid, |x| {
        let x = if x >= std::f64::consts::PI { x - 2.0 * std::f64::consts::PI } else { x };
        let r = x / half_width;
        if r.abs() < 1.0 {
            (-1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    });
    let m = mass(&raw);
    raw.map(|v| v / m)
}

pub fn initial_field(cfg: &RunConfig, grid: &PeriodicGrid) -> Result<RealField> {
    let i = &cfg.initial;
    match i.kind {
        InitialKind::Cosine => {
            let k = i.mode as f64;
            Ok(RealField::from_fn(grid, |x| i.c0 + i.amplitude * (k * x).cos()))
        }
        InitialKind::Rough => rough_initial(grid, i.c0, i.eta, i.amplitude, cfg.solver.seed),
        InitialKind::Bump => Ok(smooth_bump(grid, i.half_width).map(|v| v + i.floor)),
    }
}

/// `count` times from `t_min` to `t_end`, equally spaced in `log t`.
pub fn log_spaced(t_min: f64, t_end: f64, count: usize) -> Vec<f64> {
    let ratio = t_end / t_min;
    let mut times: Vec<f64> = (0..count)
        .map(|i| t_min * ratio.powf(i as f64 / (count - 1) as f64))
        .collect();
    times[0] = t_min;
    times[count - 1] = t_end;
    times
}

fn standard_checks(traj: &Trajectory, cfg: &RunConfig, prefix: &str, summary: &mut Summary) -> Result<()> {
    let c = &cfg.checks;
    let horizon = traj.t_end().max(1.0);

    let ex = extremum_report(traj);
    let tol = c.extremum_tol * horizon;
    summary.value(format!("{prefix}min_drift"), ex.min_drift);
    summary.value(format!("{prefix}max_drift"), ex.max_drift);
    summary.check(
        Category::MaximumPrinciple,
        format!("{prefix}min_drift"),
        ex.min_drift >= -tol,
        ex.min_drift,
        format!(">= -{tol:e}"),
    );
    summary.check(
        Category::MaximumPrinciple,
        format!("{prefix}max_drift"),
        ex.max_drift <= tol,
        ex.max_drift,
        format!("<= {tol:e}"),
    );

    let budget = energy_budget(traj)?;
    summary.value(format!("{prefix}energy.h12_sq_sup"), budget.h12_sq_sup);
    summary.value(format!("{prefix}energy.dissipation_cum"), budget.dissipation_cum);
    summary.value(format!("{prefix}energy.initial_h12_sq"), budget.initial_h12_sq);
    summary.value(format!("{prefix}energy.bound_ratio"), budget.bound_ratio);
    summary.check(
        Category::Energy,
        format!("{prefix}energy_budget"),
        budget.within(c.energy_bound),
        budget.bound_ratio,
        format!("<= {}", c.energy_bound),
    );

    let drift = mass_drift(traj);
    let bound = if traj.delta == 0.0 {
        c.mass_tol * horizon
    } else {
        c.mass_factor * traj.delta * horizon
    };
    summary.value(format!("{prefix}mass_drift"), drift);
    summary.check(
        Category::Mass,
        format!("{prefix}mass_drift"),
        drift <= bound,
        drift,
        format!("<= {bound:e}"),
    );
    Ok(())
}

fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_snapshot_csv(traj, &dir.join("snapshots.csv"))?;
    emit_diagnostics_csv(traj, &dir.join("diagnostics.csv"))
}

pub fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let grid = PeriodicGrid::new(cfg.n)?;
    let u0 = initial_field(cfg, &grid)?;
    let traj = solve(&u0, &cfg.solver)?;
    write_trajectory(&traj, out)?;
    let mut summary = Summary::default();
    summary.value("steps", traj.scalars.len() - 1);
    standard_checks(&traj, cfg, "", &mut summary)?;
    Ok(summary)
}

pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let grid = PeriodicGrid::new(cfg.n)?;
    let u0 = initial_field(cfg, &grid)?;
    let members = delta_continuation(&u0, &cfg.sweep.deltas, cfg.solver.t_end, &cfg.solver)?;
    members
        .par_iter()
        .enumerate()
        .map(|(i, m)| write_trajectory(&m.trajectory, &out.join(format!("member_{i}"))))
        .collect::<Result<Vec<()>>>()?;

    let mut summary = Summary::default();
    let mut rows = String::from("delta,h12_distance,l2_distance\n");
    let mut prev: Option<f64> = None;
    for (i, m) in members.iter().enumerate() {
        summary.value(format!("member_{i}.delta"), m.delta);
        standard_checks(&m.trajectory, cfg, &format!("member_{i}."), &mut summary)?;
        let Some(d) = m.distance else { continue };
        rows.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", m.delta, d.h12, d.l2));
        summary.value(format!("member_{i}.h12_distance"), d.h12);
        if let Some(p) = prev {
            summary.check(
                Category::Continuation,
                format!("member_{i}.distance_decreasing"),
                d.h12 < p,
                d.h12,
                format!("< {p}"),
            );
        }
        prev = Some(d.h12);
    }
    atomic_write(&out.join("continuation.csv"), &rows)?;
    Ok(summary)
}

pub fn run_smoothing(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let sm = &cfg.smoothing;
    let grid = PeriodicGrid::new(cfg.n)?;
    let u0 = initial_field(cfg, &grid)?;
    let solver = SolverConfig {
        snapshot_times: log_spaced(sm.t_min, cfg.solver.t_end, sm.snapshots),
        ..cfg.solver.clone()
    };
    let traj = solve(&u0, &solver)?;
    write_trajectory(&traj, out)?;

    let mut summary = Summary::default();
    let report = smoothing_fit(&traj, sm.s, sm.eps0, sm.t_min)?;
    let mut rows = String::from("t,seminorm,weighted\n");
    for (&t, &v) in report.times.iter().zip(&report.norms) {
        rows.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, v, t.powf(sm.s + sm.eps0) * v));
    }
    atomic_write(&out.join("smoothing.csv"), &rows)?;
    summary.value("smoothing.sup_weighted", report.sup_weighted);
    summary.value("smoothing.sup_time", report.sup_time);
    summary.value("smoothing.slope", report.slope);
    let floor = -(sm.s + sm.eps0) * (1.0 + sm.slack);
    summary.check(
        Category::Smoothing,
        "smoothing_slope",
        report.passes(sm.slack),
        report.slope,
        format!(">= {floor}"),
    );
    if sm.require_sup_at_earliest {
        summary.check(
            Category::Smoothing,
            "smoothing_sup_at_earliest",
            report.sup_at_earliest(),
            format!("sup at t = {}", report.sup_time),
            format!("t = {}", report.times[0]),
        );
    }
    if sm.control && cfg.solver.delta > 0.0 {
        let control_cfg = SolverConfig {
            model: Model::HeatOnly,
            ..solver
        };
        let control = solve(&u0, &control_cfg)?;
        let c = smoothing_fit(&control, sm.s, sm.eps0, sm.t_min)?;
        summary.value("control.slope", c.slope);
        summary.check(
            Category::Smoothing,
            "control_slope",
            c.slope >= -sm.s / 2.0,
            c.slope,
            format!(">= {}", -sm.s / 2.0),
        );
    }
    standard_checks(&traj, cfg, "", &mut summary)?;
    Ok(summary)
}

pub fn run_stability(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let st = &cfg.stability;
    let grid = PeriodicGrid::new(cfg.n)?;
    let u0 = initial_field(cfg, &grid)?;
    let t_end = cfg.solver.t_end;
    let times: Vec<f64> = (1..st.snapshots)
        .map(|i| t_end * i as f64 / st.snapshots as f64)
        .collect();
    let solver = SolverConfig {
        snapshot_times: times,
        ..cfg.solver.clone()
    };
    let base = solve(&u0, &solver)?;
    let reports = st
        .sizes
        .par_iter()
        .map(|&size| {
            let perturbed = u0.zip_map(&RealField::from_fn(&grid, f64::cos), |a, c| a + size * c)?;
            stability_compare(&base, &solve(&perturbed, &solver)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = String::from("t");
    for i in 0..reports.len() {
        rows.push_str(&format!(",d_{i}"));
    }
    rows.push('\n');
    for (j, t) in base.times().iter().enumerate() {
        rows.push_str(&format!("{t:.16e}"));
        for r in &reports {
            rows.push_str(&format!(",{:.16e}", r.distances[j]));
        }
        rows.push('\n');
    }
    atomic_write(&out.join("stability.csv"), &rows)?;

    let mut summary = Summary::default();
    for (&size, r) in st.sizes.iter().zip(&reports) {
        summary.value(format!("stability.growth[{size}]"), r.growth);
        summary.check(
            Category::Stability,
            format!("growth_factor[{size}]"),
            r.growth < st.growth_bound,
            r.growth,
            format!("< {}", st.growth_bound),
        );
    }
    let spread = linear_response_spread(&reports, &st.sizes);
    summary.value("stability.linear_spread", spread);
    summary.check(
        Category::Stability,
        "linear_response",
        spread <= st.linear_tol,
        spread,
        format!("<= {}", st.linear_tol),
    );
    Ok(summary)
}

/// W₁ between root flows of a quantile-sampled bump and the PDE solution,
/// one value per root count.
pub fn roots_comparison(cfg: &RunConfig) -> Result<(Trajectory, Vec<(usize, usize, f64)>)> {
    let r = &cfg.roots;
    let grid = PeriodicGrid::new(r.grid_n)?;
    let bump = smooth_bump(&grid, r.half_width);
    let solver = SolverConfig {
        delta: r.delta,
        t_end: r.t,
        snapshot_times: Vec::new(),
        ..cfg.solver.clone()
    };
    let traj = solve(&bump.map(|v| v + r.floor), &solver)?;
    let lifted = traj.final_field().map(|v| (v - r.floor).max(0.0));
    let pde = Density::from_periodic(&lifted)?.restrict(-r.window, r.window)?;
    let initial = Density::from_periodic(&bump)?;
    let rows = r
        .counts
        .par_iter()
        .map(|&n| {
            let flowed = root_flow(&quantile_sample(&initial, n)?, r.t)?;
            Ok((n, flowed.len(), wasserstein1(&flowed, &pde, r.normalize)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((traj, rows))
}

pub fn run_roots_compare(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let bound = cfg.roots.w1_bound;
    let (traj, rows) = roots_comparison(cfg)?;
    write_trajectory(&traj, out)?;
    let mut csv = String::from("n,remaining,w1\n");
    let mut summary = Summary::default();
    let mut prev: Option<f64> = None;
    for &(n, remaining, w) in &rows {
        csv.push_str(&format!("{n},{remaining},{w:.16e}\n"));
        summary.value(format!("roots.w1[{n}]"), w);
        summary.check(
            Category::Roots,
            format!("w1_bound[{n}]"),
            w.is_finite() && w < bound,
            w,
            format!("< {bound}"),
        );
        if let Some(p) = prev {
            summary.check(Category::Roots, format!("w1_nonincreasing[{n}]"), w <= p, w, format!("<= {p}"));
        }
        prev = Some(w);
    }
    atomic_write(&out.join("roots.csv"), &csv)?;
    Ok(summary)
}

pub fn run_check_operators(cfg: &RunConfig) -> Result<Summary> {
    let mut summary = Summary::default();
    run_operator_battery(&cfg.operators, cfg.solver.seed, &mut summary)?;
    Ok(summary)
}
