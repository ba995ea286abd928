//! Snapshot and diagnostics CSV files and the PASS/FAIL summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{Snapshot, Trajectory};
use crate::spectral::{PeriodicGrid, RealField};

pub const DIAGNOSTICS_HEADER: &str = "t,dt,min_u,max_u,mass,h12,dissipation";

/// Writes through a sibling temp file and renames it into place.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_snapshot_csv(snapshots: &[Snapshot]) -> Result<String> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::Csv("no snapshots to write".into()))?;
    let grid = first.u.grid();
    let times: Vec<String> = snapshots.iter().map(|s| s.t.to_string()).collect();
    let mut out = format!("# n={} times={}\n", grid.n(), times.join(","));
    for j in 0..grid.n() {
        out.push_str(&num(grid.x(j)));
        for s in snapshots {
            if s.u.grid() != grid {
                return Err(Error::GridMismatch {
                    left: grid.n(),
                    right: s.u.grid().n(),
                });
            }
            out.push(',');
            out.push_str(&num(s.u.values()[j]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_snapshot_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    atomic_write(path, &render_snapshot_csv(&traj.snapshots)?)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Csv(format!("line {line}: {s:?} is not a number")))
}

pub fn parse_snapshot_csv(text: &str) -> Result<Vec<Snapshot>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let rest = header
        .strip_prefix("# n=")
        .ok_or_else(|| Error::Csv(format!("malformed header {header:?}")))?;
    let (n, times) = rest
        .split_once(" times=")
        .ok_or_else(|| Error::Csv(format!("malformed header {header:?}")))?;
    let n: usize = n
        .parse()
        .map_err(|_| Error::Csv(format!("malformed grid size {n:?}")))?;
    let times = times
        .split(',')
        .map(|t| parse_f64(t, 1))
        .collect::<Result<Vec<f64>>>()?;
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Csv("snapshot times must be strictly increasing".into()));
    }
    let grid = PeriodicGrid::new(n)?;
    let mut columns = vec![Vec::with_capacity(n); times.len()];
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != times.len() + 1 {
            return Err(Error::Csv(format!(
                "line {lineno}: expected {} columns, found {}",
                times.len() + 1,
                cells.len()
            )));
        }
        if rows >= n {
            return Err(Error::Csv(format!("more than {n} data rows")));
        }
        let x = parse_f64(cells[0], lineno)?;
        if (x - grid.x(rows)).abs() > 1e-12 {
            return Err(Error::Csv(format!("line {lineno}: x = {x} is not grid node {rows}")));
        }
        for (col, cell) in columns.iter_mut().zip(&cells[1..]) {
            col.push(parse_f64(cell, lineno)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Csv(format!("expected {n} data rows, found {rows}")));
    }
    times
        .into_iter()
        .zip(columns)
        .map(|(t, values)| {
            Ok(Snapshot {
                t,
                u: RealField::new(&grid, values)?,
            })
        })
        .collect()
}

pub fn read_snapshot_csv(path: &Path) -> Result<Vec<Snapshot>> {
    parse_snapshot_csv(&fs::read_to_string(path)?)
}

pub fn render_diagnostics_csv(traj: &Trajectory) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in &traj.scalars {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.dt),
            num(r.min_u),
            num(r.max_u),
            num(r.mass),
            num(r.h12),
            num(r.dissipation)
        );
    }
    out
}

pub fn emit_diagnostics_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    atomic_write(path, &render_diagnostics_csv(traj))
}

/// Check families, in exit-code order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Operators,
    MaximumPrinciple,
    Energy,
    Mass,
    Continuation,
    Smoothing,
    Stability,
    Roots,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Operators => 10,
            Self::MaximumPrinciple => 11,
            Self::Energy => 12,
            Self::Mass => 13,
            Self::Continuation => 14,
            Self::Smoothing => 15,
            Self::Stability => 16,
            Self::Roots => 17,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub category: Category,
    pub name: String,
    pub passed: bool,
    pub observed: String,
    /// Relation and bound, e.g. `<= 10`.
    pub threshold: String,
}

/// Text form of a summary entry; floats switch to exponent form at extreme magnitudes.
pub trait SummaryValue {
    fn text(&self) -> String;
}

impl SummaryValue for f64 {
    fn text(&self) -> String {
        format!("{self:?}")
    }
}

impl SummaryValue for usize {
    fn text(&self) -> String {
        self.to_string()
    }
}

impl SummaryValue for &str {
    fn text(&self) -> String {
        self.to_string()
    }
}

impl SummaryValue for String {
    fn text(&self) -> String {
        self.clone()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub values: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn value(&mut self, key: impl Into<String>, v: impl SummaryValue) {
        self.values.push((key.into(), v.text()));
    }

    pub fn check(
        &mut self,
        category: Category,
        name: impl Into<String>,
        passed: bool,
        observed: impl SummaryValue,
        threshold: impl Into<String>,
    ) {
        self.checks.push(Check {
            category,
            name: name.into(),
            passed,
            observed: observed.text(),
            threshold: threshold.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, else the first failure's category code.
    pub fn exit_code(&self) -> i32 {
        self.checks
            .iter()
            .find(|c| !c.passed)
            .map_or(0, |c| c.category.exit_code())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {}: {} (threshold {})", c.name, c.observed, c.threshold);
        }
        out
    }
}
