//! Command-line front end: configuration, experiment drivers and file output.

pub mod config;
pub mod experiments;
pub mod operators;
pub mod output;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use config::{parse_config_with, RunConfig};
use output::{atomic_write, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepDelta,
    Smoothing,
    Stability,
    RootsCompare,
    CheckOperators,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Solve,
        Command::SweepDelta,
        Command::Smoothing,
        Command::Stability,
        Command::RootsCompare,
        Command::CheckOperators,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::SweepDelta => "sweep-delta",
            Self::Smoothing => "smoothing",
            Self::Stability => "stability",
            Self::RootsCompare => "roots-compare",
            Self::CheckOperators => "check-operators",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|c| c.name()).collect();
                format!("unknown command {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// `section.key=value`, applied after the file in order.
    pub overrides: Vec<String>,
    /// Replaces `solver.seed` after all overrides.
    pub seed: Option<u64>,
}

impl RunSpec {
    pub fn load_config(&self) -> Result<RunConfig> {
        let text = match &self.config_path {
            Some(p) => fs::read_to_string(p)?,
            None => String::new(),
        };
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("solver.seed={seed}"));
        }
        parse_config_with(&text, &overrides)
    }
}

/// Runs the command, writing `resolved.cfg`, its data files and `summary.txt`.
pub fn execute(spec: &RunSpec) -> Result<Summary> {
    let cfg = spec.load_config()?;
    let out = &spec.output_dir;
    fs::create_dir_all(out)?;
    atomic_write(&out.join("resolved.cfg"), &cfg.resolved())?;
    let mut summary = match spec.command {
        Command::Solve => experiments::run_solve(&cfg, out)?,
        Command::SweepDelta => experiments::run_sweep(&cfg, out)?,
        Command::Smoothing => experiments::run_smoothing(&cfg, out)?,
        Command::Stability => experiments::run_stability(&cfg, out)?,
        Command::RootsCompare => experiments::run_roots_compare(&cfg, out)?,
        Command::CheckOperators => experiments::run_check_operators(&cfg)?,
    };
    summary.values.insert(0, ("command".into(), spec.command.name().into()));
    atomic_write(&out.join("summary.txt"), &summary.render())?;
    Ok(summary)
}

/// Exit code for a run that could not complete.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument { .. } => 2,
        Error::Io(_) | Error::Csv(_) => 4,
        _ => 3,
    }
}
