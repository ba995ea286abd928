//! `key = value` configuration with `[section]` headers.
//!
//! Every key has a default; unknown sections or keys are rejected. The
//! resolved configuration renders back to text with every key present.

use std::fmt::Write as _;
use std::str::FromStr;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::solver::{DtPolicy, Model, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// `c0 + amplitude·cos(mode·x)`.
    Cosine,
    /// Seeded random phases with power-law amplitudes.
    Rough,
    /// Smooth compactly supported bump of unit mass plus `floor`.
    Bump,
}

impl InitialKind {
    fn name(self) -> &'static str {
        match self {
            Self::Cosine => "cosine",
            Self::Rough => "rough",
            Self::Bump => "bump",
        }
    }
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "rough" => Ok(Self::Rough),
            "bump" => Ok(Self::Bump),
            other => Err(format!("expected one of cosine, rough, bump; got {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub c0: f64,
    pub amplitude: f64,
    pub mode: usize,
    pub eta: f64,
    pub half_width: f64,
    pub floor: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Cosine,
            c0: 1.0,
            amplitude: 0.3,
            mode: 1,
            eta: 0.01,
            half_width: 1.5,
            floor: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    /// Allowed extremum drift per unit time.
    pub extremum_tol: f64,
    /// Bound on `(sup ‖u‖² + ∫D) / ‖u₀‖²` in `Ḣ^{1/2}`.
    pub energy_bound: f64,
    /// Allowed mass drift per unit time at `δ = 0`.
    pub mass_tol: f64,
    /// Allowed mass drift per unit time at `δ > 0`, in units of `δ`.
    pub mass_factor: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            extremum_tol: 1e-8,
            energy_bound: 10.0,
            mass_tol: 1e-10,
            mass_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub deltas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingConfig {
    pub s: f64,
    pub eps0: f64,
    pub t_min: f64,
    pub slack: f64,
    /// Log-spaced snapshots on `[t_min, t_end]`.
    pub snapshots: usize,
    pub require_sup_at_earliest: bool,
    /// Also run the heat-only control (needs `δ > 0`).
    pub control: bool,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            s: 2.0,
            eps0: 0.1,
            t_min: 0.01,
            slack: 0.25,
            snapshots: 21,
            require_sup_at_earliest: true,
            control: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityConfig {
    /// Amplitudes of the `cos x` perturbation.
    pub sizes: Vec<f64>,
    pub growth_bound: f64,
    pub linear_tol: f64,
    pub snapshots: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1e-3, 5e-4, 2.5e-4],
            growth_bound: 20.0,
            linear_tol: 0.2,
            snapshots: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootsConfig {
    pub counts: Vec<usize>,
    pub t: f64,
    pub half_width: f64,
    /// Comparison window `[-window, window]`.
    pub window: f64,
    pub grid_n: usize,
    pub delta: f64,
    pub floor: f64,
    pub normalize: bool,
    pub w1_bound: f64,
}

impl Default for RootsConfig {
    fn default() -> Self {
        Self {
            counts: vec![100, 200, 400],
            t: 0.3,
            half_width: 1.5,
            window: 1.5,
            grid_n: 1024,
            delta: 1e-3,
            floor: 1e-3,
            normalize: true,
            w1_bound: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorConfig {
    pub n: usize,
    pub fields: usize,
    pub bandwidth: usize,
    pub tol: f64,
    pub kernel_factor: usize,
    pub kernel_fields: usize,
    pub kernel_tol: f64,
    pub form_fields: usize,
    pub form_tol: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            n: 256,
            fields: 100,
            bandwidth: 32,
            tol: 1e-12,
            kernel_factor: 4,
            kernel_fields: 5,
            kernel_tol: 1e-4,
            form_fields: 50,
            form_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub solver: SolverConfig,
    pub initial: InitialConfig,
    pub checks: CheckConfig,
    pub sweep: SweepConfig,
    pub smoothing: SmoothingConfig,
    pub stability: StabilityConfig,
    pub roots: RootsConfig,
    pub operators: OperatorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 256,
            solver: SolverConfig::default(),
            initial: InitialConfig::default(),
            checks: CheckConfig::default(),
            sweep: SweepConfig::default(),
            smoothing: SmoothingConfig::default(),
            stability: StabilityConfig::default(),
            roots: RootsConfig::default(),
            operators: OperatorConfig::default(),
        }
    }
}

const SECTIONS: &[&str] = &[
    "grid",
    "solver",
    "initial",
    "checks",
    "sweep",
    "smoothing",
    "stability",
    "roots",
    "operators",
];

fn config_err(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {reason}"))
}

/// Typed, consuming view of one section.
struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Float(v)) => Ok(v),
            Some(Value::Integer(v)) => Ok(v as f64),
            Some(other) => Err(config_err(&self.key(key), format!("expected a number, got {other}"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Integer(v)) if v >= 0 => Ok(v as usize),
            Some(other) => Err(config_err(
                &self.key(key),
                format!("expected a nonnegative integer, got {other}"),
            )),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        Ok(self.usize(key, default as usize)? as u64)
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Boolean(v)) => Ok(v),
            Some(other) => Err(config_err(&self.key(key), format!("expected true or false, got {other}"))),
        }
    }

    fn string(&mut self, key: &str, default: &str) -> Result<String> {
        match self.table.remove(key) {
            None => Ok(default.to_string()),
            Some(Value::String(v)) => Ok(v),
            Some(other) => Err(config_err(&self.key(key), format!("expected a string, got {other}"))),
        }
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.table.remove(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(x),
                    Value::Integer(x) => Ok(x as f64),
                    other => Err(config_err(&self.key(key), format!("expected numbers, got {other}"))),
                })
                .collect(),
            Some(other) => Err(config_err(&self.key(key), format!("expected a list, got {other}"))),
        }
    }

    fn usize_list(&mut self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.table.remove(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::Integer(x) if x >= 0 => Ok(x as usize),
                    other => Err(config_err(
                        &self.key(key),
                        format!("expected nonnegative integers, got {other}"),
                    )),
                })
                .collect(),
            Some(other) => Err(config_err(&self.key(key), format!("expected a list, got {other}"))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            Some(k) => Err(Error::Config(format!("unknown key {}.{k}", self.name))),
            None => Ok(()),
        }
    }
}

fn take_section(root: &mut Table, name: &'static str) -> Result<Section> {
    let table = match root.remove(name) {
        None => Table::new(),
        Some(Value::Table(t)) => t,
        Some(other) => {
            return Err(Error::Config(format!("{name}: expected a section, got {other}")));
        }
    };
    Ok(Section { name, table })
}

fn parse_value(text: &str) -> Value {
    let doc = format!("v = {text}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.to_string())),
        Err(_) => Value::String(text.to_string()),
    }
}

/// Applies one `section.key=value` override.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<()> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key {path:?} is not section.key")))?;
    if section.is_empty() || key.is_empty() {
        return Err(Error::Config(format!("override key {path:?} is not section.key")));
    }
    let entry = root
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(t) = entry else {
        return Err(Error::Config(format!("{section}: expected a section")));
    };
    t.insert(key.to_string(), parse_value(value.trim()));
    Ok(())
}

/// Parses configuration text, applies overrides in order and validates.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string().trim_end().to_string()))?;
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown section {k}")));
    }
    let d = RunConfig::default();

    let mut s = take_section(&mut root, "grid")?;
    let n = s.usize("n", d.n)?;
    s.finish()?;

    let mut s = take_section(&mut root, "solver")?;
    let dt_policy = match s.string("dt_policy", "adaptive")?.as_str() {
        "adaptive" => {
            s.f64("dt", 1e-3)?;
            DtPolicy::Adaptive
        }
        "fixed" => DtPolicy::Fixed(s.f64("dt", 1e-3)?),
        other => {
            return Err(config_err("solver.dt_policy", format!("expected adaptive or fixed, got {other:?}")));
        }
    };
    let model = match s.string("model", "full")?.as_str() {
        "full" => Model::Full,
        "heat" => Model::HeatOnly,
        other => return Err(config_err("solver.model", format!("expected full or heat, got {other:?}"))),
    };
    let solver = SolverConfig {
        delta: s.f64("delta", d.solver.delta)?,
        t_end: s.f64("t_end", d.solver.t_end)?,
        cfl: s.f64("cfl", d.solver.cfl)?,
        dt_max: s.f64("dt_max", d.solver.dt_max)?,
        snapshot_times: s.f64_list("snapshot_times", &d.solver.snapshot_times)?,
        dealias: s.bool("dealias", d.solver.dealias)?,
        pos_floor: s.f64("pos_floor", d.solver.pos_floor)?,
        seed: s.u64("seed", d.solver.seed)?,
        dt_policy,
        model,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "initial")?;
    let kind = s
        .string("kind", d.initial.kind.name())?
        .parse()
        .map_err(|e| config_err("initial.kind", e))?;
    let initial = InitialConfig {
        kind,
        c0: s.f64("c0", d.initial.c0)?,
        amplitude: s.f64("amplitude", d.initial.amplitude)?,
        mode: s.usize("mode", d.initial.mode)?,
        eta: s.f64("eta", d.initial.eta)?,
        half_width: s.f64("half_width", d.initial.half_width)?,
        floor: s.f64("floor", d.initial.floor)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "checks")?;
    let checks = CheckConfig {
        extremum_tol: s.f64("extremum_tol", d.checks.extremum_tol)?,
        energy_bound: s.f64("energy_bound", d.checks.energy_bound)?,
        mass_tol: s.f64("mass_tol", d.checks.mass_tol)?,
        mass_factor: s.f64("mass_factor", d.checks.mass_factor)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "sweep")?;
    let sweep = SweepConfig {
        deltas: s.f64_list("deltas", &d.sweep.deltas)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "smoothing")?;
    let smoothing = SmoothingConfig {
        s: s.f64("s", d.smoothing.s)?,
        eps0: s.f64("eps0", d.smoothing.eps0)?,
        t_min: s.f64("t_min", d.smoothing.t_min)?,
        slack: s.f64("slack", d.smoothing.slack)?,
        snapshots: s.usize("snapshots", d.smoothing.snapshots)?,
        require_sup_at_earliest: s.bool("require_sup_at_earliest", d.smoothing.require_sup_at_earliest)?,
        control: s.bool("control", d.smoothing.control)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "stability")?;
    let stability = StabilityConfig {
        sizes: s.f64_list("sizes", &d.stability.sizes)?,
        growth_bound: s.f64("growth_bound", d.stability.growth_bound)?,
        linear_tol: s.f64("linear_tol", d.stability.linear_tol)?,
        snapshots: s.usize("snapshots", d.stability.snapshots)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "roots")?;
    let roots = RootsConfig {
        counts: s.usize_list("counts", &d.roots.counts)?,
        t: s.f64("t", d.roots.t)?,
        half_width: s.f64("half_width", d.roots.half_width)?,
        window: s.f64("window", d.roots.window)?,
        grid_n: s.usize("grid_n", d.roots.grid_n)?,
        delta: s.f64("delta", d.roots.delta)?,
        floor: s.f64("floor", d.roots.floor)?,
        normalize: s.bool("normalize", d.roots.normalize)?,
        w1_bound: s.f64("w1_bound", d.roots.w1_bound)?,
    };
    s.finish()?;

    let mut s = take_section(&mut root, "operators")?;
    let operators = OperatorConfig {
        n: s.usize("n", d.operators.n)?,
        fields: s.usize("fields", d.operators.fields)?,
        bandwidth: s.usize("bandwidth", d.operators.bandwidth)?,
        tol: s.f64("tol", d.operators.tol)?,
        kernel_factor: s.usize("kernel_factor", d.operators.kernel_factor)?,
        kernel_fields: s.usize("kernel_fields", d.operators.kernel_fields)?,
        kernel_tol: s.f64("kernel_tol", d.operators.kernel_tol)?,
        form_fields: s.usize("form_fields", d.operators.form_fields)?,
        form_tol: s.f64("form_tol", d.operators.form_tol)?,
    };
    s.finish()?;

    let cfg = RunConfig {
        n,
        solver,
        initial,
        checks,
        sweep,
        smoothing,
        stability,
        roots,
        operators,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

fn grid_size_ok(n: usize) -> bool {
    n >= 16 && n % 2 == 0
}

fn require(ok: bool, key: &str, reason: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_err(key, reason))
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        require(grid_size_ok(self.n), "grid.n", format!("must be even and >= 16, got {}", self.n))?;
        self.solver.validate().map_err(|e| match e {
            Error::InvalidArgument { name, reason } => config_err(&format!("solver.{name}"), reason),
            other => other,
        })?;

        let i = &self.initial;
        require(positive(i.c0), "initial.c0", format!("must be > 0, got {}", i.c0))?;
        require(
            i.amplitude >= 0.0 && i.amplitude.is_finite(),
            "initial.amplitude",
            format!("must be >= 0, got {}", i.amplitude),
        )?;
        require(
            i.mode >= 1 && i.mode < self.n / 2,
            "initial.mode",
            format!("must lie in [1, {}), got {}", self.n / 2, i.mode),
        )?;
        require(i.eta.is_finite(), "initial.eta", "must be finite")?;
        require(
            positive(i.half_width) && i.half_width < std::f64::consts::PI,
            "initial.half_width",
            format!("must lie in (0, π), got {}", i.half_width),
        )?;
        require(i.floor >= 0.0 && i.floor.is_finite(), "initial.floor", format!("must be >= 0, got {}", i.floor))?;
        if i.kind == InitialKind::Cosine {
            require(
                i.amplitude < i.c0,
                "initial.amplitude",
                format!("must be < c0 = {} for positive data, got {}", i.c0, i.amplitude),
            )?;
        }
        if i.kind == InitialKind::Rough {
            require(positive(i.amplitude), "initial.amplitude", "must be > 0 for rough data")?;
        }

        let c = &self.checks;
        for (key, v) in [
            ("checks.extremum_tol", c.extremum_tol),
            ("checks.energy_bound", c.energy_bound),
            ("checks.mass_tol", c.mass_tol),
            ("checks.mass_factor", c.mass_factor),
        ] {
            require(v >= 0.0 && v.is_finite(), key, format!("must be >= 0, got {v}"))?;
        }

        let d = &self.sweep.deltas;
        require(!d.is_empty(), "sweep.deltas", "need at least one value")?;
        require(d.iter().all(|&v| positive(v)), "sweep.deltas", "values must be > 0")?;
        require(d.windows(2).all(|w| w[1] < w[0]), "sweep.deltas", "must be strictly decreasing")?;

        let s = &self.smoothing;
        require(positive(s.s), "smoothing.s", format!("must be > 0, got {}", s.s))?;
        require(positive(s.eps0), "smoothing.eps0", format!("must be > 0, got {}", s.eps0))?;
        require(
            positive(s.t_min) && s.t_min < self.solver.t_end,
            "smoothing.t_min",
            format!("must lie in (0, t_end), got {}", s.t_min),
        )?;
        require(s.slack >= 0.0 && s.slack.is_finite(), "smoothing.slack", format!("must be >= 0, got {}", s.slack))?;
        require(s.snapshots >= 3, "smoothing.snapshots", format!("need at least 3, got {}", s.snapshots))?;

        let st = &self.stability;
        require(!st.sizes.is_empty(), "stability.sizes", "need at least one value")?;
        require(
            st.sizes.iter().all(|&v| positive(v) && v < self.initial.c0),
            "stability.sizes",
            "values must lie in (0, c0)",
        )?;
        require(positive(st.growth_bound), "stability.growth_bound", "must be > 0")?;
        require(st.linear_tol >= 0.0, "stability.linear_tol", "must be >= 0")?;
        require(st.snapshots >= 1, "stability.snapshots", "need at least 1")?;

        let r = &self.roots;
        require(!r.counts.is_empty(), "roots.counts", "need at least one value")?;
        require(r.counts.iter().all(|&c| c >= 2), "roots.counts", "values must be >= 2")?;
        require((0.0..1.0).contains(&r.t), "roots.t", format!("must lie in [0, 1), got {}", r.t))?;
        require(
            positive(r.half_width) && r.half_width < std::f64::consts::PI,
            "roots.half_width",
            format!("must lie in (0, π), got {}", r.half_width),
        )?;
        require(
            positive(r.window) && r.window < std::f64::consts::PI,
            "roots.window",
            format!("must lie in (0, π), got {}", r.window),
        )?;
        require(grid_size_ok(r.grid_n), "roots.grid_n", format!("must be even and >= 16, got {}", r.grid_n))?;
        require(r.delta >= 0.0 && r.delta.is_finite(), "roots.delta", format!("must be >= 0, got {}", r.delta))?;
        require(r.floor >= 0.0 && r.floor.is_finite(), "roots.floor", format!("must be >= 0, got {}", r.floor))?;
        require(r.delta > 0.0 || r.floor > 0.0, "roots.floor", "must be > 0 when roots.delta = 0")?;
        require(positive(r.w1_bound), "roots.w1_bound", "must be > 0")?;

        let o = &self.operators;
        require(grid_size_ok(o.n), "operators.n", format!("must be even and >= 16, got {}", o.n))?;
        require(
            o.bandwidth >= 1 && o.bandwidth < o.n / 2,
            "operators.bandwidth",
            format!("must lie in [1, {}), got {}", o.n / 2, o.bandwidth),
        )?;
        require(o.kernel_factor >= 1, "operators.kernel_factor", "must be >= 1")?;
        for (key, v) in [
            ("operators.tol", o.tol),
            ("operators.kernel_tol", o.kernel_tol),
            ("operators.form_tol", o.form_tol),
        ] {
            require(positive(v), key, format!("must be > 0, got {v}"))?;
        }
        Ok(())
    }

    /// Every key with its value, in a fixed order.
    pub fn resolved(&self) -> String {
        let mut out = String::new();
        let f = |v: f64| Value::Float(v).to_string();
        let fl = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect()).to_string();
        let ul = |v: &[usize]| Value::Array(v.iter().map(|&x| Value::Integer(x as i64)).collect()).to_string();
        let sv = |v: &str| Value::String(v.to_string()).to_string();

        let _ = writeln!(out, "[grid]\nn = {}\n", self.n);

        let s = &self.solver;
        let (policy, dt) = match s.dt_policy {
            DtPolicy::Adaptive => ("adaptive", 1e-3),
            DtPolicy::Fixed(dt) => ("fixed", dt),
        };
        let model = match s.model {
            Model::Full => "full",
            Model::HeatOnly => "heat",
        };
        let _ = writeln!(out, "[solver]");
        let _ = writeln!(out, "delta = {}", f(s.delta));
        let _ = writeln!(out, "t_end = {}", f(s.t_end));
        let _ = writeln!(out, "cfl = {}", f(s.cfl));
        let _ = writeln!(out, "dt_max = {}", f(s.dt_max));
        let _ = writeln!(out, "snapshot_times = {}", fl(&s.snapshot_times));
        let _ = writeln!(out, "dealias = {}", s.dealias);
        let _ = writeln!(out, "pos_floor = {}", f(s.pos_floor));
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "dt_policy = {}", sv(policy));
        let _ = writeln!(out, "dt = {}", f(dt));
        let _ = writeln!(out, "model = {}\n", sv(model));

        let i = &self.initial;
        let _ = writeln!(out, "[initial]");
        let _ = writeln!(out, "kind = {}", sv(i.kind.name()));
        let _ = writeln!(out, "c0 = {}", f(i.c0));
        let _ = writeln!(out, "amplitude = {}", f(i.amplitude));
        let _ = writeln!(out, "mode = {}", i.mode);
        let _ = writeln!(out, "eta = {}", f(i.eta));
        let _ = writeln!(out, "half_width = {}", f(i.half_width));
        let _ = writeln!(out, "floor = {}\n", f(i.floor));

        let c = &self.checks;
        let _ = writeln!(out, "[checks]");
        let _ = writeln!(out, "extremum_tol = {}", f(c.extremum_tol));
        let _ = writeln!(out, "energy_bound = {}", f(c.energy_bound));
        let _ = writeln!(out, "mass_tol = {}", f(c.mass_tol));
        let _ = writeln!(out, "mass_factor = {}\n", f(c.mass_factor));

        let _ = writeln!(out, "[sweep]\ndeltas = {}\n", fl(&self.sweep.deltas));

        let m = &self.smoothing;
        let _ = writeln!(out, "[smoothing]");
        let _ = writeln!(out, "s = {}", f(m.s));
        let _ = writeln!(out, "eps0 = {}", f(m.eps0));
        let _ = writeln!(out, "t_min = {}", f(m.t_min));
        let _ = writeln!(out, "slack = {}", f(m.slack));
        let _ = writeln!(out, "snapshots = {}", m.snapshots);
        let _ = writeln!(out, "require_sup_at_earliest = {}", m.require_sup_at_earliest);
        let _ = writeln!(out, "control = {}\n", m.control);

        let st = &self.stability;
        let _ = writeln!(out, "[stability]");
        let _ = writeln!(out, "sizes = {}", fl(&st.sizes));
        let _ = writeln!(out, "growth_bound = {}", f(st.growth_bound));
        let _ = writeln!(out, "linear_tol = {}", f(st.linear_tol));
        let _ = writeln!(out, "snapshots = {}\n", st.snapshots);

        let r = &self.roots;
        let _ = writeln!(out, "[roots]");
        let _ = writeln!(out, "counts = {}", ul(&r.counts));
        let _ = writeln!(out, "t = {}", f(r.t));
        let _ = writeln!(out, "half_width = {}", f(r.half_width));
        let _ = writeln!(out, "window = {}", f(r.window));
        let _ = writeln!(out, "grid_n = {}", r.grid_n);
        let _ = writeln!(out, "delta = {}", f(r.delta));
        let _ = writeln!(out, "floor = {}", f(r.floor));
        let _ = writeln!(out, "normalize = {}", r.normalize);
        let _ = writeln!(out, "w1_bound = {}\n", f(r.w1_bound));

        let o = &self.operators;
        let _ = writeln!(out, "[operators]");
        let _ = writeln!(out, "n = {}", o.n);
        let _ = writeln!(out, "fields = {}", o.fields);
        let _ = writeln!(out, "bandwidth = {}", o.bandwidth);
        let _ = writeln!(out, "tol = {}", f(o.tol));
        let _ = writeln!(out, "kernel_factor = {}", o.kernel_factor);
        let _ = writeln!(out, "kernel_fields = {}", o.kernel_fields);
        let _ = writeln!(out, "kernel_tol = {}", f(o.kernel_tol));
        let _ = writeln!(out, "form_fields = {}", o.form_fields);
        let _ = writeln!(out, "form_tol = {}", f(o.form_tol));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let text = cfg.resolved();
        for key in ["n = 256", "delta = 0.0", "cfl = 0.5", "deltas = [", "w1_bound = 0.1"] {
            assert!(text.contains(key), "{key} missing from\n{text}");
        }
    }

    #[test]
    fn resolved_text_parses_back() {
        let mut cfg = RunConfig::default();
        cfg.solver.delta = 1e-3;
        cfg.solver.snapshot_times = vec![0.1, 0.25];
        cfg.solver.dt_policy = DtPolicy::Fixed(2.5e-4);
        cfg.initial.kind = InitialKind::Rough;
        let text = cfg.resolved();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.resolved(), text);
    }

    #[test]
    fn negative_delta_names_the_key() {
        let err = parse_config("[solver]\ndelta = -1\n").unwrap_err().to_string();
        assert!(err.contains("solver.delta"), "{err}");
    }

    #[test]
    fn unknown_keys_and_sections_are_errors() {
        let err = parse_config("[solver]\ndelt = 1e-3\n").unwrap_err().to_string();
        assert!(err.contains("solver.delt"), "{err}");
        let err = parse_config("[solvr]\n").unwrap_err().to_string();
        assert!(err.contains("solvr"), "{err}");
    }

    #[test]
    fn type_errors_name_the_key() {
        let err = parse_config("[grid]\nn = \"big\"\n").unwrap_err().to_string();
        assert!(err.contains("grid.n"), "{err}");
        let err = parse_config("[solver]\ndealias = 1\n").unwrap_err().to_string();
        assert!(err.contains("solver.dealias"), "{err}");
    }

    #[test]
    fn cfl_outside_unit_interval() {
        let err = parse_config("[solver]\ncfl = 1.5\n").unwrap_err().to_string();
        assert!(err.contains("solver.cfl"), "{err}");
        assert!(parse_config("[solver]\ncfl = 1\n").is_ok());
    }

    #[test]
    fn override_beats_file() {
        let text = "[solver]\ndelta = 0.5\n";
        let cfg = parse_config_with(text, &["solver.delta=1e-3".to_string()]).unwrap();
        assert_eq!(cfg.solver.delta, 1e-3);
        let cfg = parse_config_with("", &["initial.kind=rough".to_string()]).unwrap();
        assert_eq!(cfg.initial.kind, InitialKind::Rough);
        let cfg = parse_config_with("", &["sweep.deltas=[0.1, 0.05]".to_string()]).unwrap();
        assert_eq!(cfg.sweep.deltas, vec![0.1, 0.05]);
        assert!(parse_config_with("", &["solver.bogus=1".to_string()]).is_err());
        assert!(parse_config_with("", &["nodot=1".to_string()]).is_err());
    }
}
