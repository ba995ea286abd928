use std::fs;
use std::path::Path;
use std::process::Command;

use rootflow::cli::config::{parse_config, RunConfig};
use rootflow::cli::output::{read_snapshot_csv, write_snapshot_csv, DIAGNOSTICS_HEADER};
use rootflow::cli::{execute, Command as Cmd, RunSpec};
use rootflow::solver::{solve, SolverConfig};
use rootflow::{PeriodicGrid, RealField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rootflow"))
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn snapshot_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = PeriodicGrid::new(32).unwrap();
    let u0 = RealField::from_fn(&g, |x| 1.0 + 0.2 * x.sin());
    let cfg = SolverConfig {
        t_end: 0.2,
        snapshot_times: vec![0.05, 0.1],
        ..Default::default()
    };
    let traj = solve(&u0, &cfg).unwrap();
    let a = dir.path().join("a.csv");
    write_snapshot_csv(&traj, &a).unwrap();
    let snaps = read_snapshot_csv(&a).unwrap();
    assert_eq!(snaps, traj.snapshots);
    let mut again = traj.clone();
    again.snapshots = snaps;
    let b = dir.path().join("b.csv");
    write_snapshot_csv(&again, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(read(&a).starts_with("# n=32 times=0,0.05,0.1,0.2\n"));
}

#[test]
fn execute_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = RunSpec {
        command: Cmd::Solve,
        config_path: None,
        output_dir: dir.path().to_path_buf(),
        overrides: vec!["grid.n=32".into(), "solver.t_end=0.2".into()],
        seed: None,
    };
    let summary = execute(&spec).unwrap();
    assert!(summary.passed(), "{}", summary.render());
    for f in ["resolved.cfg", "snapshots.csv", "diagnostics.csv", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let diag = read(&dir.path().join("diagnostics.csv"));
    assert_eq!(diag.lines().next(), Some(DIAGNOSTICS_HEADER));
    let resolved = parse_config(&read(&dir.path().join("resolved.cfg"))).unwrap();
    assert_eq!(resolved.n, 32);
    assert_eq!(resolved.solver.t_end, 0.2);
    let summary_text = read(&dir.path().join("summary.txt"));
    assert_eq!(summary_text.matches("energy.bound_ratio =").count(), 1);
}

#[test]
fn file_then_override_then_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "[solver]\ndelta = 0.5\nseed = 4\n\n[initial]\nkind = \"rough\"\n").unwrap();
    let spec = RunSpec {
        command: Cmd::Solve,
        config_path: Some(cfg_path),
        output_dir: dir.path().join("out"),
        overrides: vec!["solver.delta=1e-3".into(), "solver.seed=5".into()],
        seed: Some(9),
    };
    let cfg: RunConfig = spec.load_config().unwrap();
    assert_eq!(cfg.solver.delta, 1e-3);
    assert_eq!(cfg.solver.seed, 9);
}

#[test]
fn cli_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["solve", "--out"])
            .arg(&out)
            .args(["--set", "grid.n=64", "--set", "initial.kind=rough", "--set", "solver.t_end=0.1"])
            .args(["--seed", seed])
            .status()
            .unwrap();
        assert!(status.success());
        out
    };
    let a = run("a", "11");
    let b = run("b", "11");
    for f in ["diagnostics.csv", "snapshots.csv", "resolved.cfg", "summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // Re-running from the emitted resolved.cfg alone reproduces the data.
    let c = dir.path().join("c");
    let status = bin()
        .args(["solve", "--out"])
        .arg(&c)
        .arg("--config")
        .arg(a.join("resolved.cfg"))
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read(a.join("diagnostics.csv")).unwrap(), fs::read(c.join("diagnostics.csv")).unwrap());

    let d = run("d", "12");
    assert_ne!(fs::read(a.join("snapshots.csv")).unwrap(), fs::read(d.join("snapshots.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["solve", "--out"])
        .arg(dir.path().join("bad"))
        .args(["--set", "solver.delta=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.delta"));

    let out = bin()
        .args(["solve", "--out"])
        .arg(dir.path().join("unknown"))
        .args(["--set", "solver.speed=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // A bound of zero growth cannot be met, so the stability category fails.
    let out = bin()
        .args(["stability", "--out"])
        .arg(dir.path().join("stab"))
        .args(["--set", "grid.n=32", "--set", "solver.t_end=0.1", "--set", "stability.growth_bound=0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(16));
    let summary = read(&dir.path().join("stab/summary.txt"));
    assert!(summary.contains("FAIL growth_factor"));
    assert!(summary.contains("(threshold < 0.5)"));

    let out = bin()
        .args(["check-operators", "--out"])
        .arg(dir.path().join("ops"))
        .args(["--set", "operators.fields=3", "--set", "operators.form_fields=3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn sweep_writes_one_directory_per_member() {
    let dir = tempfile::tempdir().unwrap();
    let spec = RunSpec {
        command: Cmd::SweepDelta,
        config_path: None,
        output_dir: dir.path().to_path_buf(),
        overrides: vec![
            "grid.n=32".into(),
            "solver.t_end=0.2".into(),
            "sweep.deltas=[4e-2, 2e-2, 1e-2]".into(),
        ],
        seed: None,
    };
    let summary = execute(&spec).unwrap();
    for i in 0..3 {
        assert!(dir.path().join(format!("member_{i}/snapshots.csv")).exists());
    }
    let rows = read(&dir.path().join("continuation.csv"));
    assert_eq!(rows.lines().count(), 3);
    assert!(summary.checks.iter().any(|c| c.name.ends_with("distance_decreasing")));
}
