// End-to-end checks of the installed binary: flag surface, env fallback,
// config precedence, exit codes, and cross-process reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn memlife() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_memlife"));
    cmd.env_remove("MEMLIFE_OUT");
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn memlife");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

fn csv_field<'a>(csv: &'a str, row_prefix: &str, idx: usize) -> &'a str {
    let row = csv
        .lines()
        .find(|l| l.starts_with(row_prefix))
        .unwrap_or_else(|| panic!("no row starting with {row_prefix:?} in:\n{csv}"));
    row.split(',').nth(idx).unwrap_or_else(|| panic!("row too short: {row}"))
}

#[test]
fn run_writes_csv_and_tables() {
    let dir = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["run", "--regime", "gate_strength", "--episodes", "5"])
        .args(["--out", dir.path().to_str().unwrap()]));

    let csv = read(dir.path(), "results_gate_strength.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "regime,policy,seed_count,prem,supp,behav,false_prem"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4, "one row per policy");
    for row in &rows {
        assert!(row.starts_with("gate_strength,"));
        assert_eq!(row.split(',').nth(2), Some("5"), "seed_count column: {row}");
    }

    let tables = read(dir.path(), "tables.md");
    assert!(tables.contains("gate_strength"));
}

#[test]
fn out_flag_beats_env_and_env_beats_default() {
    let env_dir = TempDir::new().unwrap();
    let flag_dir = TempDir::new().unwrap();

    // No --out: MEMLIFE_OUT decides.
    run_ok(memlife()
        .args(["run", "--regime", "gate_strength", "--episodes", "3"])
        .env("MEMLIFE_OUT", env_dir.path()));
    assert!(env_dir.path().join("results_gate_strength.csv").exists());

    // --out present: env var is ignored.
    run_ok(memlife()
        .args(["run", "--regime", "quadrant", "--episodes", "3"])
        .args(["--out", flag_dir.path().to_str().unwrap()])
        .env("MEMLIFE_OUT", env_dir.path()));
    assert!(flag_dir.path().join("results_quadrant.csv").exists());
    assert!(!env_dir.path().join("results_quadrant.csv").exists());
}

#[test]
fn reruns_are_byte_identical_across_processes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        run_ok(memlife()
            .args(["run", "--regime", "gate_strength,implicit_heuristic"])
            .args(["--out", dir.path().to_str().unwrap()]));
    }
    for name in ["results_gate_strength.csv", "results_implicit_heuristic.csv"] {
        let left = fs::read(a.path().join(name)).unwrap();
        let right = fs::read(b.path().join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
}

#[test]
fn set_flag_overrides_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "policy.front_door.tau=0.95\n").unwrap();

    // imp_ret sits in column 4 of the heavy header.
    let out_a = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["run", "--regime", "heavy", "--episodes", "10"])
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--out", out_a.path().to_str().unwrap()]));
    let csv = read(out_a.path(), "results_heavy.csv");
    assert_eq!(csv_field(&csv, "heavy,front_door,", 4), "1.0000");

    let out_b = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["run", "--regime", "heavy", "--episodes", "10"])
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--set", "policy.front_door.tau=0.45"])
        .args(["--out", out_b.path().to_str().unwrap()]));
    let csv = read(out_b.path(), "results_heavy.csv");
    assert_eq!(csv_field(&csv, "heavy,front_door,", 4), "0.0000");
}

#[test]
fn sweep_grid_restricts_the_threshold_range() {
    let full = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["sweep", "front_door", "--episodes", "10"])
        .args(["--out", full.path().to_str().unwrap()]));
    let full_csv = read(full.path(), "sweep_front_door.csv");
    assert!(full_csv.starts_with("tau,imp_ret,final_load\n"));

    // The grid endpoints match the default grid, so the output is identical.
    let same = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["sweep", "front_door", "--grid", "0.45:0.95", "--episodes", "10"])
        .args(["--out", same.path().to_str().unwrap()]));
    assert_eq!(full_csv, read(same.path(), "sweep_front_door.csv"));

    let narrow = TempDir::new().unwrap();
    run_ok(memlife()
        .args(["sweep", "front_door", "--grid", "0.80:0.90", "--episodes", "10"])
        .args(["--out", narrow.path().to_str().unwrap()]));
    let narrow_csv = read(narrow.path(), "sweep_front_door.csv");
    let taus: Vec<&str> = narrow_csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(taus, ["0.80", "0.82", "0.84", "0.85", "0.88", "0.90"]);

    let out = memlife()
        .args(["sweep", "front_door", "--grid", "backwards"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_with_code_two() {
    let out = memlife()
        .args(["run", "--regime", "gate_strength", "--set", "bogus.key=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config error"), "stderr: {stderr}");

    let out = memlife()
        .args(["run", "--regime", "gate_strength", "--set", "dynamics.alpha=fast"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("broken.cfg");
    fs::write(&cfg, "no equals sign here\n").unwrap();
    let out = memlife()
        .args(["run", "--regime", "gate_strength", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_defaults_and_flags_drift() {
    let out = memlife().arg("check").output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );

    let out = memlife()
        .args(["check", "--set", "run.episodes=3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "drifted config must fail the check");
}

#[test]
fn dump_trace_emits_line_records() {
    let out = run_ok(memlife().args([
        "dump-trace",
        "--regime",
        "gate_strength",
        "--policy",
        "stagemem",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().filter(|l| !l.is_empty()).collect();
    assert!(!lines.is_empty(), "trace should not be empty");
    for line in &lines {
        assert!(line.starts_with("step="), "bad record: {line}");
        for key in ["item=", "action=", "c=", "m="] {
            assert!(line.contains(key), "missing {key} in: {line}");
        }
    }
}

#[test]
fn list_names_every_regime_and_policy() {
    let out = run_ok(memlife().arg("list"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "regimes:",
        "policies:",
        "premise_realization",
        "heavy_very_tight",
        "sensitivity_fixed_0.30",
        "stagemem",
        "front_door",
        "single_layer",
    ] {
        assert!(stdout.contains(needle), "list output missing {needle}");
    }
}
