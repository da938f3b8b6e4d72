//! memlife: run the memory-lifecycle diagnostic matrix from the command line.

use clap::{Parser, Subcommand};
use memlife_core::config::{ConfigError, RunSettings};
use memlife_core::harness::{
    compare_csv, csv_table, dump_trace, markdown_table, points_csv, run_matrix, sweep_csv,
    sweep_front_door, sweep_points,
};
use memlife_core::policy::POLICY_NAMES;
use memlife_core::scenarios::{regime, regime_names};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod golden;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "memlife", version, about = "Staged memory-lifecycle diagnostics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Default)]
struct ConfigArgs {
    /// key=value config file; later lines win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline override, e.g. --set dynamics.alpha=2.5 (repeatable; wins over
    /// the config file).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Episode count override.
    #[arg(long)]
    episodes: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run regimes and write one result CSV per regime.
    Run {
        /// Comma-separated regime names, or "all".
        #[arg(long)]
        regime: Option<String>,
        /// Comma-separated policy names; default is each regime's own list.
        #[arg(long)]
        policy: Option<String>,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory (falls back to MEMLIFE_OUT, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweeps; currently `front_door` (novelty-gate threshold).
    Sweep {
        target: String,
        /// Restrict the threshold grid to lo:hi (default: full grid).
        #[arg(long, value_name = "LO:HI")]
        grid: Option<String>,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the default matrix and compare against the committed tables.
    Check {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Print the event-by-event trace of one policy on one episode.
    DumpTrace {
        #[arg(long)]
        regime: String,
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0)]
        episode: u64,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// List registered regimes and policies.
    List,
}

fn build_settings(cfg: &ConfigArgs) -> Result<RunSettings, ConfigError> {
    let mut s = RunSettings::default();
    if let Some(path) = &cfg.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::BadLine(format!("{}: {e}", path.display())))?;
        s.apply_file_text(&text)?;
    }
    for pair in &cfg.set {
        s.apply_pair(pair)?;
    }
    if let Some(seed) = cfg.seed {
        s.seed = seed;
    }
    if let Some(episodes) = cfg.episodes {
        s.episodes = episodes;
    }
    Ok(s)
}

fn split_names(arg: &Option<String>) -> Vec<String> {
    match arg.as_deref() {
        None | Some("all") => Vec::new(),
        Some(s) => s
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect(),
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("MEMLIFE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| format!("write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn config_fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {err}");
    ExitCode::from(EXIT_CONFIG_ERROR)
}

fn run_fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(EXIT_CHECK_FAILED)
}

fn cmd_run(
    regime_arg: Option<String>,
    policy_arg: Option<String>,
    cfg: ConfigArgs,
    out: Option<PathBuf>,
) -> ExitCode {
    let mut settings = match build_settings(&cfg) {
        Ok(s) => s,
        Err(e) => return config_fail(e),
    };
    let regimes = split_names(&regime_arg);
    if !regimes.is_empty() {
        settings.regimes = regimes;
    }
    let policies = split_names(&policy_arg);
    if !policies.is_empty() {
        settings.policies = policies;
    }
    for r in &settings.regimes {
        if regime(r).is_none() {
            return config_fail(format!("unknown regime '{r}'"));
        }
    }
    for p in &settings.policies {
        if !POLICY_NAMES.contains(&p.as_str()) {
            return config_fail(format!("unknown policy '{p}'"));
        }
    }
    let tables = match run_matrix(&settings) {
        Ok(t) => t,
        Err(e) => return run_fail(e),
    };
    let dir = out_dir(out);
    let mut md = String::new();
    for t in &tables {
        if let Err(e) = write_file(&dir, &format!("results_{}.csv", t.regime), &csv_table(t)) {
            return run_fail(e);
        }
        md.push_str(&markdown_table(t));
    }
    if let Err(e) = write_file(&dir, "tables.md", &md) {
        return run_fail(e);
    }
    ExitCode::SUCCESS
}

fn parse_grid(arg: &str) -> Result<(f64, f64), String> {
    let bad = || format!("bad --grid '{arg}', expected LO:HI like 0.45:0.95");
    let (lo, hi) = arg.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_sweep(
    target: String,
    grid: Option<String>,
    cfg: ConfigArgs,
    out: Option<PathBuf>,
) -> ExitCode {
    if target != "front_door" {
        return config_fail(format!("unknown sweep target '{target}'"));
    }
    let bounds = match grid.as_deref().map(parse_grid).transpose() {
        Ok(b) => b,
        Err(e) => return config_fail(e),
    };
    let settings = match build_settings(&cfg) {
        Ok(s) => s,
        Err(e) => return config_fail(e),
    };
    let mut rows = match sweep_front_door(&settings) {
        Ok(r) => r,
        Err(e) => return run_fail(e),
    };
    if let Some((lo, hi)) = bounds {
        rows.retain(|r| r.tau >= lo - 1e-9 && r.tau <= hi + 1e-9);
        if rows.is_empty() {
            return config_fail(format!("--grid {lo}:{hi} covers no grid points"));
        }
    }
    let dir = out_dir(out);
    if let Err(e) = write_file(&dir, "sweep_front_door.csv", &sweep_csv(&rows)) {
        return run_fail(e);
    }
    let pts = sweep_points(&rows);
    if let Err(e) = write_file(&dir, "sweep_front_door_points.csv", &points_csv(&pts)) {
        return run_fail(e);
    }
    ExitCode::SUCCESS
}

fn cmd_check(cfg: ConfigArgs) -> ExitCode {
    let settings = match build_settings(&cfg) {
        Ok(s) => s,
        Err(e) => return config_fail(e),
    };
    let mut diffs = Vec::new();
    for (name, expected) in golden::REGIME_TABLES {
        let mut s = settings.clone();
        s.regimes = vec![name.to_string()];
        match run_matrix(&s) {
            Ok(tables) => {
                let actual = csv_table(&tables[0]);
                diffs.extend(compare_csv(name, expected, &actual));
            }
            Err(e) => return run_fail(e),
        }
    }
    match sweep_front_door(&settings) {
        Ok(rows) => {
            diffs.extend(compare_csv(
                "sweep_front_door",
                golden::SWEEP_TABLE,
                &sweep_csv(&rows),
            ));
            diffs.extend(compare_csv(
                "sweep_front_door_points",
                golden::SWEEP_POINTS,
                &points_csv(&sweep_points(&rows)),
            ));
        }
        Err(e) => return run_fail(e),
    }
    if diffs.is_empty() {
        println!(
            "check ok: {} tables match the committed results",
            golden::REGIME_TABLES.len() + 2
        );
        ExitCode::SUCCESS
    } else {
        for d in &diffs {
            eprintln!("check: {d}");
        }
        eprintln!("check failed with {} difference(s)", diffs.len());
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn cmd_dump_trace(regime_name: String, policy: String, episode: u64, cfg: ConfigArgs) -> ExitCode {
    let settings = match build_settings(&cfg) {
        Ok(s) => s,
        Err(e) => return config_fail(e),
    };
    if regime(&regime_name).is_none() {
        return config_fail(format!("unknown regime '{regime_name}'"));
    }
    if !POLICY_NAMES.contains(&policy.as_str()) {
        return config_fail(format!("unknown policy '{policy}'"));
    }
    match dump_trace(&regime_name, &policy, episode, &settings) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => run_fail(e),
    }
}

fn cmd_list() -> ExitCode {
    println!("regimes:");
    for r in regime_names() {
        let spec = regime(r).unwrap();
        println!("  {r} (policies: {})", spec.policies.join(", "));
    }
    println!("policies:");
    for p in POLICY_NAMES {
        println!("  {p}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { regime, policy, cfg, out } => cmd_run(regime, policy, cfg, out),
        Cmd::Sweep { target, grid, cfg, out } => cmd_sweep(target, grid, cfg, out),
        Cmd::Check { cfg } => cmd_check(cfg),
        Cmd::DumpTrace { regime, policy, episode, cfg } => {
            cmd_dump_trace(regime, policy, episode, cfg)
        }
        Cmd::List => cmd_list(),
    }
}
