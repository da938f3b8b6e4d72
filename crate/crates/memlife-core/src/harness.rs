//! Matrix runner: regimes x policies x episodes, aggregated into tables.
//!
//! Streams are regenerated from scratch for every policy in a cell and the
//! serialized bytes are hashed; a hash mismatch aborts the run because it
//! means the generator leaked policy-dependent state.

use crate::config::RunSettings;
use crate::metrics::{aggregate, episode_values, fmt4};
use crate::policy::{run_episode, POLICY_NAMES};
use crate::rng::fnv1a;
use crate::scenarios::{dynamics_for_regime, generate, regime, regime_names, RegimeSpec};
use crate::types::ScenarioStream;

#[derive(Debug, Clone)]
pub struct PolicyRow {
    pub policy: String,
    pub episodes: u32,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct RegimeTable {
    pub regime: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<PolicyRow>,
}

pub fn stream_hash(stream: &ScenarioStream) -> u64 {
    let bytes = serde_json::to_vec(&(&stream.caps, &stream.events))
        .expect("stream serialization cannot fail");
    fnv1a(&bytes)
}

fn validate_policies(names: &[String]) -> Result<(), String> {
    for n in names {
        if !POLICY_NAMES.contains(&n.as_str()) {
            return Err(format!("unknown policy '{n}'"));
        }
    }
    Ok(())
}

fn episode_stream(
    spec: &RegimeSpec,
    episode: u64,
    settings: &RunSettings,
) -> ScenarioStream {
    let mut stream = generate(spec.name, episode, settings.seed)
        .expect("registered regime must generate");
    if let Some(caps) = settings.caps_override {
        stream.caps = caps;
    }
    stream
}

/// Run one regime over its policy list (or an explicit override) and return
/// the aggregated table.
pub fn run_regime(
    name: &str,
    settings: &RunSettings,
) -> Result<RegimeTable, String> {
    let spec = regime(name).ok_or_else(|| format!("unknown regime '{name}'"))?;
    let dynamics = dynamics_for_regime(name, settings.dynamics);
    let policies: Vec<String> = if settings.policies.is_empty() {
        spec.policies.iter().map(|s| s.to_string()).collect()
    } else {
        validate_policies(&settings.policies)?;
        settings.policies.clone()
    };
    let episodes = settings.episodes;
    let mut per_policy: Vec<Vec<Vec<Option<f64>>>> = vec![Vec::new(); policies.len()];
    for episode in 0..episodes as u64 {
        let mut cell_hash: Option<u64> = None;
        for (pi, policy) in policies.iter().enumerate() {
            let stream = episode_stream(&spec, episode, settings);
            let h = stream_hash(&stream);
            match cell_hash {
                None => cell_hash = Some(h),
                Some(expect) => {
                    if h != expect {
                        return Err(format!(
                            "stream hash diverged in {name} episode {episode} for {policy}"
                        ));
                    }
                }
            }
            let out = run_episode(policy, &stream, dynamics, &settings.params, false)?;
            per_policy[pi].push(episode_values(&spec, &stream, &out));
        }
    }
    let rows = policies
        .into_iter()
        .zip(per_policy)
        .map(|(policy, rows)| PolicyRow {
            policy,
            episodes,
            values: aggregate(&rows),
        })
        .collect();
    Ok(RegimeTable {
        regime: name.to_string(),
        columns: spec.metrics.to_vec(),
        rows,
    })
}

/// Run a list of regimes, or every registered regime when the list is empty.
pub fn run_matrix(settings: &RunSettings) -> Result<Vec<RegimeTable>, String> {
    let names: Vec<String> = if settings.regimes.is_empty() {
        regime_names().iter().map(|s| s.to_string()).collect()
    } else {
        for n in &settings.regimes {
            if regime(n).is_none() {
                return Err(format!("unknown regime '{n}'"));
            }
        }
        settings.regimes.clone()
    };
    names.iter().map(|n| run_regime(n, settings)).collect()
}

pub fn csv_table(t: &RegimeTable) -> String {
    let mut s = String::from("regime,policy,seed_count");
    for c in &t.columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for row in &t.rows {
        s.push_str(&format!("{},{},{}", t.regime, row.policy, row.episodes));
        for v in &row.values {
            s.push(',');
            s.push_str(&fmt4(*v));
        }
        s.push('\n');
    }
    s
}

pub fn markdown_table(t: &RegimeTable) -> String {
    let mut s = format!("## {}\n\n| policy |", t.regime);
    for c in &t.columns {
        s.push_str(&format!(" {c} |"));
    }
    s.push_str("\n|---|");
    for _ in &t.columns {
        s.push_str("---|");
    }
    s.push('\n');
    for row in &t.rows {
        s.push_str(&format!("| {} |", row.policy));
        for v in &row.values {
            let cell = if v.is_some() { fmt4(*v) } else { "-".to_string() };
            s.push_str(&format!(" {cell} |"));
        }
        s.push('\n');
    }
    s.push('\n');
    s
}

/// Admission-gate threshold grid for the novelty-gate sweep.
pub const FRONT_DOOR_TAUS: [f64; 13] = [
    0.45, 0.55, 0.65, 0.72, 0.75, 0.78, 0.80, 0.82, 0.84, 0.85, 0.88, 0.90, 0.95,
];

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub tau: f64,
    pub imp_ret: f64,
    pub final_load: f64,
}

/// Sweep the novelty-gate threshold over the heavy workload at the default
/// capacity and report retention of the late-important item against final
/// occupancy.
pub fn sweep_front_door(settings: &RunSettings) -> Result<Vec<SweepRow>, String> {
    let mut rows = Vec::new();
    for tau in FRONT_DOOR_TAUS {
        let mut s = settings.clone();
        s.policies = vec!["front_door".to_string()];
        s.params.set("front_door", "tau", tau)?;
        let table = run_regime("heavy", &s)?;
        let row = &table.rows[0];
        let col = |name: &str| -> f64 {
            table
                .columns
                .iter()
                .position(|c| *c == name)
                .and_then(|i| row.values[i])
                .unwrap_or(f64::NAN)
        };
        rows.push(SweepRow {
            tau,
            imp_ret: col("imp_ret"),
            final_load: col("final_load"),
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("tau,imp_ret,final_load\n");
    for r in rows {
        s.push_str(&format!(
            "{:.2},{},{}\n",
            r.tau,
            fmt4(Some(r.imp_ret)),
            fmt4(Some(r.final_load))
        ));
    }
    s
}

/// Distinct (final_load, imp_ret) operating points of a sweep, in load order.
pub fn sweep_points(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        let p = (r.final_load, r.imp_ret);
        if !pts
            .iter()
            .any(|q| (q.0 - p.0).abs() < 1e-9 && (q.1 - p.1).abs() < 1e-9)
        {
            pts.push(p);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

pub fn points_csv(pts: &[(f64, f64)]) -> String {
    let mut s = String::from("final_load,imp_ret\n");
    for (load, ret) in pts {
        s.push_str(&format!("{},{}\n", fmt4(Some(*load)), fmt4(Some(*ret))));
    }
    s
}

/// Single-episode run with tracing on; returns the line-delimited records.
pub fn dump_trace(
    regime_name: &str,
    policy: &str,
    episode: u64,
    settings: &RunSettings,
) -> Result<String, String> {
    let spec = regime(regime_name).ok_or_else(|| format!("unknown regime '{regime_name}'"))?;
    if !POLICY_NAMES.contains(&policy) {
        return Err(format!("unknown policy '{policy}'"));
    }
    let dynamics = dynamics_for_regime(regime_name, settings.dynamics);
    let stream = episode_stream(&spec, episode, settings);
    let out = run_episode(policy, &stream, dynamics, &settings.params, true)?;
    let mut s = String::new();
    for rec in &out.trace.records {
        s.push_str(&rec.to_string());
        s.push('\n');
    }
    Ok(s)
}

/// Cell-by-cell CSV comparison. Numeric cells match within 5e-5 (half a unit
/// in the fourth decimal); everything else must match exactly. Returns a
/// human-readable diff list, empty when the tables agree.
pub fn compare_csv(name: &str, expected: &str, actual: &str) -> Vec<String> {
    let mut diffs = Vec::new();
    let e_lines: Vec<&str> = expected.lines().collect();
    let a_lines: Vec<&str> = actual.lines().collect();
    if e_lines.len() != a_lines.len() {
        diffs.push(format!(
            "{name}: expected {} lines, got {}",
            e_lines.len(),
            a_lines.len()
        ));
    }
    for (i, (el, al)) in e_lines.iter().zip(a_lines.iter()).enumerate() {
        if el == al {
            continue;
        }
        let ec: Vec<&str> = el.split(',').collect();
        let ac: Vec<&str> = al.split(',').collect();
        if ec.len() != ac.len() {
            diffs.push(format!("{name} line {}: '{el}' vs '{al}'", i + 1));
            continue;
        }
        for (j, (e, a)) in ec.iter().zip(ac.iter()).enumerate() {
            if e == a {
                continue;
            }
            let close = match (e.parse::<f64>(), a.parse::<f64>()) {
                (Ok(x), Ok(y)) => (x - y).abs() <= 5e-5,
                _ => false,
            };
            if !close {
                diffs.push(format!(
                    "{name} line {} col {}: expected '{e}', got '{a}'",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    diffs
}
