//! Shared helpers for the integration suites: an independent settlement
//! model, an independent metric recomputation, and table lookups.
//!
//! The model and the recomputation are deliberately written from the rule
//! statements rather than by calling into the engine, so that the parity
//! suites compare two implementations instead of one implementation with
//! itself. Admission-time scalar initialization reuses `Dynamics` because the
//! update arithmetic has its own oracle suite; everything after admission is
//! reimplemented here.

// Each integration test binary uses its own subset of these helpers.
#![allow(dead_code)]

use memlife_core::dynamics::Dynamics;
use memlife_core::harness::RegimeTable;
use memlife_core::policy::Outcome;
use memlife_core::scenarios::RegimeSpec;
use memlife_core::staged::StagedStore;
use memlife_core::types::{
    CapacityConfig, CueFeatures, Event, ItemId, ItemSpec, Labels, ScenarioStream, Stage,
};
use std::collections::{BTreeMap, BTreeSet};

pub const SUMMARY_BASE: ItemId = 10_000;

// ---------------------------------------------------------------------------
// Table lookups

pub fn table<'a>(tables: &'a [RegimeTable], regime: &str) -> &'a RegimeTable {
    tables
        .iter()
        .find(|t| t.regime == regime)
        .unwrap_or_else(|| panic!("regime '{regime}' missing from matrix"))
}

pub fn try_cell(
    tables: &[RegimeTable],
    regime: &str,
    policy: &str,
    col: &str,
) -> Option<f64> {
    let t = table(tables, regime);
    let ci = t
        .columns
        .iter()
        .position(|c| *c == col)
        .unwrap_or_else(|| panic!("column '{col}' missing from {regime}"));
    let row = t
        .rows
        .iter()
        .find(|r| r.policy == policy)
        .unwrap_or_else(|| panic!("policy '{policy}' missing from {regime}"));
    row.values[ci]
}

pub fn cell(tables: &[RegimeTable], regime: &str, policy: &str, col: &str) -> f64 {
    try_cell(tables, regime, policy, col)
        .unwrap_or_else(|| panic!("{regime}/{policy}/{col} is absent"))
}

// ---------------------------------------------------------------------------
// Independent settlement model
//
// Rules restated: admissions land in transient; when a stage cap is exceeded,
// gate-passing items are promoted upward (id order), durable sheds the least
// recently touched while over cap, working compresses its excess-plus-one
// lowest-ranked units into one summary, and transient evicts the lowest
// confidence*strength unit one at a time. Pressure ticks evict the least
// recently touched working unit that fails durable-grade validity, only when
// working holds at least two units.

#[derive(Debug, Clone)]
pub struct ModelRec {
    pub id: ItemId,
    pub c: f64,
    pub m: f64,
    pub stage: Stage,
    pub last_touched: u32,
    /// Empty for atoms; member id -> strength at compression for summaries.
    pub member_m: BTreeMap<ItemId, f64>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ModelCounters {
    pub admissions: u64,
    pub promotions: u64,
    pub compressions: u64,
    pub evictions: u64,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub caps: CapacityConfig,
    pub recs: Vec<ModelRec>,
    pub counters: ModelCounters,
    next_summary: ItemId,
}

const TAU_C_WORKING: f64 = 0.50;
const TAU_R_WORKING: f64 = 0.08;
const TAU_C_DURABLE: f64 = 0.905;
const TAU_R_DURABLE: f64 = 0.20;

impl Model {
    pub fn new(caps: CapacityConfig) -> Self {
        Model {
            caps,
            recs: Vec::new(),
            counters: ModelCounters::default(),
            next_summary: SUMMARY_BASE,
        }
    }

    fn count(&self, stage: Stage) -> usize {
        self.recs.iter().filter(|r| r.stage == stage).count()
    }

    fn cap(&self, stage: Stage) -> usize {
        match stage {
            Stage::Transient => self.caps.transient_cap,
            Stage::Working => self.caps.working_cap,
            Stage::Durable => self.caps.durable_cap,
        }
    }

    pub fn admit(&mut self, id: ItemId, c: f64, m: f64, step: u32) {
        self.recs.push(ModelRec {
            id,
            c,
            m,
            stage: Stage::Transient,
            last_touched: step,
            member_m: BTreeMap::new(),
        });
        self.counters.admissions += 1;
        if self.count(Stage::Transient) > self.cap(Stage::Transient) {
            self.settle(step);
        }
    }

    fn promote(&mut self, from: Stage, to: Stage) {
        let mut ids: Vec<ItemId> = self
            .recs
            .iter()
            .filter(|r| {
                r.stage == from
                    && match to {
                        Stage::Working => r.c >= TAU_C_WORKING && r.m >= TAU_R_WORKING,
                        Stage::Durable => r.c >= TAU_C_DURABLE && r.m >= TAU_R_DURABLE,
                        Stage::Transient => false,
                    }
            })
            .map(|r| r.id)
            .collect();
        ids.sort_unstable();
        for id in ids {
            let r = self.recs.iter_mut().find(|r| r.id == id).unwrap();
            r.stage = to;
            self.counters.promotions += 1;
        }
    }

    fn settle(&mut self, step: u32) {
        self.promote(Stage::Transient, Stage::Working);
        if self.count(Stage::Working) > self.cap(Stage::Working) {
            self.promote(Stage::Working, Stage::Durable);
            while self.count(Stage::Durable) > self.cap(Stage::Durable) {
                let victim = self
                    .recs
                    .iter()
                    .filter(|r| r.stage == Stage::Durable)
                    .min_by_key(|r| (r.last_touched, r.id))
                    .map(|r| r.id)
                    .unwrap();
                self.recs.retain(|r| r.id != victim);
                self.counters.evictions += 1;
            }
            while self.count(Stage::Working) > self.cap(Stage::Working) {
                self.compress(step);
            }
        }
        while self.count(Stage::Transient) > self.cap(Stage::Transient) {
            let victim = self
                .recs
                .iter()
                .filter(|r| r.stage == Stage::Transient)
                .min_by(|a, b| {
                    (a.c * a.m, a.id)
                        .partial_cmp(&(b.c * b.m, b.id))
                        .unwrap()
                })
                .map(|r| r.id)
                .unwrap();
            self.recs.retain(|r| r.id != victim);
            self.counters.evictions += 1;
        }
    }

    fn compress(&mut self, step: u32) {
        let count = self.count(Stage::Working);
        let excess = count - self.cap(Stage::Working);
        let group_size = (excess + 1).min(count);
        let mut ids: Vec<ItemId> = self
            .recs
            .iter()
            .filter(|r| r.stage == Stage::Working)
            .map(|r| r.id)
            .collect();
        ids.sort_by(|&a, &b| {
            let ra = self.recs.iter().find(|r| r.id == a).unwrap();
            let rb = self.recs.iter().find(|r| r.id == b).unwrap();
            (ra.c * ra.m, a).partial_cmp(&(rb.c * rb.m, b)).unwrap()
        });
        let group_ids: BTreeSet<ItemId> = ids.into_iter().take(group_size).collect();
        let group: Vec<ModelRec> = self
            .recs
            .iter()
            .filter(|r| group_ids.contains(&r.id))
            .cloned()
            .collect();
        self.recs.retain(|r| !group_ids.contains(&r.id));
        let n = group.len() as f64;
        let c = group.iter().map(|r| r.c).sum::<f64>() / n;
        let m = group.iter().map(|r| r.m).fold(f64::NEG_INFINITY, f64::max);
        let mut member_m = BTreeMap::new();
        for r in &group {
            if r.member_m.is_empty() {
                member_m.insert(r.id, r.m);
            } else {
                member_m.extend(r.member_m.iter().map(|(k, v)| (*k, *v)));
            }
        }
        let id = self.next_summary;
        self.next_summary += 1;
        self.recs.push(ModelRec {
            id,
            c,
            m,
            stage: Stage::Working,
            last_touched: step,
            member_m,
        });
        self.counters.compressions += 1;
    }

    pub fn tick(&mut self) {
        let working: Vec<&ModelRec> = self
            .recs
            .iter()
            .filter(|r| r.stage == Stage::Working)
            .collect();
        if working.len() < 2 {
            return;
        }
        let victim = working
            .into_iter()
            .filter(|r| r.c < TAU_C_DURABLE)
            .min_by_key(|r| (r.last_touched, r.id))
            .map(|r| r.id);
        if let Some(id) = victim {
            self.recs.retain(|r| r.id != id);
            self.counters.evictions += 1;
        }
    }
}

/// Structural comparison of a staged store against the model. Returns a list
/// of differences, empty on parity.
pub fn diff_store_model(store: &StagedStore, model: &Model) -> Vec<String> {
    let mut diffs = Vec::new();
    let c = &store.counters;
    let mc = &model.counters;
    if (c.admissions, c.promotions, c.compressions, c.evictions)
        != (mc.admissions, mc.promotions, mc.compressions, mc.evictions)
    {
        diffs.push(format!(
            "counters adm/prom/comp/evict engine {:?} model {:?}",
            (c.admissions, c.promotions, c.compressions, c.evictions),
            (mc.admissions, mc.promotions, mc.compressions, mc.evictions)
        ));
    }
    let mut engine: BTreeMap<ItemId, (&'static str, f64, f64, BTreeMap<ItemId, f64>)> =
        BTreeMap::new();
    for r in &store.recs {
        let members = r
            .members
            .iter()
            .map(|m| (m.id, m.m_at_compress))
            .collect();
        engine.insert(r.id, (r.stage.name(), r.c, r.m, members));
    }
    let mut modeled: BTreeMap<ItemId, (&'static str, f64, f64, BTreeMap<ItemId, f64>)> =
        BTreeMap::new();
    for r in &model.recs {
        modeled.insert(r.id, (r.stage.name(), r.c, r.m, r.member_m.clone()));
    }
    let e_ids: BTreeSet<ItemId> = engine.keys().cloned().collect();
    let m_ids: BTreeSet<ItemId> = modeled.keys().cloned().collect();
    if e_ids != m_ids {
        diffs.push(format!("live ids engine {e_ids:?} model {m_ids:?}"));
        return diffs;
    }
    for (id, (es, ec, em, emem)) in &engine {
        let (ms, mc_, mm, mmem) = &modeled[id];
        if es != ms {
            diffs.push(format!("{id}: stage engine {es} model {ms}"));
        }
        if (ec - mc_).abs() > 1e-9 || (em - mm).abs() > 1e-9 {
            diffs.push(format!(
                "{id}: state engine ({ec:.12},{em:.12}) model ({mc_:.12},{mm:.12})"
            ));
        }
        if emem.keys().collect::<Vec<_>>() != mmem.keys().collect::<Vec<_>>() {
            diffs.push(format!(
                "{id}: members engine {:?} model {:?}",
                emem.keys().collect::<Vec<_>>(),
                mmem.keys().collect::<Vec<_>>()
            ));
        } else {
            for (mid, v) in emem {
                if (v - mmem[mid]).abs() > 1e-9 {
                    diffs.push(format!("{id}: member {mid} strength {v} vs {}", mmem[mid]));
                }
            }
        }
    }
    for stage in [Stage::Transient, Stage::Working, Stage::Durable] {
        let n = store.recs.iter().filter(|r| r.stage == stage).count();
        let cap = match stage {
            Stage::Transient => store.caps.transient_cap,
            Stage::Working => store.caps.working_cap,
            Stage::Durable => store.caps.durable_cap,
        };
        if n > cap {
            diffs.push(format!("{} over cap: {n} > {cap}", stage.name()));
        }
    }
    diffs
}

/// Drive the engine and the model through the same random admit/tick
/// sequences and report any divergence. Returns (instances run, failures).
pub fn settle_parity(instances: u64, seed: u64) -> (u64, Vec<String>) {
    use rand::{Rng, SeedableRng};
    let mut failures = Vec::new();
    for inst in 0..instances {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ (inst * 0x9E37_79B9));
        let caps = CapacityConfig {
            transient_cap: rng.gen_range(1..=3),
            working_cap: rng.gen_range(1..=3),
            durable_cap: rng.gen_range(1..=2),
            flat_cap: 8,
            soft_budget: 8,
        };
        let d = Dynamics::default();
        let mut store =
            StagedStore::new(memlife_core::staged::StateMode::Full, d, caps, false);
        let mut model = Model::new(caps);
        let ops = rng.gen_range(6..=14);
        let mut next_id: ItemId = 0;
        for step in 1..=ops {
            if rng.gen_bool(0.8) {
                let conf = if rng.gen_bool(0.3) {
                    rng.gen_range(0.90..0.99)
                } else {
                    rng.gen_range(0.05..0.90)
                };
                let u = if rng.gen_bool(0.3) {
                    rng.gen_range(0.6..1.0)
                } else {
                    rng.gen_range(0.0..0.4)
                };
                let spec = ItemSpec {
                    id: next_id,
                    content_key: format!("it{next_id}"),
                    cue: CueFeatures { evidence_conf: conf, ..Default::default() },
                    labels: Labels::default(),
                    strength_input: u,
                };
                store.admit(&spec, step);
                model.admit(next_id, d.admission_confidence(conf), d.initial_strength(u), step);
                next_id += 1;
            } else {
                store.tick(step);
                model.tick();
            }
            let diffs = diff_store_model(&store, &model);
            if !diffs.is_empty() {
                failures.push(format!("instance {inst} step {step}: {}", diffs.join("; ")));
                break;
            }
        }
    }
    (instances, failures)
}

// ---------------------------------------------------------------------------
// Independent metric recomputation

fn frac(ids: &[ItemId], set: &BTreeSet<ItemId>) -> Option<f64> {
    if ids.is_empty() {
        None
    } else {
        Some(ids.iter().filter(|i| set.contains(i)).count() as f64 / ids.len() as f64)
    }
}

pub fn recompute_row(
    spec: &RegimeSpec,
    stream: &ScenarioStream,
    out: &Outcome,
) -> Vec<Option<f64>> {
    let admitted: Vec<&ItemSpec> = stream.admitted();
    let by_id: BTreeMap<ItemId, &ItemSpec> =
        admitted.iter().map(|s| (s.id, *s)).collect();
    let retained: BTreeSet<ItemId> = out.items.iter().map(|it| it.id).collect();
    let late: Vec<ItemId> = admitted
        .iter()
        .filter(|s| s.labels.is_late_important)
        .map(|s| s.id)
        .collect();
    let late_set: BTreeSet<ItemId> = late.iter().cloned().collect();
    let crit = |id: ItemId| {
        by_id
            .get(&id)
            .map(|s| s.labels.is_premise || s.labels.is_support || s.labels.is_late_important)
            .unwrap_or(false)
    };
    let prot_count = |f: &dyn Fn(&ItemSpec) -> bool| {
        out.protected
            .iter()
            .filter(|id| by_id.get(id).map(|s| f(s)).unwrap_or(false))
            .count() as f64
    };
    let key_kept = |k: &str| out.items.iter().any(|it| it.key == k) as u8 as f64;
    let queries = stream
        .events
        .iter()
        .filter(|e| matches!(e, Event::Query { .. }))
        .count();
    let staged = matches!(
        out.policy.as_str(),
        "stagemem" | "confidence_only" | "strength_only" | "single_state"
    );
    let denom = if staged {
        (stream.caps.transient_cap + stream.caps.working_cap + stream.caps.durable_cap) as f64
    } else {
        stream.caps.flat_cap as f64
    };
    let read = out.readout.as_ref();
    spec.metrics
        .iter()
        .map(|col| match *col {
            "adm" => {
                let q = stream.final_query()?;
                frac(
                    &q.required_premise_ids,
                    &by_id.keys().cloned().collect::<BTreeSet<_>>(),
                )
            }
            "prem" => read.map(|r| r.prem_ok as u8 as f64),
            "supp" => read.map(|r| r.supp_ok as u8 as f64),
            "behav" => {
                read.map(|r| (r.prem_ok && r.supp_ok && !r.governed_by_false) as u8 as f64)
            }
            "crit_loss" => read.map(|r| (!r.prem_ok) as u8 as f64),
            "final_load" => Some(out.live_units as f64 / denom),
            "non_crit" => {
                if out.items.is_empty() {
                    None
                } else {
                    let n = out.items.iter().filter(|it| !crit(it.id)).count();
                    Some(n as f64 / out.items.len() as f64)
                }
            }
            "useful" => {
                if out.items.is_empty() {
                    None
                } else {
                    let n = out.items.iter().filter(|it| crit(it.id)).count();
                    Some(n as f64 / out.items.len() as f64)
                }
            }
            "budget_hit" => {
                if out.counters.budget_checks == 0 {
                    None
                } else {
                    Some(out.counters.budget_hits as f64 / out.counters.budget_checks as f64)
                }
            }
            "recall" => frac(&late, &out.answerable),
            "imp_ret" => frac(&late, &retained),
            "regret" => {
                if queries == 0 {
                    None
                } else {
                    Some(out.counters.query_misses as f64 / queries as f64)
                }
            }
            "write_amp" => {
                let kept = out
                    .items
                    .iter()
                    .filter(|it| it.cue.query_relevance >= 0.5)
                    .count();
                if kept == 0 {
                    None
                } else {
                    let ops = out.counters.admissions
                        + out.counters.promotions
                        + out.counters.compressions;
                    Some(ops as f64 / kept as f64)
                }
            }
            "hit_at_1" => Some(
                out.ranking
                    .first()
                    .map(|id| late_set.contains(id))
                    .unwrap_or(false) as u8 as f64,
            ),
            "mrr" => Some(
                out.ranking
                    .iter()
                    .position(|id| late_set.contains(id))
                    .map(|p| 1.0 / (p + 1) as f64)
                    .unwrap_or(0.0),
            ),
            "false_prem" => Some(prot_count(&|s| s.labels.is_false_premise)),
            "local_prot" | "local_residue" => {
                Some(prot_count(&|s| s.labels.is_local_distractor))
            }
            "residue" => {
                if spec.name == "compression_cycle" {
                    let mut ids: Vec<ItemId> = admitted
                        .iter()
                        .filter(|s| s.labels.is_local_distractor)
                        .map(|s| s.id)
                        .collect();
                    ids.sort_unstable();
                    ids.truncate(2);
                    frac(&ids, &retained)
                } else {
                    Some(prot_count(&|s| s.labels.is_local_distractor))
                }
            }
            "details" => Some(
                out.items
                    .iter()
                    .filter(|it| {
                        by_id
                            .get(&it.id)
                            .map(|s| !s.labels.is_premise && !s.labels.is_support)
                            .unwrap_or(true)
                    })
                    .count() as f64,
            ),
            "loss_cycle" => Some(out.premise_lost_cycle.unwrap_or(0) as f64),
            "prot_load" => Some(out.protected_units as f64),
            "load" => Some(out.live_units as f64),
            "hc_hs" | "mc_hs" | "hc_ls" | "lc_ls" => Some(key_kept(col)),
            "good_prot" => Some((key_kept("hc_hs") + key_kept("mc_hs")) / 2.0),
            "bad_prot" => Some((key_kept("hc_ls") + key_kept("lc_ls")) / 2.0),
            other => panic!("recompute_row: unhandled column '{other}'"),
        })
        .collect()
}

/// Compare the engine's metric extraction against the recomputation across
/// regime/policy/episode cases. Returns (cases compared, failures).
pub fn metrics_parity(episodes: u64, base_seed: u64) -> (u64, Vec<String>) {
    use memlife_core::metrics::episode_values;
    use memlife_core::policy::{run_episode, PolicyParams};
    use memlife_core::scenarios::{all_regimes, dynamics_for_regime, generate};
    let mut cases = 0;
    let mut failures = Vec::new();
    for spec in all_regimes() {
        let dynamics = dynamics_for_regime(spec.name, Dynamics::default());
        for episode in 0..episodes {
            let stream = generate(spec.name, episode, base_seed).unwrap();
            for policy in spec.policies {
                let out = run_episode(policy, &stream, dynamics, &PolicyParams::default(), false)
                    .unwrap();
                let a = episode_values(&spec, &stream, &out);
                let b = recompute_row(&spec, &stream, &out);
                cases += 1;
                for (i, (x, y)) in a.iter().zip(b.iter()).enumerate() {
                    let ok = match (x, y) {
                        (None, None) => true,
                        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                        _ => false,
                    };
                    if !ok {
                        failures.push(format!(
                            "{}/{policy}/ep{episode} col {}: engine {x:?} vs recomputed {y:?}",
                            spec.name, spec.metrics[i]
                        ));
                    }
                }
            }
        }
    }
    (cases, failures)
}
