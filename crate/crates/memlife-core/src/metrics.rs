//! Episode-level metric extraction and cross-episode aggregation.
//!
//! Each regime reports a fixed column list; a column that does not apply to
//! an episode stays `None` and is skipped by the aggregator rather than being
//! zero-filled.

use crate::policy::Outcome;
use crate::scenarios::RegimeSpec;
use crate::types::{CapacityConfig, Event, ItemId, ItemSpec, ScenarioStream};
use std::collections::{BTreeMap, BTreeSet};

pub const STAGED_POLICIES: [&str; 4] =
    ["stagemem", "confidence_only", "strength_only", "single_state"];

pub fn is_staged_policy(name: &str) -> bool {
    STAGED_POLICIES.contains(&name)
}

/// Occupancy denominator: staged controllers are measured against the sum of
/// their stage caps, flat stores against the flat cap.
pub fn load_denominator(caps: CapacityConfig, policy: &str) -> f64 {
    if is_staged_policy(policy) {
        (caps.transient_cap + caps.working_cap + caps.durable_cap) as f64
    } else {
        caps.flat_cap as f64
    }
}

struct Ctx<'a> {
    stream: &'a ScenarioStream,
    out: &'a Outcome,
    specs: BTreeMap<ItemId, &'a ItemSpec>,
    retained_ids: BTreeSet<ItemId>,
}

impl<'a> Ctx<'a> {
    fn new(stream: &'a ScenarioStream, out: &'a Outcome) -> Self {
        let mut specs = BTreeMap::new();
        for ev in &stream.events {
            if let Event::Admit(spec) = ev {
                specs.insert(spec.id, spec);
            }
        }
        let retained_ids = out.items.iter().map(|it| it.id).collect();
        Ctx { stream, out, specs, retained_ids }
    }

    fn late_ids(&self) -> Vec<ItemId> {
        self.specs
            .values()
            .filter(|s| s.labels.is_late_important)
            .map(|s| s.id)
            .collect()
    }

    fn query_count(&self) -> usize {
        self.stream
            .events
            .iter()
            .filter(|e| matches!(e, Event::Query { .. }))
            .count()
    }

    fn fraction_of(&self, ids: &[ItemId], set: &BTreeSet<ItemId>) -> Option<f64> {
        if ids.is_empty() {
            return None;
        }
        let hit = ids.iter().filter(|id| set.contains(id)).count();
        Some(hit as f64 / ids.len() as f64)
    }

    fn protected_count(&self, pred: impl Fn(&ItemSpec) -> bool) -> f64 {
        self.out
            .protected
            .iter()
            .filter_map(|id| self.specs.get(id))
            .filter(|s| pred(s))
            .count() as f64
    }

    fn key_retained(&self, key: &str) -> f64 {
        if self.out.items.iter().any(|it| it.key == key) {
            1.0
        } else {
            0.0
        }
    }
}

fn bool01(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn critical(spec: &ItemSpec) -> bool {
    spec.labels.is_premise || spec.labels.is_support || spec.labels.is_late_important
}

fn value(col: &str, regime: &RegimeSpec, ctx: &Ctx) -> Option<f64> {
    let out = ctx.out;
    let read = out.readout.as_ref();
    match col {
        "adm" => {
            let q = ctx.stream.final_query()?;
            ctx.fraction_of(&q.required_premise_ids, &ctx.specs.keys().cloned().collect())
        }
        "prem" => read.map(|r| bool01(r.prem_ok)),
        "supp" => read.map(|r| bool01(r.supp_ok)),
        "behav" => read.map(|r| bool01(r.prem_ok && r.supp_ok && !r.governed_by_false)),
        "crit_loss" => read.map(|r| 1.0 - bool01(r.prem_ok)),
        "final_load" => {
            Some(out.live_units as f64 / load_denominator(ctx.stream.caps, &out.policy))
        }
        "non_crit" => {
            if out.items.is_empty() {
                return None;
            }
            let nc = out.items.iter().filter(|it| !critical_item(ctx, it.id)).count();
            Some(nc as f64 / out.items.len() as f64)
        }
        "useful" => {
            if out.items.is_empty() {
                return None;
            }
            let cr = out.items.iter().filter(|it| critical_item(ctx, it.id)).count();
            Some(cr as f64 / out.items.len() as f64)
        }
        "budget_hit" => {
            if out.counters.budget_checks == 0 {
                return None;
            }
            Some(out.counters.budget_hits as f64 / out.counters.budget_checks as f64)
        }
        "recall" => ctx.fraction_of(&ctx.late_ids(), &out.answerable),
        "imp_ret" => ctx.fraction_of(&ctx.late_ids(), &ctx.retained_ids),
        "regret" => {
            let n = ctx.query_count();
            if n == 0 {
                return None;
            }
            Some(out.counters.query_misses as f64 / n as f64)
        }
        "write_amp" => {
            let denom = out
                .items
                .iter()
                .filter(|it| it.cue.query_relevance >= 0.5)
                .count();
            if denom == 0 {
                return None;
            }
            let ops =
                out.counters.admissions + out.counters.promotions + out.counters.compressions;
            Some(ops as f64 / denom as f64)
        }
        "hit_at_1" => {
            let late: BTreeSet<ItemId> = ctx.late_ids().into_iter().collect();
            Some(bool01(
                out.ranking.first().map(|id| late.contains(id)).unwrap_or(false),
            ))
        }
        "mrr" => {
            let late: BTreeSet<ItemId> = ctx.late_ids().into_iter().collect();
            Some(
                out.ranking
                    .iter()
                    .position(|id| late.contains(id))
                    .map(|pos| 1.0 / (pos as f64 + 1.0))
                    .unwrap_or(0.0),
            )
        }
        "false_prem" => Some(ctx.protected_count(|s| s.labels.is_false_premise)),
        "local_prot" | "local_residue" => {
            Some(ctx.protected_count(|s| s.labels.is_local_distractor))
        }
        "residue" => {
            if regime.name == "compression_cycle" {
                // Fraction of the first compression round's residue items
                // still retained at the end.
                let mut first: Vec<ItemId> = ctx
                    .specs
                    .values()
                    .filter(|s| s.labels.is_local_distractor)
                    .map(|s| s.id)
                    .collect();
                first.sort_unstable();
                first.truncate(2);
                ctx.fraction_of(&first, &ctx.retained_ids)
            } else {
                Some(ctx.protected_count(|s| s.labels.is_local_distractor))
            }
        }
        "details" => {
            let n = out
                .items
                .iter()
                .filter(|it| {
                    ctx.specs
                        .get(&it.id)
                        .map(|s| !s.labels.is_premise && !s.labels.is_support)
                        .unwrap_or(true)
                })
                .count();
            Some(n as f64)
        }
        "loss_cycle" => Some(out.premise_lost_cycle.unwrap_or(0) as f64),
        "prot_load" => Some(out.protected_units as f64),
        "load" => Some(out.live_units as f64),
        "hc_hs" | "mc_hs" | "hc_ls" | "lc_ls" => Some(ctx.key_retained(col)),
        "good_prot" => Some((ctx.key_retained("hc_hs") + ctx.key_retained("mc_hs")) / 2.0),
        "bad_prot" => Some((ctx.key_retained("hc_ls") + ctx.key_retained("lc_ls")) / 2.0),
        _ => None,
    }
}

fn critical_item(ctx: &Ctx, id: ItemId) -> bool {
    ctx.specs.get(&id).map(|s| critical(s)).unwrap_or(false)
}

/// One value per regime metric column for a single episode.
pub fn episode_values(
    regime: &RegimeSpec,
    stream: &ScenarioStream,
    out: &Outcome,
) -> Vec<Option<f64>> {
    let ctx = Ctx::new(stream, out);
    regime.metrics.iter().map(|col| value(col, regime, &ctx)).collect()
}

/// Column-wise mean over episodes, skipping absent values. A column with no
/// values at all stays `None`.
pub fn aggregate(rows: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let width = rows[0].len();
    let mut sums = vec![0.0f64; width];
    let mut counts = vec![0usize; width];
    for row in rows {
        assert_eq!(row.len(), width, "ragged metric rows");
        for (i, v) in row.iter().enumerate() {
            if let Some(x) = v {
                sums[i] += x;
                counts[i] += 1;
            }
        }
    }
    (0..width)
        .map(|i| {
            if counts[i] == 0 {
                None
            } else {
                Some(sums[i] / counts[i] as f64)
            }
        })
        .collect()
}

/// Four-decimal cell formatting; absent values print as an empty field.
pub fn fmt4(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => String::new(),
    }
}
