//! Controller registry and the shared episode runner.
//!
//! Every policy consumes the identical event stream through the same loop;
//! the only difference is the engine behind the dispatch.

use crate::dynamics::Dynamics;
use crate::flat::{BinaryFlag, FrontDoor, RankBy, RankFlat, ReinforcedFlat, SingleLayer};
use crate::staged::{OpCounters, ReadoutFlags, StagedStore, StateMode};
use crate::summary::{SummaryCycle, SummaryRule};
use crate::tiered::{HybridStore, TieredStore};
use crate::trace::Trace;
use crate::types::{CapacityConfig, CueFeatures, Event, ItemId, Labels, ScenarioStream, Stage};
use std::collections::BTreeSet;

pub const POLICY_NAMES: [&str; 21] = [
    "stagemem",
    "confidence_only",
    "strength_only",
    "single_state",
    "single_layer",
    "binary_flag",
    "cue_aware_flat",
    "front_door",
    "reinforced_flat",
    "aggressive_tiering",
    "hybrid_layering",
    "recency",
    "frequency",
    "query_relevance",
    "generic_importance",
    "confidence_flat",
    "strength_aware",
    "confidence_only_summary",
    "flat_salience",
    "frequency_summary",
    "recency_summary",
];

/// Per-policy tunables, addressable as `policy.<name>.<param>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub front_door_tau: f64,
    pub binary_flag_threshold: f64,
    pub reinforced_horizon: f64,
    pub reinforced_floor: f64,
    pub flat_salience_theta: f64,
    pub strength_aware_min_m: f64,
    pub strength_aware_min_c: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            front_door_tau: 0.55,
            binary_flag_threshold: 0.5,
            reinforced_horizon: 8.0,
            reinforced_floor: 0.05,
            flat_salience_theta: 0.77,
            strength_aware_min_m: 0.08,
            strength_aware_min_c: 0.5,
        }
    }
}

impl PolicyParams {
    pub fn set(&mut self, policy: &str, param: &str, value: f64) -> Result<(), String> {
        match (policy, param) {
            ("front_door", "tau") => self.front_door_tau = value,
            ("binary_flag", "threshold") => self.binary_flag_threshold = value,
            ("reinforced_flat", "horizon") => self.reinforced_horizon = value,
            ("reinforced_flat", "floor") => self.reinforced_floor = value,
            ("flat_salience", "theta") => self.flat_salience_theta = value,
            ("strength_aware", "min_m") => self.strength_aware_min_m = value,
            ("strength_aware", "min_c") => self.strength_aware_min_c = value,
            _ => return Err(format!("unknown policy parameter policy.{policy}.{param}")),
        }
        Ok(())
    }
}

pub enum Policy {
    Staged(StagedStore),
    SingleLayer(SingleLayer),
    RankFlat(RankFlat),
    BinaryFlag(BinaryFlag),
    FrontDoor(FrontDoor),
    Reinforced(ReinforcedFlat),
    Tiered(TieredStore),
    Hybrid(HybridStore),
    Summary(SummaryCycle),
}

impl Policy {
    pub fn build(
        name: &str,
        dynamics: Dynamics,
        caps: CapacityConfig,
        params: &PolicyParams,
        trace: bool,
    ) -> Result<Policy, String> {
        let p = match name {
            "stagemem" => Policy::Staged(StagedStore::new(StateMode::Full, dynamics, caps, trace)),
            "confidence_only" => {
                Policy::Staged(StagedStore::new(StateMode::ConfidenceOnly, dynamics, caps, trace))
            }
            "strength_only" => {
                Policy::Staged(StagedStore::new(StateMode::StrengthOnly, dynamics, caps, trace))
            }
            "single_state" => {
                Policy::Staged(StagedStore::new(StateMode::SingleState, dynamics, caps, trace))
            }
            "single_layer" => {
                Policy::SingleLayer(SingleLayer::new(dynamics, caps.soft_budget, trace))
            }
            "binary_flag" => Policy::BinaryFlag(BinaryFlag::new(
                dynamics,
                caps.soft_budget,
                params.binary_flag_threshold,
                trace,
            )),
            "cue_aware_flat" | "generic_importance" => Policy::RankFlat(RankFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                RankBy::ImportanceCue,
                trace,
            )),
            "front_door" => Policy::FrontDoor(FrontDoor::new(
                dynamics,
                caps.soft_budget,
                params.front_door_tau,
                trace,
            )),
            "reinforced_flat" => Policy::Reinforced(ReinforcedFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                params.reinforced_horizon,
                params.reinforced_floor,
                trace,
            )),
            "aggressive_tiering" => {
                Policy::Tiered(TieredStore::new(dynamics, caps.soft_budget, trace))
            }
            "hybrid_layering" => Policy::Hybrid(HybridStore::new(
                dynamics,
                caps.transient_cap + 1,
                caps.soft_budget,
                trace,
            )),
            "recency" => Policy::RankFlat(RankFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                RankBy::Recency,
                trace,
            )),
            "frequency" => Policy::RankFlat(RankFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                RankBy::Frequency,
                trace,
            )),
            "query_relevance" => Policy::RankFlat(RankFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                RankBy::QueryRelevance,
                trace,
            )),
            "confidence_flat" => Policy::RankFlat(RankFlat::new(
                dynamics,
                caps.flat_cap,
                caps.soft_budget,
                RankBy::Confidence,
                trace,
            )),
            "strength_aware" => Policy::Summary(SummaryCycle::new(
                dynamics,
                SummaryRule::StrengthAware {
                    min_m: params.strength_aware_min_m,
                    min_c: params.strength_aware_min_c,
                },
                caps.soft_budget,
                trace,
            )),
            "confidence_only_summary" => Policy::Summary(SummaryCycle::new(
                dynamics,
                SummaryRule::ConfidenceHalf,
                caps.soft_budget,
                trace,
            )),
            "flat_salience" => Policy::Summary(SummaryCycle::new(
                dynamics,
                SummaryRule::FlatSalience { theta: params.flat_salience_theta },
                caps.soft_budget,
                trace,
            )),
            "frequency_summary" => Policy::Summary(SummaryCycle::new(
                dynamics,
                SummaryRule::FrequencyHalf,
                caps.soft_budget,
                trace,
            )),
            "recency_summary" => Policy::Summary(SummaryCycle::new(
                dynamics,
                SummaryRule::RecencyHalf,
                caps.soft_budget,
                trace,
            )),
            other => return Err(format!("unknown policy '{other}'")),
        };
        Ok(p)
    }

    fn admit(&mut self, spec: &crate::types::ItemSpec, step: u32) {
        match self {
            Policy::Staged(e) => e.admit(spec, step),
            Policy::SingleLayer(e) => e.admit(spec, step),
            Policy::RankFlat(e) => e.admit(spec, step),
            Policy::BinaryFlag(e) => e.admit(spec, step),
            Policy::FrontDoor(e) => e.admit(spec, step),
            Policy::Reinforced(e) => e.admit(spec, step),
            Policy::Tiered(e) => e.admit(spec, step),
            Policy::Hybrid(e) => e.admit(spec, step),
            Policy::Summary(e) => e.admit(spec, step),
        }
    }

    fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        match self {
            Policy::Staged(e) => e.evidence(target, conf, positive, step),
            Policy::SingleLayer(e) => e.evidence(target, conf, positive, step),
            Policy::RankFlat(e) => e.evidence(target, conf, positive, step),
            Policy::BinaryFlag(e) => e.evidence(target, conf, positive, step),
            Policy::FrontDoor(e) => e.evidence(target, conf, positive, step),
            Policy::Reinforced(e) => e.evidence(target, conf, positive, step),
            Policy::Tiered(e) => e.evidence(target, conf, positive, step),
            Policy::Hybrid(e) => e.evidence(target, conf, positive, step),
            Policy::Summary(e) => e.evidence(target, conf, positive, step),
        }
    }

    fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        match self {
            Policy::Staged(e) => e.query(target, relevance, step),
            Policy::SingleLayer(e) => e.query(target, relevance, step),
            Policy::RankFlat(e) => e.query(target, relevance, step),
            Policy::BinaryFlag(e) => e.query(target, relevance, step),
            Policy::FrontDoor(e) => e.query(target, relevance, step),
            Policy::Reinforced(e) => e.query(target, relevance, step),
            Policy::Tiered(e) => e.query(target, relevance, step),
            Policy::Hybrid(e) => e.query(target, relevance, step),
            Policy::Summary(e) => e.query(target, relevance, step),
        }
    }

    fn tick(&mut self, step: u32) {
        match self {
            Policy::Staged(e) => e.tick(step),
            Policy::BinaryFlag(e) => e.tick(step),
            Policy::Reinforced(e) => e.tick(step),
            Policy::Summary(e) => e.tick(step),
            _ => {}
        }
    }

    fn finalize(&mut self, step: u32) {
        if let Policy::BinaryFlag(e) = self {
            e.finalize(step)
        }
    }

    fn end_event(&mut self) {
        match self {
            Policy::Staged(e) => e.end_event(),
            Policy::SingleLayer(e) => e.end_event(),
            Policy::RankFlat(e) => e.end_event(),
            Policy::BinaryFlag(e) => e.end_event(),
            Policy::FrontDoor(e) => e.end_event(),
            Policy::Reinforced(e) => e.end_event(),
            Policy::Tiered(e) => e.end_event(),
            Policy::Hybrid(e) => e.end_event(),
            Policy::Summary(e) => e.end_event(),
        }
    }

    fn readout(&self, q: &crate::types::QuerySpec) -> ReadoutFlags {
        match self {
            Policy::Staged(e) => e.readout(q),
            Policy::SingleLayer(e) => e.readout(q),
            Policy::RankFlat(e) => e.readout(q),
            Policy::BinaryFlag(e) => e.readout(q),
            Policy::FrontDoor(e) => e.readout(q),
            Policy::Reinforced(e) => e.readout(q),
            Policy::Tiered(e) => e.readout(q),
            Policy::Hybrid(e) => e.readout(q),
            Policy::Summary(e) => e.readout(q),
        }
    }

    fn counters(&self) -> OpCounters {
        match self {
            Policy::Staged(e) => e.counters,
            Policy::SingleLayer(e) => e.counters,
            Policy::RankFlat(e) => e.counters,
            Policy::BinaryFlag(e) => e.counters,
            Policy::FrontDoor(e) => e.counters,
            Policy::Reinforced(e) => e.counters,
            Policy::Tiered(e) => e.counters,
            Policy::Hybrid(e) => e.counters,
            Policy::Summary(e) => e.counters,
        }
    }

    fn take_trace(&mut self) -> Trace {
        let t = match self {
            Policy::Staged(e) => &mut e.trace,
            Policy::SingleLayer(e) => &mut e.trace,
            Policy::RankFlat(e) => &mut e.trace,
            Policy::BinaryFlag(e) => &mut e.trace,
            Policy::FrontDoor(e) => &mut e.trace,
            Policy::Reinforced(e) => &mut e.trace,
            Policy::Tiered(e) => &mut e.trace,
            Policy::Hybrid(e) => &mut e.trace,
            Policy::Summary(e) => &mut e.trace,
        };
        std::mem::take(t)
    }
}

#[derive(Debug, Clone)]
pub struct RetainedItem {
    pub id: ItemId,
    pub key: String,
    pub store: String,
    pub c: f64,
    pub m: f64,
    pub cue: CueFeatures,
    pub labels: Labels,
    pub summary_member: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub policy: String,
    /// Live storage units at the end (a summary counts as one unit).
    pub live_units: usize,
    /// Live atoms plus answerable summary constituents.
    pub items: Vec<RetainedItem>,
    pub answerable: BTreeSet<ItemId>,
    pub protected: BTreeSet<ItemId>,
    /// Storage units in the protected portion of the store (summaries count
    /// as one unit, same as `live_units`).
    pub protected_units: usize,
    pub counters: OpCounters,
    pub readout: Option<ReadoutFlags>,
    pub ranking: Vec<ItemId>,
    pub premise_lost_cycle: Option<u32>,
    pub trace: Trace,
}

fn flat_items(recs: &[crate::flat::FlatRec], store: &str) -> Vec<RetainedItem> {
    recs.iter()
        .map(|r| RetainedItem {
            id: r.id,
            key: r.key.clone(),
            store: store.to_string(),
            c: r.c,
            m: r.m,
            cue: r.cue,
            labels: r.labels,
            summary_member: false,
        })
        .collect()
}

fn collect_outcome(name: &str, p: &mut Policy, readout: Option<ReadoutFlags>) -> Outcome {
    let counters = p.counters();
    let protected_units = match &*p {
        Policy::Staged(e) => e.recs.iter().filter(|r| r.stage != Stage::Transient).count(),
        Policy::BinaryFlag(e) => e.protected_ids().len(),
        Policy::Hybrid(e) => e.store.len(),
        Policy::SingleLayer(e) => e.recs.len(),
        Policy::RankFlat(e) => e.recs.len(),
        Policy::FrontDoor(e) => e.recs.len(),
        Policy::Reinforced(e) => e.recs.len(),
        Policy::Tiered(e) => e.shallow.len() + e.deep.len(),
        Policy::Summary(e) => e.pool.len(),
    };
    let (live_units, items, answerable, protected, ranking, premise_lost_cycle) = match &*p {
        Policy::Staged(e) => {
            let mut items = Vec::new();
            for r in &e.recs {
                if r.is_summary() {
                    for m in &r.members {
                        if m.m_at_compress >= e.thresholds.tau_r_durable
                            && matches!(e.mode, StateMode::Full | StateMode::StrengthOnly)
                        {
                            items.push(RetainedItem {
                                id: m.id,
                                key: m.key.clone(),
                                store: r.stage.name().to_string(),
                                c: m.c_at_compress,
                                m: m.m_at_compress,
                                cue: m.cue,
                                labels: m.labels,
                                summary_member: true,
                            });
                        }
                    }
                } else {
                    items.push(RetainedItem {
                        id: r.id,
                        key: r.key.clone(),
                        store: r.stage.name().to_string(),
                        c: r.c,
                        m: if e.mode == StateMode::SingleState { r.s } else { r.m },
                        cue: r.cue,
                        labels: r.labels,
                        summary_member: false,
                    });
                }
            }
            (
                e.live_count(),
                items,
                e.answerable_ids(),
                e.protected_ids(),
                e.ranking(),
                None,
            )
        }
        Policy::SingleLayer(e) => (
            e.recs.len(),
            flat_items(&e.recs, "flat"),
            e.live_ids(),
            e.live_ids(),
            e.ranking(),
            None,
        ),
        Policy::RankFlat(e) => (
            e.recs.len(),
            flat_items(&e.recs, "flat"),
            e.live_ids(),
            e.live_ids(),
            e.ranking(),
            None,
        ),
        Policy::BinaryFlag(e) => (
            e.recs.len(),
            flat_items(&e.recs, "flat"),
            e.live_ids(),
            e.protected_ids(),
            e.ranking(),
            None,
        ),
        Policy::FrontDoor(e) => (
            e.recs.len(),
            flat_items(&e.recs, "flat"),
            e.live_ids(),
            e.live_ids(),
            e.ranking(),
            None,
        ),
        Policy::Reinforced(e) => (
            e.recs.len(),
            flat_items(&e.recs, "flat"),
            e.live_ids(),
            e.live_ids(),
            e.ranking(),
            None,
        ),
        Policy::Tiered(e) => {
            let mut items = flat_items(&e.shallow, "shallow");
            items.extend(flat_items(&e.deep, "deep"));
            (
                e.shallow.len() + e.deep.len(),
                items,
                e.live_ids(),
                e.live_ids(),
                e.ranking(),
                None,
            )
        }
        Policy::Hybrid(e) => {
            let mut items = flat_items(&e.store, "store");
            items.extend(flat_items(&e.buffer, "buffer"));
            (
                e.store.len() + e.buffer.len(),
                items,
                e.live_ids(),
                e.protected_ids(),
                e.ranking(),
                None,
            )
        }
        Policy::Summary(e) => (
            e.pool.len(),
            flat_items(&e.pool, "pool"),
            e.live_ids(),
            e.live_ids(),
            e.ranking(),
            e.premise_lost_cycle,
        ),
    };
    Outcome {
        policy: name.to_string(),
        live_units,
        items,
        answerable,
        protected,
        protected_units,
        counters,
        readout,
        ranking,
        premise_lost_cycle,
        trace: p.take_trace(),
    }
}

/// Run one policy over one stream.
pub fn run_episode(
    name: &str,
    stream: &ScenarioStream,
    dynamics: Dynamics,
    params: &PolicyParams,
    trace: bool,
) -> Result<Outcome, String> {
    let mut p = Policy::build(name, dynamics, stream.caps, params, trace)?;
    let mut readout = None;
    for (idx, ev) in stream.events.iter().enumerate() {
        let step = (idx + 1) as u32;
        match ev {
            Event::Admit(spec) => p.admit(spec, step),
            Event::Evidence { target, conf, positive } => {
                p.evidence(*target, *conf, *positive, step)
            }
            Event::Query { target, relevance } => p.query(*target, *relevance, step),
            Event::PressureTick => p.tick(step),
            Event::FinalQuery(q) => {
                p.finalize(step);
                readout = Some(p.readout(q));
            }
        }
        p.end_event();
    }
    Ok(collect_outcome(name, &mut p, readout))
}

/// Stage ordering helper shared by rank-sensitive metrics.
pub fn stage_order(stage: Stage) -> u8 {
    match stage {
        Stage::Durable => 2,
        Stage::Working => 1,
        Stage::Transient => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CueFeatures, Event, ItemSpec, Labels, QuerySpec};

    fn mini_stream() -> ScenarioStream {
        let item = |id: u32, conf: f64, u: f64| {
            Event::Admit(ItemSpec {
                id,
                content_key: format!("i{id}"),
                cue: CueFeatures { evidence_conf: conf, ..Default::default() },
                labels: Labels::default(),
                strength_input: u,
            })
        };
        ScenarioStream {
            regime: "mini".into(),
            episode: 0,
            caps: CapacityConfig {
                transient_cap: 2,
                working_cap: 2,
                durable_cap: 2,
                flat_cap: 4,
                soft_budget: 4,
            },
            events: vec![
                item(0, 0.95, 0.9),
                item(1, 0.6, 0.1),
                item(2, 0.7, 0.2),
                Event::Query { target: 0, relevance: 0.9 },
                Event::PressureTick,
                Event::FinalQuery(QuerySpec {
                    required_premise_ids: vec![0],
                    required_support_ids: vec![],
                    forbidden_governing_ids: vec![1],
                }),
            ],
        }
    }

    #[test]
    fn every_registered_policy_runs_the_mini_stream() {
        let stream = mini_stream();
        for name in POLICY_NAMES {
            let out = run_episode(
                name,
                &stream,
                Dynamics::default(),
                &PolicyParams::default(),
                false,
            )
            .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(out.policy, name);
            assert!(out.readout.is_some(), "{name} produced no readout");
            assert_eq!(out.counters.budget_checks, 6, "{name} budget checks");
        }
    }

    #[test]
    fn unknown_policy_is_rejected() {
        let stream = mini_stream();
        assert!(run_episode(
            "nope",
            &stream,
            Dynamics::default(),
            &PolicyParams::default(),
            false
        )
        .is_err());
    }

    #[test]
    fn params_reject_unknown_keys() {
        let mut p = PolicyParams::default();
        assert!(p.set("front_door", "tau", 0.7).is_ok());
        assert!((p.front_door_tau - 0.7).abs() < 1e-12);
        assert!(p.set("front_door", "nope", 0.7).is_err());
        assert!(p.set("nope", "tau", 0.7).is_err());
    }
}
