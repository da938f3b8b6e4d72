//! Shared item, event, and stream types.

use serde::{Deserialize, Serialize};

pub type ItemId = u32;

/// Synthetic ids for compression summaries start here so they never collide
/// with admitted items.
pub const SUMMARY_ID_BASE: ItemId = 10_000;

pub fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Transient,
    Working,
    Durable,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Transient => "transient",
            Stage::Working => "working",
            Stage::Durable => "durable",
        }
    }
}

/// Cue-level features available at admission time. These are observable
/// surface signals; none of them is ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueFeatures {
    /// Confidence asserted by the source at admission, in [0,1].
    pub evidence_conf: f64,
    /// Surprise / salience shock at encoding time.
    pub shock: f64,
    /// Generic importance phrasing cue ("critical", "must", ...).
    pub importance_cue: f64,
    /// 1.0 when the item is phrased as a standing constraint.
    pub constraint_flag: f64,
    /// Static relevance of the item to the workload's queries.
    pub query_relevance: f64,
    /// Novelty versus the existing store, in [0,1]; low means near-duplicate.
    pub novelty: f64,
}

impl Default for CueFeatures {
    fn default() -> Self {
        CueFeatures {
            evidence_conf: 0.5,
            shock: 0.0,
            importance_cue: 0.0,
            constraint_flag: 0.0,
            query_relevance: 0.0,
            novelty: 0.8,
        }
    }
}

/// Ground-truth labels used only by the evaluator, never by controllers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Labels {
    pub is_premise: bool,
    pub is_support: bool,
    pub is_false_premise: bool,
    pub is_local_distractor: bool,
    pub is_late_important: bool,
    /// True consequence of forgetting this item, in [0,1]. This is the oracle
    /// strength signal; proxy sources degrade it.
    pub true_consequence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub id: ItemId,
    /// Symbolic content tag ("premise", "support", "detail_3_2", ...).
    pub content_key: String,
    pub cue: CueFeatures,
    pub labels: Labels,
    /// Strength-channel input in [0,1] as supplied by the configured source.
    /// The engine maps it to an initial strength; it is not ground truth
    /// unless the source was the oracle.
    pub strength_input: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub required_premise_ids: Vec<ItemId>,
    pub required_support_ids: Vec<ItemId>,
    pub forbidden_governing_ids: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Event {
    Admit(ItemSpec),
    /// Later evidence about an item: confidence of the evidence and whether it
    /// corroborates (true) or contradicts (false).
    Evidence {
        target: ItemId,
        conf: f64,
        positive: bool,
    },
    /// A query that touches an item with the given relevance. Missing targets
    /// are recorded as misses and otherwise ignored.
    Query {
        target: ItemId,
        relevance: f64,
    },
    /// Budget-pressure maintenance opportunity.
    PressureTick,
    /// End-of-episode readout.
    FinalQuery(QuerySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub transient_cap: usize,
    pub working_cap: usize,
    pub durable_cap: usize,
    /// Capacity for single-store baselines.
    pub flat_cap: usize,
    /// Soft total budget; exceeding it counts as a budget hit.
    pub soft_budget: usize,
}

impl CapacityConfig {
    pub fn staged_total(&self) -> usize {
        self.transient_cap + self.working_cap + self.durable_cap
    }
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            transient_cap: 3,
            working_cap: 6,
            durable_cap: 4,
            flat_cap: 13,
            soft_budget: 8,
        }
    }
}

/// One generated episode: a fixed event schedule shared by every policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStream {
    pub regime: String,
    pub episode: u64,
    pub caps: CapacityConfig,
    /// Events indexed by step; step s is events[s-1]. Exactly one event per
    /// step, last event is the final query.
    pub events: Vec<Event>,
}

impl ScenarioStream {
    pub fn final_query(&self) -> Option<&QuerySpec> {
        match self.events.last() {
            Some(Event::FinalQuery(q)) => Some(q),
            _ => None,
        }
    }

    pub fn admitted(&self) -> Vec<&ItemSpec> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Admit(spec) => Some(spec),
                _ => None,
            })
            .collect()
    }

    pub fn admitted_spec(&self, id: ItemId) -> Option<&ItemSpec> {
        self.admitted().into_iter().find(|s| s.id == id)
    }
}

/// Structural sanity checks on a generated stream. Returns a list of problems;
/// empty means valid.
pub fn validate_stream(stream: &ScenarioStream) -> Vec<String> {
    let mut problems = Vec::new();
    if stream.events.is_empty() {
        problems.push("empty event list".to_string());
        return problems;
    }
    match stream.events.last() {
        Some(Event::FinalQuery(_)) => {}
        _ => problems.push("last event is not a final query".to_string()),
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut admitted = std::collections::BTreeSet::new();
    for (idx, ev) in stream.events.iter().enumerate() {
        let step = idx + 1;
        match ev {
            Event::Admit(spec) => {
                if !seen.insert(spec.id) {
                    problems.push(format!("step {step}: duplicate admission id {}", spec.id));
                }
                admitted.insert(spec.id);
                if spec.id >= SUMMARY_ID_BASE {
                    problems.push(format!("step {step}: id {} in summary range", spec.id));
                }
                for (name, v) in [
                    ("evidence_conf", spec.cue.evidence_conf),
                    ("shock", spec.cue.shock),
                    ("importance_cue", spec.cue.importance_cue),
                    ("constraint_flag", spec.cue.constraint_flag),
                    ("query_relevance", spec.cue.query_relevance),
                    ("novelty", spec.cue.novelty),
                    ("strength_input", spec.strength_input),
                    ("true_consequence", spec.labels.true_consequence),
                ] {
                    if !(0.0..=1.0).contains(&v) {
                        problems.push(format!(
                            "step {step}: item {} field {name}={v} out of [0,1]",
                            spec.id
                        ));
                    }
                }
            }
            Event::Evidence { target, conf, .. } => {
                if !admitted.contains(target) {
                    problems.push(format!("step {step}: evidence for unadmitted id {target}"));
                }
                if !(0.0..=1.0).contains(conf) {
                    problems.push(format!("step {step}: evidence conf {conf} out of [0,1]"));
                }
            }
            Event::Query { target, relevance } => {
                if !admitted.contains(target) {
                    problems.push(format!("step {step}: query for unadmitted id {target}"));
                }
                if !(0.0..=1.0).contains(relevance) {
                    problems.push(format!("step {step}: query relevance {relevance} out of [0,1]"));
                }
            }
            Event::PressureTick => {}
            Event::FinalQuery(q) => {
                if idx + 1 != stream.events.len() {
                    problems.push(format!("step {step}: final query before end of stream"));
                }
                for id in q
                    .required_premise_ids
                    .iter()
                    .chain(q.required_support_ids.iter())
                    .chain(q.forbidden_governing_ids.iter())
                {
                    if !admitted.contains(id) {
                        problems.push(format!("final query references unadmitted id {id}"));
                    }
                }
            }
        }
    }
    problems
}
