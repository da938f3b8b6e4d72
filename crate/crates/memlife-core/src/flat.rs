//! Single-store baseline controllers.
//!
//! These share admission and touch dynamics with the staged engine (one
//! implicit stage, transient-rate plasticity) but manage retention with a
//! single heuristic each: admission-order spill, rank-based eviction on one
//! signal, a binary keep flag, an admission-time novelty gate, or a
//! reinforcement-decay score.

use crate::dynamics::Dynamics;
use crate::staged::{OpCounters, ReadoutFlags};
use crate::trace::Trace;
use crate::types::{CueFeatures, ItemId, ItemSpec, Labels, QuerySpec};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct FlatRec {
    pub id: ItemId,
    pub key: String,
    pub c: f64,
    pub m: f64,
    pub last_touched: u32,
    pub touch_count: u32,
    pub admitted_step: u32,
    pub strength_input: f64,
    pub cue: CueFeatures,
    pub labels: Labels,
}

pub(crate) fn make_rec(d: &Dynamics, spec: &ItemSpec, step: u32) -> FlatRec {
    FlatRec {
        id: spec.id,
        key: spec.content_key.clone(),
        c: d.admission_confidence(spec.cue.evidence_conf),
        m: d.initial_strength(spec.strength_input),
        last_touched: step,
        touch_count: 1,
        admitted_step: step,
        strength_input: spec.strength_input,
        cue: spec.cue,
        labels: spec.labels,
    }
}

pub(crate) fn apply_evidence(d: &Dynamics, r: &mut FlatRec, conf: f64, positive: bool, step: u32) {
    let conf = d.scaled_evidence(conf);
    let p = d.plasticity(crate::types::Stage::Transient, conf, positive, r.m);
    r.c = d.update_confidence(r.c, p, positive);
    let b = d.strength_base(conf, r.cue.shock);
    r.m = d.update_strength(r.m, p, b);
    r.last_touched = step;
    r.touch_count += 1;
}

pub(crate) fn apply_query(d: &Dynamics, r: &mut FlatRec, relevance: f64, step: u32) {
    let rel = d.scaled_evidence(relevance);
    let p = d.plasticity(crate::types::Stage::Transient, rel, true, r.m);
    let b = d.strength_base(rel, r.cue.shock);
    r.m = d.update_strength(r.m, p, b);
    r.last_touched = step;
    r.touch_count += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBy {
    Recency,
    Frequency,
    QueryRelevance,
    ImportanceCue,
    Confidence,
    Product,
}

/// Keep-everything store with a hard ceiling at twice the soft budget;
/// beyond it the oldest admission spills out.
#[derive(Debug, Clone)]
pub struct SingleLayer {
    pub dynamics: Dynamics,
    pub hard_cap: usize,
    pub soft_budget: usize,
    pub recs: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl SingleLayer {
    pub fn new(dynamics: Dynamics, soft_budget: usize, trace: bool) -> Self {
        SingleLayer {
            dynamics,
            hard_cap: 2 * soft_budget,
            soft_budget,
            recs: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let r = make_rec(&self.dynamics, spec, step);
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "flat", Some(r.c), Some(r.m));
        self.recs.push(r);
        self.counters.admissions += 1;
        while self.recs.len() > self.hard_cap {
            let victim = self
                .recs
                .iter()
                .enumerate()
                .min_by_key(|(_, r)| (r.admitted_step, r.id))
                .map(|(i, _)| i)
                .unwrap();
            let r = self.recs.remove(victim);
            self.counters.evictions += 1;
            self.trace
                .push(step, r.id.to_string(), "evict", "flat", "-", Some(r.c), Some(r.m));
        }
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                apply_evidence(&d, r, conf, positive, step);
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "flat", "flat", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                apply_query(&d, r, relevance, step);
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "flat", "flat", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.recs.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.recs.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        rank_by_product(&self.recs)
    }
}

/// Fixed-capacity store evicting the minimum of one ranking signal.
#[derive(Debug, Clone)]
pub struct RankFlat {
    pub dynamics: Dynamics,
    pub cap: usize,
    pub soft_budget: usize,
    pub rank: RankBy,
    pub recs: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl RankFlat {
    pub fn new(dynamics: Dynamics, cap: usize, soft_budget: usize, rank: RankBy, trace: bool) -> Self {
        RankFlat {
            dynamics,
            cap,
            soft_budget,
            rank,
            recs: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    fn key(&self, r: &FlatRec) -> f64 {
        match self.rank {
            RankBy::Recency => r.last_touched as f64,
            RankBy::Frequency => r.touch_count as f64,
            RankBy::QueryRelevance => r.cue.query_relevance,
            RankBy::ImportanceCue => r.cue.importance_cue,
            RankBy::Confidence => r.c,
            RankBy::Product => r.c * r.m,
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let r = make_rec(&self.dynamics, spec, step);
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "flat", Some(r.c), Some(r.m));
        self.recs.push(r);
        self.counters.admissions += 1;
        while self.recs.len() > self.cap {
            let victim = self
                .recs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    self.key(a)
                        .partial_cmp(&self.key(b))
                        .unwrap()
                        .then_with(|| a.id.cmp(&b.id))
                })
                .map(|(i, _)| i)
                .unwrap();
            let r = self.recs.remove(victim);
            self.counters.evictions += 1;
            self.trace
                .push(step, r.id.to_string(), "evict", "flat", "-", Some(r.c), Some(r.m));
        }
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                apply_evidence(&d, r, conf, positive, step);
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "flat", "flat", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                apply_query(&d, r, relevance, step);
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "flat", "flat", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.recs.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.recs.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        let mut v: Vec<&FlatRec> = self.recs.iter().collect();
        v.sort_by(|a, b| {
            self.key(b)
                .partial_cmp(&self.key(a))
                .unwrap()
                .then_with(|| a.id.cmp(&b.id))
        });
        v.iter().map(|r| r.id).collect()
    }
}

/// Binary importance flag: flagged items are kept forever, unflagged items
/// survive only the event that admitted them.
#[derive(Debug, Clone)]
pub struct BinaryFlag {
    pub dynamics: Dynamics,
    pub soft_budget: usize,
    pub flag_threshold: f64,
    pub recs: Vec<FlatRec>,
    pub flagged: BTreeSet<ItemId>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl BinaryFlag {
    pub fn new(dynamics: Dynamics, soft_budget: usize, flag_threshold: f64, trace: bool) -> Self {
        BinaryFlag {
            dynamics,
            soft_budget,
            flag_threshold,
            recs: Vec::new(),
            flagged: BTreeSet::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    fn expire_unflagged(&mut self, step: u32) {
        let mut kept = Vec::new();
        for r in std::mem::take(&mut self.recs) {
            if self.flagged.contains(&r.id) || r.admitted_step >= step {
                kept.push(r);
            } else {
                self.counters.evictions += 1;
                self.trace
                    .push(step, r.id.to_string(), "evict", "flat", "-", Some(r.c), Some(r.m));
            }
        }
        self.recs = kept;
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        self.expire_unflagged(step);
        let r = make_rec(&self.dynamics, spec, step);
        if spec.cue.importance_cue >= self.flag_threshold {
            self.flagged.insert(spec.id);
        }
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "flat", Some(r.c), Some(r.m));
        self.recs.push(r);
        self.counters.admissions += 1;
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        self.expire_unflagged(step);
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => apply_evidence(&d, r, conf, positive, step),
            None => self.counters.misses += 1,
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        self.expire_unflagged(step);
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => apply_query(&d, r, relevance, step),
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
            }
        }
    }

    pub fn tick(&mut self, step: u32) {
        self.expire_unflagged(step);
    }

    pub fn finalize(&mut self, step: u32) {
        self.expire_unflagged(step);
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.recs.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.recs.iter().map(|r| r.id).collect()
    }

    pub fn protected_ids(&self) -> BTreeSet<ItemId> {
        self.recs
            .iter()
            .filter(|r| self.flagged.contains(&r.id))
            .map(|r| r.id)
            .collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.protected_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        rank_by_product(&self.recs)
    }
}

/// Admission-time novelty gate: novel items are created as first-class
/// entries, near-duplicates are merged away and lose their identity.
#[derive(Debug, Clone)]
pub struct FrontDoor {
    pub dynamics: Dynamics,
    pub soft_budget: usize,
    pub tau: f64,
    pub recs: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl FrontDoor {
    pub fn new(dynamics: Dynamics, soft_budget: usize, tau: f64, trace: bool) -> Self {
        FrontDoor {
            dynamics,
            soft_budget,
            tau,
            recs: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        if spec.cue.novelty < self.tau {
            let r = make_rec(&self.dynamics, spec, step);
            self.trace
                .push(step, r.id.to_string(), "admit", "-", "flat", Some(r.c), Some(r.m));
            self.recs.push(r);
            self.counters.admissions += 1;
        } else {
            self.counters.merges += 1;
            self.trace
                .push(step, spec.id.to_string(), "merge", "-", "flat", None, None);
        }
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => apply_evidence(&d, r, conf, positive, step),
            None => {
                self.counters.misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => apply_query(&d, r, relevance, step),
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.recs.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.recs.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        rank_by_product(&self.recs)
    }
}

/// Reinforcement-decay store: an item's keep score is its importance cue
/// decayed by time since last touch, with the decay horizon stretched by how
/// often it was touched. Items falling below the floor are dropped at
/// pressure ticks; overflow evicts the lowest score.
#[derive(Debug, Clone)]
pub struct ReinforcedFlat {
    pub dynamics: Dynamics,
    pub cap: usize,
    pub soft_budget: usize,
    pub horizon: f64,
    pub floor: f64,
    pub recs: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl ReinforcedFlat {
    pub fn new(
        dynamics: Dynamics,
        cap: usize,
        soft_budget: usize,
        horizon: f64,
        floor: f64,
        trace: bool,
    ) -> Self {
        ReinforcedFlat {
            dynamics,
            cap,
            soft_budget,
            horizon,
            floor,
            recs: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn score(&self, r: &FlatRec, now: u32) -> f64 {
        let dt = now.saturating_sub(r.last_touched) as f64;
        r.cue.importance_cue * (-dt / (self.horizon * r.touch_count as f64)).exp()
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let r = make_rec(&self.dynamics, spec, step);
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "flat", Some(r.c), Some(r.m));
        self.recs.push(r);
        self.counters.admissions += 1;
        while self.recs.len() > self.cap {
            let victim = self
                .recs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    self.score(a, step)
                        .partial_cmp(&self.score(b, step))
                        .unwrap()
                        .then_with(|| a.id.cmp(&b.id))
                })
                .map(|(i, _)| i)
                .unwrap();
            let r = self.recs.remove(victim);
            self.counters.evictions += 1;
            self.trace
                .push(step, r.id.to_string(), "evict", "flat", "-", Some(r.c), Some(r.m));
        }
    }

    /// Evidence neither reinforces nor touches; only queries do.
    pub fn evidence(&mut self, target: ItemId, _conf: f64, _positive: bool, _step: u32) {
        if !self.recs.iter().any(|r| r.id == target) {
            self.counters.misses += 1;
        }
    }

    pub fn query(&mut self, target: ItemId, _relevance: f64, step: u32) {
        match self.recs.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                r.last_touched = step;
                r.touch_count += 1;
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "flat", "flat", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn tick(&mut self, step: u32) {
        let floor = self.floor;
        let mut kept = Vec::new();
        for r in std::mem::take(&mut self.recs) {
            if self.score(&r, step) >= floor {
                kept.push(r);
            } else {
                self.counters.evictions += 1;
                self.trace
                    .push(step, r.id.to_string(), "evict", "flat", "-", Some(r.c), Some(r.m));
            }
        }
        self.recs = kept;
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.recs.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.recs.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        rank_by_product(&self.recs)
    }
}

pub fn readout_over(
    live: &BTreeSet<ItemId>,
    protected: &BTreeSet<ItemId>,
    q: &QuerySpec,
) -> ReadoutFlags {
    ReadoutFlags {
        prem_ok: q.required_premise_ids.iter().all(|id| live.contains(id)),
        supp_ok: q.required_support_ids.iter().all(|id| live.contains(id)),
        governed_by_false: q
            .forbidden_governing_ids
            .iter()
            .any(|id| protected.contains(id)),
    }
}

pub fn rank_by_product(recs: &[FlatRec]) -> Vec<ItemId> {
    let mut v: Vec<&FlatRec> = recs.iter().collect();
    v.sort_by(|a, b| {
        (b.c * b.m)
            .partial_cmp(&(a.c * a.m))
            .unwrap()
            .then_with(|| a.id.cmp(&b.id))
    });
    v.iter().map(|r| r.id).collect()
}
