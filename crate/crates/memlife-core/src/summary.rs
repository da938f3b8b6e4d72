//! Periodic re-summarization engine.
//!
//! The pool accumulates items between pressure ticks; each tick closes a
//! cycle and rewrites the summary by keeping a rule-selected subset and
//! dropping the rest. The engine records the first cycle at which the
//! workload premise fell out of the kept set.

use crate::dynamics::Dynamics;
use crate::flat::{apply_evidence, apply_query, make_rec, rank_by_product, readout_over, FlatRec};
use crate::staged::{OpCounters, ReadoutFlags};
use crate::trace::Trace;
use crate::types::{ItemId, ItemSpec, QuerySpec};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SummaryRule {
    /// Keep items whose strength consolidated and whose validity held up.
    StrengthAware { min_m: f64, min_c: f64 },
    /// Keep items scoring above a fixed salience threshold.
    FlatSalience { theta: f64 },
    /// Keep the top half by confidence.
    ConfidenceHalf,
    /// Keep the most recently touched half.
    RecencyHalf,
    /// Keep the most frequently touched half.
    FrequencyHalf,
}

#[derive(Debug, Clone)]
pub struct SummaryCycle {
    pub dynamics: Dynamics,
    pub rule: SummaryRule,
    pub soft_budget: usize,
    pub pool: Vec<FlatRec>,
    pub cycle: u32,
    pub premise_ids: Vec<ItemId>,
    pub premise_lost_cycle: Option<u32>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl SummaryCycle {
    pub fn new(dynamics: Dynamics, rule: SummaryRule, soft_budget: usize, trace: bool) -> Self {
        SummaryCycle {
            dynamics,
            rule,
            soft_budget,
            pool: Vec::new(),
            cycle: 0,
            premise_ids: Vec::new(),
            premise_lost_cycle: None,
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        if spec.labels.is_premise {
            self.premise_ids.push(spec.id);
        }
        let r = make_rec(&self.dynamics, spec, step);
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "pool", Some(r.c), Some(r.m));
        self.pool.push(r);
        self.counters.admissions += 1;
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        match self.pool.iter_mut().find(|r| r.id == target) {
            Some(r) => apply_evidence(&d, r, conf, positive, step),
            None => {
                self.counters.misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        match self.pool.iter_mut().find(|r| r.id == target) {
            Some(r) => {
                apply_query(&d, r, relevance, step);
                let (c, m) = (r.c, r.m);
                self.trace
                    .push(step, target.to_string(), "touch", "pool", "pool", Some(c), Some(m));
            }
            None => {
                self.counters.misses += 1;
                self.counters.query_misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    fn salience(&self, r: &FlatRec) -> f64 {
        self.dynamics.salience_score(
            r.cue.importance_cue,
            r.cue.constraint_flag,
            r.strength_input,
            r.cue.evidence_conf,
            r.cue.shock,
        )
    }

    fn keep_ids(&self) -> BTreeSet<ItemId> {
        match self.rule {
            SummaryRule::StrengthAware { min_m, min_c } => self
                .pool
                .iter()
                .filter(|r| r.m >= min_m && r.c >= min_c)
                .map(|r| r.id)
                .collect(),
            SummaryRule::FlatSalience { theta } => self
                .pool
                .iter()
                .filter(|r| self.salience(r) >= theta)
                .map(|r| r.id)
                .collect(),
            SummaryRule::ConfidenceHalf => self.top_half(|r| r.c),
            SummaryRule::RecencyHalf => self.top_half(|r| r.last_touched as f64),
            SummaryRule::FrequencyHalf => self.top_half(|r| r.touch_count as f64),
        }
    }

    fn top_half(&self, key: impl Fn(&FlatRec) -> f64) -> BTreeSet<ItemId> {
        let mut v: Vec<&FlatRec> = self.pool.iter().collect();
        // Ties keep the higher id: the lower id is treated as written first
        // and summarized away first.
        v.sort_by(|a, b| {
            key(b)
                .partial_cmp(&key(a))
                .unwrap()
                .then_with(|| b.id.cmp(&a.id))
        });
        v.iter().take(self.pool.len() / 2).map(|r| r.id).collect()
    }

    /// Close a cycle: rewrite the running summary under the keep rule.
    pub fn tick(&mut self, step: u32) {
        self.cycle += 1;
        let keep = self.keep_ids();
        let mut kept = Vec::new();
        for r in std::mem::take(&mut self.pool) {
            if keep.contains(&r.id) {
                kept.push(r);
            } else {
                self.counters.evictions += 1;
                self.trace
                    .push(step, r.id.to_string(), "compress", "pool", "-", Some(r.c), Some(r.m));
            }
        }
        self.pool = kept;
        self.counters.compressions += 1;
        if self.premise_lost_cycle.is_none()
            && !self.premise_ids.is_empty()
            && !self
                .premise_ids
                .iter()
                .all(|id| self.pool.iter().any(|r| r.id == *id))
        {
            self.premise_lost_cycle = Some(self.cycle);
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.pool.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.pool.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        rank_by_product(&self.pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CueFeatures, Labels};

    fn spec(id: ItemId, conf: f64, u: f64, premise: bool) -> ItemSpec {
        ItemSpec {
            id,
            content_key: format!("i{id}"),
            cue: CueFeatures { evidence_conf: conf, ..Default::default() },
            labels: Labels { is_premise: premise, ..Default::default() },
            strength_input: u,
        }
    }

    #[test]
    fn confidence_half_drops_low_confidence_premise_first_cycle() {
        let mut s = SummaryCycle::new(
            Dynamics::default(),
            SummaryRule::ConfidenceHalf,
            16,
            false,
        );
        s.admit(&spec(0, 0.95, 0.9, true), 1);
        for i in 1..=5 {
            s.admit(&spec(i, 0.96, 0.0, false), 1 + i as u32);
        }
        s.tick(10); // keep 3 of 6 by confidence: premise (.95) is lowest
        assert_eq!(s.premise_lost_cycle, Some(1));
        assert_eq!(s.pool.len(), 3);
    }

    #[test]
    fn strength_aware_keeps_consolidated_premise() {
        let mut s = SummaryCycle::new(
            Dynamics::default(),
            SummaryRule::StrengthAware { min_m: 0.08, min_c: 0.5 },
            16,
            false,
        );
        s.admit(&spec(0, 0.95, 0.9, true), 1); // m .272
        s.admit(&spec(1, 0.96, 0.0, false), 2); // m .02
        s.admit(&spec(2, 0.96, 0.0, false), 3);
        s.tick(6);
        assert_eq!(s.premise_lost_cycle, None);
        assert_eq!(s.live_ids().into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn recency_half_ties_keep_higher_id() {
        let mut s = SummaryCycle::new(Dynamics::default(), SummaryRule::RecencyHalf, 16, false);
        s.admit(&spec(0, 0.9, 0.0, false), 1);
        s.admit(&spec(1, 0.9, 0.0, false), 1);
        s.admit(&spec(2, 0.9, 0.0, false), 1);
        s.admit(&spec(3, 0.9, 0.0, false), 1);
        s.tick(5); // all tied on lt: keep ids 3, 2
        let ids: Vec<ItemId> = s.live_ids().into_iter().collect();
        assert_eq!(ids, vec![2, 3]);
    }

    #[test]
    fn queries_consolidate_strength_for_later_keeps() {
        let mut s = SummaryCycle::new(
            Dynamics::default(),
            SummaryRule::StrengthAware { min_m: 0.08, min_c: 0.5 },
            16,
            false,
        );
        s.admit(&spec(1, 0.96, 0.0, false), 1); // m .02: would be dropped
        s.query(1, 1.0, 2); // strength touch lifts it over the keep bar
        assert!(s.pool[0].m >= 0.08, "m after touch {}", s.pool[0].m);
        s.tick(5);
        assert!(s.live_ids().contains(&1));
    }
}
