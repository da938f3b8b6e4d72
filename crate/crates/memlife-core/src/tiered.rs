//! Two-store baselines: eager paging and importance/recency layering.

use crate::dynamics::Dynamics;
use crate::flat::{apply_evidence, apply_query, make_rec, rank_by_product, readout_over, FlatRec};
use crate::staged::{OpCounters, ReadoutFlags};
use crate::trace::Trace;
use crate::types::{ItemId, ItemSpec, QuerySpec};
use std::collections::BTreeSet;

/// Eager paging: a small shallow FIFO spills its oldest entry into a deep
/// store on every overflow; the deep store is purged down to its best few by
/// confidence-strength product when it grows past a bound.
#[derive(Debug, Clone)]
pub struct TieredStore {
    pub dynamics: Dynamics,
    pub shallow_cap: usize,
    pub deep_purge_above: usize,
    pub deep_keep: usize,
    pub soft_budget: usize,
    pub shallow: Vec<FlatRec>,
    pub deep: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl TieredStore {
    pub fn new(dynamics: Dynamics, soft_budget: usize, trace: bool) -> Self {
        TieredStore {
            dynamics,
            shallow_cap: 3,
            deep_purge_above: 8,
            deep_keep: 5,
            soft_budget,
            shallow: Vec::new(),
            deep: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let r = make_rec(&self.dynamics, spec, step);
        self.trace
            .push(step, r.id.to_string(), "admit", "-", "shallow", Some(r.c), Some(r.m));
        self.shallow.push(r);
        self.counters.admissions += 1;
        while self.shallow.len() > self.shallow_cap {
            let idx = self
                .shallow
                .iter()
                .enumerate()
                .min_by_key(|(_, r)| (r.admitted_step, r.id))
                .map(|(i, _)| i)
                .unwrap();
            let r = self.shallow.remove(idx);
            self.counters.promotions += 1;
            self.trace
                .push(step, r.id.to_string(), "promote", "shallow", "deep", Some(r.c), Some(r.m));
            self.deep.push(r);
        }
        if self.deep.len() > self.deep_purge_above {
            self.deep.sort_by(|a, b| {
                (b.c * b.m)
                    .partial_cmp(&(a.c * a.m))
                    .unwrap()
                    .then_with(|| a.id.cmp(&b.id))
            });
            while self.deep.len() > self.deep_keep {
                let r = self.deep.pop().unwrap();
                self.counters.evictions += 1;
                self.trace
                    .push(step, r.id.to_string(), "evict", "deep", "-", Some(r.c), Some(r.m));
            }
        }
    }

    fn find_mut(&mut self, id: ItemId) -> Option<&mut FlatRec> {
        self.shallow
            .iter_mut()
            .chain(self.deep.iter_mut())
            .find(|r| r.id == id)
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        match self.find_mut(target) {
            Some(r) => apply_evidence(&d, r, conf, positive, step),
            None => {
                self.counters.misses += 1;
                self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
            }
        }
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        match self.find_mut(target) {
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
        if self.shallow.len() + self.deep.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.shallow.iter().chain(self.deep.iter()).map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.live_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        let all: Vec<FlatRec> = self.shallow.iter().chain(self.deep.iter()).cloned().collect();
        rank_by_product(&all)
    }
}

/// Importance store plus recency buffer. High-cue admissions go straight to
/// the never-evicted store; everything else cycles through a FIFO buffer.
/// Strong later evidence rescues a still-buffered item into the store.
#[derive(Debug, Clone)]
pub struct HybridStore {
    pub dynamics: Dynamics,
    pub buffer_cap: usize,
    pub soft_budget: usize,
    pub store_threshold: f64,
    pub rescue_conf: f64,
    pub store: Vec<FlatRec>,
    pub buffer: Vec<FlatRec>,
    pub counters: OpCounters,
    pub trace: Trace,
}

impl HybridStore {
    pub fn new(dynamics: Dynamics, buffer_cap: usize, soft_budget: usize, trace: bool) -> Self {
        HybridStore {
            dynamics,
            buffer_cap,
            soft_budget,
            store_threshold: 0.5,
            rescue_conf: 0.9,
            store: Vec::new(),
            buffer: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
        }
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let r = make_rec(&self.dynamics, spec, step);
        self.counters.admissions += 1;
        if spec.cue.importance_cue >= self.store_threshold {
            self.trace
                .push(step, r.id.to_string(), "admit", "-", "store", Some(r.c), Some(r.m));
            self.store.push(r);
        } else {
            self.trace
                .push(step, r.id.to_string(), "admit", "-", "buffer", Some(r.c), Some(r.m));
            self.buffer.push(r);
            while self.buffer.len() > self.buffer_cap {
                let idx = self
                    .buffer
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, r)| (r.admitted_step, r.id))
                    .map(|(i, _)| i)
                    .unwrap();
                let r = self.buffer.remove(idx);
                self.counters.evictions += 1;
                self.trace
                    .push(step, r.id.to_string(), "evict", "buffer", "-", Some(r.c), Some(r.m));
            }
        }
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let d = self.dynamics;
        let scaled = d.scaled_evidence(conf);
        if let Some(r) = self.store.iter_mut().find(|r| r.id == target) {
            apply_evidence(&d, r, conf, positive, step);
            return;
        }
        if let Some(idx) = self.buffer.iter().position(|r| r.id == target) {
            apply_evidence(&d, &mut self.buffer[idx], conf, positive, step);
            if positive && scaled >= self.rescue_conf {
                let r = self.buffer.remove(idx);
                self.counters.promotions += 1;
                self.trace
                    .push(step, r.id.to_string(), "promote", "buffer", "store", Some(r.c), Some(r.m));
                self.store.push(r);
            }
            return;
        }
        self.counters.misses += 1;
        self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
    }

    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let d = self.dynamics;
        if let Some(r) = self
            .store
            .iter_mut()
            .chain(self.buffer.iter_mut())
            .find(|r| r.id == target)
        {
            apply_query(&d, r, relevance, step);
        } else {
            self.counters.misses += 1;
            self.counters.query_misses += 1;
            self.trace.push(step, target.to_string(), "miss", "-", "-", None, None);
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.store.len() + self.buffer.len() > self.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    pub fn live_ids(&self) -> BTreeSet<ItemId> {
        self.store.iter().chain(self.buffer.iter()).map(|r| r.id).collect()
    }

    pub fn protected_ids(&self) -> BTreeSet<ItemId> {
        self.store.iter().map(|r| r.id).collect()
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        readout_over(&self.live_ids(), &self.protected_ids(), q)
    }

    pub fn ranking(&self) -> Vec<ItemId> {
        let all: Vec<FlatRec> = self.store.iter().chain(self.buffer.iter()).cloned().collect();
        rank_by_product(&all)
    }
}
