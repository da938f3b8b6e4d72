//! Three-stage store with settlement, compression, and pressure maintenance.
//!
//! Items are admitted into the transient stage. Settlement runs only when a
//! stage exceeds its cap: gate-eligible items are promoted upward first, then
//! the stage sheds load in a stage-specific way (transient evicts, working
//! compresses, durable drops the least recently touched). Pressure ticks run a
//! single maintenance eviction in working when occupancy is at least two,
//! targeting the least recently touched item that fails the durable validity
//! gate.
//!
//! The same machinery hosts the ablations: a confidence-only variant (no
//! strength channel), a strength-only variant (no validity channel), and a
//! single-scalar variant that collapses both channels into one number.

use crate::dynamics::Dynamics;
use crate::trace::Trace;
use crate::types::{
    CapacityConfig, CueFeatures, ItemId, ItemSpec, Labels, QuerySpec, Stage, SUMMARY_ID_BASE,
};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMode {
    /// Confidence and strength, ranked by their product.
    Full,
    /// Strength channel removed; ranking and gates use confidence alone.
    ConfidenceOnly,
    /// Validity channel removed; ranking and gates use strength alone.
    StrengthOnly,
    /// One scalar carries both roles.
    SingleState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub tau_c_working: f64,
    pub tau_r_working: f64,
    pub tau_c_durable: f64,
    pub tau_r_durable: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_c_working: 0.50,
            tau_r_working: 0.08,
            tau_c_durable: 0.905,
            tau_r_durable: 0.20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummaryMember {
    pub id: ItemId,
    pub key: String,
    pub c_at_compress: f64,
    pub m_at_compress: f64,
    pub labels: Labels,
    pub cue: CueFeatures,
}

#[derive(Debug, Clone)]
pub struct Rec {
    pub id: ItemId,
    pub key: String,
    pub stage: Stage,
    pub c: f64,
    pub m: f64,
    /// Single-scalar state for the collapsed variant.
    pub s: f64,
    pub last_touched: u32,
    pub touch_count: u32,
    pub cue: CueFeatures,
    pub labels: Labels,
    /// Non-empty marks a compression summary.
    pub members: Vec<SummaryMember>,
}

impl Rec {
    pub fn is_summary(&self) -> bool {
        !self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OpCounters {
    pub admissions: u64,
    pub promotions: u64,
    pub compressions: u64,
    pub evictions: u64,
    pub merges: u64,
    pub misses: u64,
    pub query_misses: u64,
    pub budget_hits: u64,
    pub budget_checks: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadoutFlags {
    pub prem_ok: bool,
    pub supp_ok: bool,
    pub governed_by_false: bool,
}

#[derive(Debug, Clone)]
pub struct StagedStore {
    pub mode: StateMode,
    pub dynamics: Dynamics,
    pub caps: CapacityConfig,
    pub thresholds: Thresholds,
    pub recs: Vec<Rec>,
    pub counters: OpCounters,
    pub trace: Trace,
    next_summary_id: ItemId,
}

impl StagedStore {
    pub fn new(mode: StateMode, dynamics: Dynamics, caps: CapacityConfig, trace: bool) -> Self {
        StagedStore {
            mode,
            dynamics,
            caps,
            thresholds: Thresholds::default(),
            recs: Vec::new(),
            counters: OpCounters::default(),
            trace: Trace::new(trace),
            next_summary_id: SUMMARY_ID_BASE,
        }
    }

    pub fn live_count(&self) -> usize {
        self.recs.len()
    }

    fn stage_count(&self, stage: Stage) -> usize {
        self.recs.iter().filter(|r| r.stage == stage).count()
    }

    fn stage_cap(&self, stage: Stage) -> usize {
        match stage {
            Stage::Transient => self.caps.transient_cap,
            Stage::Working => self.caps.working_cap,
            Stage::Durable => self.caps.durable_cap,
        }
    }

    /// Retention-priority key; lower is evicted or compressed first.
    pub fn rank_key(&self, r: &Rec) -> f64 {
        match self.mode {
            StateMode::Full => r.c * r.m,
            StateMode::ConfidenceOnly => r.c,
            StateMode::StrengthOnly => r.m,
            StateMode::SingleState => r.s,
        }
    }

    fn gate_working(&self, r: &Rec) -> bool {
        let t = &self.thresholds;
        match self.mode {
            StateMode::Full => r.c >= t.tau_c_working && r.m >= t.tau_r_working,
            StateMode::ConfidenceOnly => r.c >= t.tau_c_working,
            StateMode::StrengthOnly => r.m >= t.tau_r_working,
            StateMode::SingleState => r.s >= t.tau_c_working.max(t.tau_r_working),
        }
    }

    fn gate_durable(&self, r: &Rec) -> bool {
        let t = &self.thresholds;
        match self.mode {
            StateMode::Full => r.c >= t.tau_c_durable && r.m >= t.tau_r_durable,
            StateMode::ConfidenceOnly => r.c >= t.tau_c_durable,
            StateMode::StrengthOnly => r.m >= t.tau_r_durable,
            StateMode::SingleState => r.s >= t.tau_c_durable.max(t.tau_r_durable),
        }
    }

    /// Durable-grade validity; working items failing this are grind
    /// candidates under pressure.
    fn valid_under_pressure(&self, r: &Rec) -> bool {
        let t = &self.thresholds;
        match self.mode {
            StateMode::Full | StateMode::ConfidenceOnly => r.c >= t.tau_c_durable,
            StateMode::StrengthOnly => r.m >= t.tau_r_durable,
            StateMode::SingleState => r.s >= t.tau_c_durable,
        }
    }

    fn find(&self, id: ItemId) -> Option<usize> {
        self.recs.iter().position(|r| r.id == id && !r.is_summary())
    }

    pub fn admit(&mut self, spec: &ItemSpec, step: u32) {
        let d = &self.dynamics;
        let c0 = d.admission_confidence(spec.cue.evidence_conf);
        let m0 = match self.mode {
            StateMode::ConfidenceOnly => 0.0,
            _ => d.initial_strength(spec.strength_input),
        };
        let s0 = d.initial_strength(spec.strength_input);
        let rec = Rec {
            id: spec.id,
            key: spec.content_key.clone(),
            stage: Stage::Transient,
            c: c0,
            m: m0,
            s: s0,
            last_touched: step,
            touch_count: 1,
            cue: spec.cue,
            labels: spec.labels,
            members: Vec::new(),
        };
        self.trace.push(
            step,
            rec.id.to_string(),
            "admit",
            "-",
            "transient",
            Some(rec.c),
            Some(rec.m),
        );
        self.recs.push(rec);
        self.counters.admissions += 1;
        self.settle(step);
    }

    pub fn evidence(&mut self, target: ItemId, conf: f64, positive: bool, step: u32) {
        let Some(idx) = self.find(target) else {
            self.counters.misses += 1;
            self.trace
                .push(step, target.to_string(), "miss", "-", "-", None, None);
            return;
        };
        let d = self.dynamics;
        let conf = d.scaled_evidence(conf);
        let stage = self.recs[idx].stage;
        match self.mode {
            StateMode::SingleState => {
                let s = self.recs[idx].s;
                let raw = d.lambda(stage) * d.evidence_input(conf) * d.confidence_ratio(positive);
                let p = raw.clamp(d.p_min, 1.0);
                self.recs[idx].s = d.update_confidence(s, p, positive);
            }
            _ => {
                let r = &self.recs[idx];
                let p = d.plasticity(stage, conf, positive, r.m);
                let c_new = d.update_confidence(r.c, p, positive);
                let b = d.strength_base(conf, r.cue.shock);
                let m_new = match self.mode {
                    StateMode::ConfidenceOnly => 0.0,
                    _ => d.update_strength(r.m, p, b),
                };
                self.recs[idx].c = c_new;
                self.recs[idx].m = m_new;
            }
        }
        self.recs[idx].last_touched = step;
        self.recs[idx].touch_count += 1;
        let r = &self.recs[idx];
        self.trace.push(
            step,
            r.id.to_string(),
            "touch",
            r.stage.name(),
            r.stage.name(),
            Some(r.c),
            Some(r.m),
        );
    }

    /// A query hit: a strength-side touch that leaves confidence alone. The
    /// single-scalar variant has nowhere else to put it, so the scalar moves.
    pub fn query(&mut self, target: ItemId, relevance: f64, step: u32) {
        let Some(idx) = self.find(target) else {
            self.counters.misses += 1;
            self.counters.query_misses += 1;
            self.trace
                .push(step, target.to_string(), "miss", "-", "-", None, None);
            return;
        };
        let d = self.dynamics;
        let rel = d.scaled_evidence(relevance);
        let stage = self.recs[idx].stage;
        match self.mode {
            StateMode::SingleState => {
                let raw = d.lambda(stage) * d.evidence_input(rel);
                let p = raw.clamp(d.p_min, 1.0);
                let s = self.recs[idx].s;
                self.recs[idx].s = d.update_confidence(s, p, true);
            }
            StateMode::ConfidenceOnly => {}
            _ => {
                let r = &self.recs[idx];
                let p = d.plasticity(stage, rel, true, r.m);
                let b = d.strength_base(rel, r.cue.shock);
                self.recs[idx].m = d.update_strength(r.m, p, b);
            }
        }
        self.recs[idx].last_touched = step;
        self.recs[idx].touch_count += 1;
        let r = &self.recs[idx];
        self.trace.push(
            step,
            r.id.to_string(),
            "touch",
            r.stage.name(),
            r.stage.name(),
            Some(r.c),
            Some(r.m),
        );
    }

    /// Conflict revision on the same anchor: content and validity are
    /// replaced, touch metadata resets, consolidated strength carries over.
    pub fn revise(&mut self, target: ItemId, new_key: &str, new_conf: f64, step: u32) -> bool {
        let Some(idx) = self.find(target) else {
            return false;
        };
        let c0 = self.dynamics.admission_confidence(new_conf);
        let r = &mut self.recs[idx];
        r.key = new_key.to_string();
        r.c = c0;
        if self.mode == StateMode::SingleState {
            r.s = c0;
        }
        r.last_touched = step;
        r.touch_count = 1;
        let (id, stage, c, m) = (r.id, r.stage, r.c, r.m);
        self.trace.push(
            step,
            id.to_string(),
            "revise",
            stage.name(),
            stage.name(),
            Some(c),
            Some(m),
        );
        true
    }

    /// Pressure maintenance: one working eviction per tick, least recently
    /// touched among items failing the durable validity gate, only when the
    /// stage holds at least two items.
    pub fn tick(&mut self, step: u32) {
        let working: Vec<usize> = self
            .recs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.stage == Stage::Working)
            .map(|(i, _)| i)
            .collect();
        if working.len() < 2 {
            return;
        }
        let victim = working
            .into_iter()
            .filter(|&i| !self.valid_under_pressure(&self.recs[i]))
            .min_by(|&a, &b| {
                let ra = &self.recs[a];
                let rb = &self.recs[b];
                (ra.last_touched, ra.id).cmp(&(rb.last_touched, rb.id))
            });
        if let Some(idx) = victim {
            let r = self.recs.remove(idx);
            self.counters.evictions += 1;
            self.trace.push(
                step,
                r.id.to_string(),
                "evict",
                "working",
                "-",
                Some(r.c),
                Some(r.m),
            );
        }
    }

    fn promote_eligible(&mut self, from: Stage, to: Stage, step: u32) {
        let mut ids: Vec<ItemId> = self
            .recs
            .iter()
            .filter(|r| {
                r.stage == from
                    && match to {
                        Stage::Working => self.gate_working(r),
                        Stage::Durable => self.gate_durable(r),
                        Stage::Transient => false,
                    }
            })
            .map(|r| r.id)
            .collect();
        ids.sort_unstable();
        for id in ids {
            if let Some(r) = self.recs.iter_mut().find(|r| r.id == id && r.stage == from) {
                r.stage = to;
                let (c, m) = (r.c, r.m);
                self.counters.promotions += 1;
                self.trace.push(
                    step,
                    id.to_string(),
                    "promote",
                    from.name(),
                    to.name(),
                    Some(c),
                    Some(m),
                );
            }
        }
    }

    fn evict_lowest(&mut self, stage: Stage, step: u32) {
        let victim = self
            .recs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.stage == stage)
            .min_by(|(_, a), (_, b)| {
                let ka = self.rank_key(a);
                let kb = self.rank_key(b);
                ka.partial_cmp(&kb)
                    .unwrap()
                    .then_with(|| a.id.cmp(&b.id))
            })
            .map(|(i, _)| i);
        if let Some(idx) = victim {
            let r = self.recs.remove(idx);
            self.counters.evictions += 1;
            self.trace.push(
                step,
                r.id.to_string(),
                "evict",
                stage.name(),
                "-",
                Some(r.c),
                Some(r.m),
            );
        }
    }

    fn evict_stalest(&mut self, stage: Stage, step: u32) {
        let victim = self
            .recs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.stage == stage)
            .min_by(|(_, a), (_, b)| (a.last_touched, a.id).cmp(&(b.last_touched, b.id)))
            .map(|(i, _)| i);
        if let Some(idx) = victim {
            let r = self.recs.remove(idx);
            self.counters.evictions += 1;
            self.trace.push(
                step,
                r.id.to_string(),
                "evict",
                stage.name(),
                "-",
                Some(r.c),
                Some(r.m),
            );
        }
    }

    fn compress_working(&mut self, step: u32) {
        let count = self.stage_count(Stage::Working);
        let cap = self.stage_cap(Stage::Working);
        if count <= cap {
            return;
        }
        let excess = count - cap;
        let group_size = (excess + 1).min(count);
        let mut working: Vec<usize> = self
            .recs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.stage == Stage::Working)
            .map(|(i, _)| i)
            .collect();
        working.sort_by(|&a, &b| {
            let ka = self.rank_key(&self.recs[a]);
            let kb = self.rank_key(&self.recs[b]);
            ka.partial_cmp(&kb)
                .unwrap()
                .then_with(|| self.recs[a].id.cmp(&self.recs[b].id))
        });
        let group_idx: Vec<usize> = working.into_iter().take(group_size).collect();
        let mut group: Vec<Rec> = Vec::new();
        let mut sorted = group_idx.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        for i in sorted {
            group.push(self.recs.remove(i));
        }
        let n = group.len() as f64;
        let c = group.iter().map(|r| r.c).sum::<f64>() / n;
        let m = group.iter().map(|r| r.m).fold(f64::MIN, f64::max);
        let s = group.iter().map(|r| r.s).sum::<f64>() / n;
        let mut members = Vec::new();
        for r in &group {
            if r.is_summary() {
                members.extend(r.members.iter().cloned());
            } else {
                members.push(SummaryMember {
                    id: r.id,
                    key: r.key.clone(),
                    c_at_compress: r.c,
                    m_at_compress: r.m,
                    labels: r.labels,
                    cue: r.cue,
                });
            }
            self.trace.push(
                step,
                r.id.to_string(),
                "compress",
                "working",
                "working",
                Some(r.c),
                Some(r.m),
            );
        }
        let id = self.next_summary_id;
        self.next_summary_id += 1;
        self.recs.push(Rec {
            id,
            key: format!("summary{}", id - SUMMARY_ID_BASE),
            stage: Stage::Working,
            c,
            m,
            s,
            last_touched: step,
            touch_count: 1,
            cue: CueFeatures::default(),
            labels: Labels::default(),
            members,
        });
        self.counters.compressions += 1;
    }

    fn settle(&mut self, step: u32) {
        if self.stage_count(Stage::Transient) > self.stage_cap(Stage::Transient) {
            self.promote_eligible(Stage::Transient, Stage::Working, step);
            if self.stage_count(Stage::Working) > self.stage_cap(Stage::Working) {
                self.settle_working(step);
            }
            while self.stage_count(Stage::Transient) > self.stage_cap(Stage::Transient) {
                self.evict_lowest(Stage::Transient, step);
            }
        }
    }

    fn settle_working(&mut self, step: u32) {
        self.promote_eligible(Stage::Working, Stage::Durable, step);
        while self.stage_count(Stage::Durable) > self.stage_cap(Stage::Durable) {
            self.evict_stalest(Stage::Durable, step);
        }
        while self.stage_count(Stage::Working) > self.stage_cap(Stage::Working) {
            self.compress_working(step);
        }
    }

    pub fn end_event(&mut self) {
        self.counters.budget_checks += 1;
        if self.live_count() > self.caps.soft_budget {
            self.counters.budget_hits += 1;
        }
    }

    fn member_fidelity_channel(&self) -> bool {
        matches!(self.mode, StateMode::Full | StateMode::StrengthOnly)
    }

    /// An admitted item is answerable when live as an atom, or when inside a
    /// summary whose record of it kept enough strength to reconstruct it.
    pub fn answerable(&self, id: ItemId) -> bool {
        for r in &self.recs {
            if r.is_summary() {
                if self.member_fidelity_channel()
                    && r.members
                        .iter()
                        .any(|m| m.id == id && m.m_at_compress >= self.thresholds.tau_r_durable)
                {
                    return true;
                }
            } else if r.id == id {
                return true;
            }
        }
        false
    }

    pub fn answerable_ids(&self) -> BTreeSet<ItemId> {
        let mut out = BTreeSet::new();
        for r in &self.recs {
            if r.is_summary() {
                if self.member_fidelity_channel() {
                    for m in &r.members {
                        if m.m_at_compress >= self.thresholds.tau_r_durable {
                            out.insert(m.id);
                        }
                    }
                }
            } else {
                out.insert(r.id);
            }
        }
        out
    }

    /// Items the controller has committed to keep: working and durable atoms
    /// plus answerable constituents of summaries held there.
    pub fn protected_ids(&self) -> BTreeSet<ItemId> {
        let mut out = BTreeSet::new();
        for r in &self.recs {
            if r.stage == Stage::Transient {
                continue;
            }
            if r.is_summary() {
                if self.member_fidelity_channel() {
                    for m in &r.members {
                        if m.m_at_compress >= self.thresholds.tau_r_durable {
                            out.insert(m.id);
                        }
                    }
                }
            } else {
                out.insert(r.id);
            }
        }
        out
    }

    pub fn readout(&self, q: &QuerySpec) -> ReadoutFlags {
        let protected = self.protected_ids();
        ReadoutFlags {
            prem_ok: q.required_premise_ids.iter().all(|id| self.answerable(*id)),
            supp_ok: q.required_support_ids.iter().all(|id| self.answerable(*id)),
            governed_by_false: q
                .forbidden_governing_ids
                .iter()
                .any(|id| protected.contains(id)),
        }
    }

    /// Retrieval ranking over live atoms: durable first, then working, then
    /// transient; within a stage by retention key descending, ids ascending.
    pub fn ranking(&self) -> Vec<ItemId> {
        let mut atoms: Vec<&Rec> = self.recs.iter().filter(|r| !r.is_summary()).collect();
        atoms.sort_by(|a, b| {
            let sa = match a.stage {
                Stage::Durable => 2,
                Stage::Working => 1,
                Stage::Transient => 0,
            };
            let sb = match b.stage {
                Stage::Durable => 2,
                Stage::Working => 1,
                Stage::Transient => 0,
            };
            sb.cmp(&sa)
                .then_with(|| {
                    self.rank_key(b)
                        .partial_cmp(&self.rank_key(a))
                        .unwrap()
                })
                .then_with(|| a.id.cmp(&b.id))
        });
        atoms.iter().map(|r| r.id).collect()
    }
}
