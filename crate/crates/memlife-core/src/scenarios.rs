//! Seeded diagnostic stream generators and the regime registry.
//!
//! Every generator is a pure function of (regime name, episode index, base
//! seed). Policies never see the generator; they only see the event stream,
//! so every policy in a cell replays byte-identical inputs.

use crate::dynamics::Dynamics;
use crate::rng::episode_rng;
use crate::types::{
    CapacityConfig, CueFeatures, Event, ItemId, ItemSpec, Labels, QuerySpec, ScenarioStream,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Named capacity settings for the load sweep.
pub const CAPACITY_NAMES: [&str; 5] = ["very_tight", "tight", "default", "roomy", "very_roomy"];

pub fn capacity_config(name: &str) -> Option<CapacityConfig> {
    let (t, w, d, flat, soft) = match name {
        "very_tight" => (1, 4, 2, 7, 4),
        "tight" => (2, 5, 3, 10, 6),
        "default" => (3, 6, 4, 13, 8),
        "roomy" => (6, 8, 4, 18, 11),
        "very_roomy" => (9, 9, 4, 22, 13),
        _ => return None,
    };
    Some(CapacityConfig {
        transient_cap: t,
        working_cap: w,
        durable_cap: d,
        flat_cap: flat,
        soft_budget: soft,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    PremiseRealization,
    Heavy(&'static str),
    GateStrength,
    Quadrant,
    StrengthSource(Source),
    ImplicitHeuristic,
    CompressionCycle,
}

/// Where the strength-channel input for an admission comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Oracle,
    Noisy,
    CoarseCue,
    GenericProxy,
}

#[derive(Debug, Clone)]
pub struct RegimeSpec {
    pub name: &'static str,
    pub caps: CapacityConfig,
    pub policies: &'static [&'static str],
    pub metrics: &'static [&'static str],
    kind: Kind,
}

const COLS_PR: &[&str] = &[
    "adm", "prem", "supp", "behav", "crit_loss", "final_load", "non_crit", "budget_hit",
];
const COLS_SENS: &[&str] = &["prem", "supp", "behav", "crit_loss", "final_load"];
const COLS_HEAVY: &[&str] = &[
    "recall", "imp_ret", "final_load", "non_crit", "budget_hit", "regret", "useful", "write_amp",
    "hit_at_1", "mrr",
];
const COLS_GATE: &[&str] = &["prem", "supp", "behav", "false_prem"];
const COLS_QUAD: &[&str] = &[
    "hc_hs", "mc_hs", "hc_ls", "lc_ls", "good_prot", "bad_prot", "local_prot", "prot_load", "load",
];
const COLS_SRC: &[&str] = &[
    "prem", "supp", "behav", "false_prem", "local_residue", "prot_load", "load",
];
const COLS_IMPL: &[&str] = &["prem", "supp", "behav", "false_prem", "residue"];
const COLS_CC: &[&str] = &["prem", "supp", "behav", "residue", "details", "loss_cycle"];

const POL_PR: &[&str] = &["stagemem", "confidence_only", "single_state", "single_layer"];
const POL_SENS: &[&str] = &["stagemem"];
const POL_HEAVY: &[&str] = &[
    "stagemem", "single_layer", "front_door", "aggressive_tiering", "hybrid_layering",
    "reinforced_flat",
];
const POL_GATE: &[&str] = &["front_door", "confidence_only", "strength_only", "stagemem"];
const POL_QUAD: &[&str] = &[
    "stagemem", "cue_aware_flat", "binary_flag", "confidence_only", "confidence_flat",
];
const POL_SRC_ORACLE: &[&str] = &["stagemem", "generic_importance"];
const POL_SRC: &[&str] = &["stagemem"];
const POL_IMPL: &[&str] = &[
    "recency", "frequency", "query_relevance", "generic_importance", "cue_aware_flat", "stagemem",
];
const POL_CC: &[&str] = &[
    "strength_aware", "confidence_only_summary", "flat_salience", "frequency_summary",
    "recency_summary",
];

fn caps(t: usize, w: usize, d: usize, flat: usize, soft: usize) -> CapacityConfig {
    CapacityConfig {
        transient_cap: t,
        working_cap: w,
        durable_cap: d,
        flat_cap: flat,
        soft_budget: soft,
    }
}

fn registry() -> Vec<RegimeSpec> {
    let pr_caps = caps(3, 6, 7, 19, 10);
    let probe_caps = caps(5, 3, 2, 7, 7);
    let mut v = vec![
        RegimeSpec {
            name: "premise_realization",
            caps: pr_caps,
            policies: POL_PR,
            metrics: COLS_PR,
            kind: Kind::PremiseRealization,
        },
        RegimeSpec {
            name: "heavy",
            caps: capacity_config("default").unwrap(),
            policies: POL_HEAVY,
            metrics: COLS_HEAVY,
            kind: Kind::Heavy("default"),
        },
    ];
    for setting in ["very_tight", "tight", "roomy", "very_roomy"] {
        let name: &'static str = match setting {
            "very_tight" => "heavy_very_tight",
            "tight" => "heavy_tight",
            "roomy" => "heavy_roomy",
            _ => "heavy_very_roomy",
        };
        v.push(RegimeSpec {
            name,
            caps: capacity_config(setting).unwrap(),
            policies: POL_HEAVY,
            metrics: COLS_HEAVY,
            kind: Kind::Heavy(setting),
        });
    }
    v.push(RegimeSpec {
        name: "gate_strength",
        caps: caps(3, 3, 2, 12, 8),
        policies: POL_GATE,
        metrics: COLS_GATE,
        kind: Kind::GateStrength,
    });
    v.push(RegimeSpec {
        name: "quadrant",
        caps: probe_caps,
        policies: POL_QUAD,
        metrics: COLS_QUAD,
        kind: Kind::Quadrant,
    });
    for (name, source, policies) in [
        ("strength_source_oracle", Source::Oracle, POL_SRC_ORACLE),
        ("strength_source_noisy", Source::Noisy, POL_SRC),
        ("strength_source_coarse_cue", Source::CoarseCue, POL_SRC),
        ("strength_source_generic_proxy", Source::GenericProxy, POL_SRC),
    ] {
        v.push(RegimeSpec {
            name,
            caps: probe_caps,
            policies,
            metrics: COLS_SRC,
            kind: Kind::StrengthSource(source),
        });
    }
    v.push(RegimeSpec {
        name: "implicit_heuristic",
        caps: caps(3, 3, 2, 7, 7),
        policies: POL_IMPL,
        metrics: COLS_IMPL,
        kind: Kind::ImplicitHeuristic,
    });
    v.push(RegimeSpec {
        name: "compression_cycle",
        caps: caps(3, 3, 2, 7, 12),
        policies: POL_CC,
        metrics: COLS_CC,
        kind: Kind::CompressionCycle,
    });
    for name in [
        "sensitivity_shock_0.50",
        "sensitivity_shock_1.00",
        "sensitivity_shock_1.50",
        "sensitivity_conf_0.70",
        "sensitivity_conf_0.85",
        "sensitivity_conf_1.00",
        "sensitivity_fixed_0.02",
        "sensitivity_fixed_0.10",
        "sensitivity_fixed_0.20",
        "sensitivity_fixed_0.30",
    ] {
        v.push(RegimeSpec {
            name,
            caps: pr_caps,
            policies: POL_SENS,
            metrics: COLS_SENS,
            kind: Kind::PremiseRealization,
        });
    }
    v
}

pub fn all_regimes() -> Vec<RegimeSpec> {
    registry()
}

pub fn regime_names() -> Vec<&'static str> {
    registry().iter().map(|r| r.name).collect()
}

pub fn regime(name: &str) -> Option<RegimeSpec> {
    registry().into_iter().find(|r| r.name == name)
}

/// Knob overrides carried by a regime name (the sensitivity rows). Everything
/// else passes the base dynamics through untouched.
pub fn dynamics_for_regime(name: &str, base: Dynamics) -> Dynamics {
    let mut d = base;
    match name {
        "sensitivity_shock_0.50" => d.shock_scale = 0.5,
        "sensitivity_shock_1.00" => d.shock_scale = 1.0,
        "sensitivity_shock_1.50" => d.shock_scale = 1.5,
        "sensitivity_conf_0.70" => d.confidence_scale = 0.70,
        "sensitivity_conf_0.85" => d.confidence_scale = 0.85,
        "sensitivity_conf_1.00" => d.confidence_scale = 1.0,
        "sensitivity_fixed_0.02" => d.fixed_strength = Some(0.02),
        "sensitivity_fixed_0.10" => d.fixed_strength = Some(0.10),
        "sensitivity_fixed_0.20" => d.fixed_strength = Some(0.20),
        "sensitivity_fixed_0.30" => d.fixed_strength = Some(0.30),
        _ => {}
    }
    d
}

/// Generate the stream for one (regime, episode) cell.
pub fn generate(name: &str, episode: u64, base_seed: u64) -> Option<ScenarioStream> {
    let spec = regime(name)?;
    let mut rng = episode_rng(base_seed, name, episode);
    let events = match spec.kind {
        Kind::PremiseRealization => gen_premise_realization(&mut rng),
        Kind::Heavy(setting) => gen_heavy(&mut rng, capacity_config(setting).unwrap().flat_cap),
        Kind::GateStrength => gen_gate_strength(&mut rng),
        Kind::Quadrant => gen_quadrant(&mut rng),
        Kind::StrengthSource(source) => gen_strength_source(&mut rng, source),
        Kind::ImplicitHeuristic => gen_implicit(&mut rng),
        Kind::CompressionCycle => gen_compression_cycle(&mut rng),
    };
    Some(ScenarioStream {
        regime: name.to_string(),
        episode,
        caps: spec.caps,
        events,
    })
}

fn item(id: ItemId, key: &str, conf: f64, u: f64) -> ItemSpec {
    ItemSpec {
        id,
        content_key: key.to_string(),
        cue: CueFeatures {
            evidence_conf: conf,
            ..CueFeatures::default()
        },
        labels: Labels::default(),
        strength_input: u,
    }
}

/// An anchoring premise is admitted early with strong confidence but modest
/// strength, gains strength through corroboration and one probe, then must
/// survive a wave of high-confidence echo items, a grind of pressure ticks,
/// and a late band of strong-but-vague arrivals before the payoff query.
fn gen_premise_realization(rng: &mut ChaCha12Rng) -> Vec<Event> {
    let w_conf: Vec<f64> = (0..3).map(|_| rng.gen_range(0.60..0.85)).collect();
    let plain: Vec<f64> = (0..3).map(|_| rng.gen_range(0.10..0.20)).collect();
    let f_conf: Vec<f64> = (0..4).map(|_| rng.gen_range(0.60..0.63)).collect();
    let f_u: Vec<f64> = (0..4).map(|_| rng.gen_range(0.58..0.93)).collect();
    let s_u = rng.gen_range(0.66..0.72);

    let mut p = item(0, "premise", 0.95, 0.30);
    p.cue.shock = 0.9;
    p.cue.importance_cue = 0.3;
    p.cue.constraint_flag = 1.0;
    p.cue.query_relevance = 0.9;
    p.labels.is_premise = true;
    p.labels.true_consequence = 1.0;

    let warm = |i: usize, conf: f64| {
        let mut w = item(1 + i as ItemId, &format!("warm_{i}"), conf, 0.30);
        w.cue.importance_cue = 0.3;
        w.cue.query_relevance = 0.3;
        w
    };
    let plain_item = |i: usize, v: f64| {
        let mut q = item(4 + i as ItemId, &format!("plain_{i}"), v, v);
        q.cue.importance_cue = v;
        q.cue.query_relevance = 0.1;
        q
    };
    let echo = |i: usize| {
        let mut e = item(7 + i as ItemId, &format!("echo_{i}"), 0.886, 0.30);
        e.cue.shock = 0.3;
        e.cue.importance_cue = 0.3;
        e.cue.query_relevance = 0.3;
        e
    };
    let band = |i: usize, conf: f64, u: f64| {
        let mut b = item(14 + i as ItemId, &format!("band_{i}"), conf, u);
        b.cue.importance_cue = u;
        b.cue.query_relevance = 0.3;
        b
    };
    let mut s = item(18, "support", 0.90, s_u);
    s.cue.importance_cue = 0.5;
    s.cue.query_relevance = 0.9;
    s.labels.is_support = true;
    s.labels.true_consequence = 0.9;

    let mut ev = Vec::with_capacity(43);
    ev.push(Event::Admit(p));
    for i in 0..3 {
        ev.push(Event::Admit(warm(i, w_conf[i])));
    }
    for i in 0..3 {
        ev.push(Event::Admit(plain_item(i, plain[i])));
    }
    ev.push(Event::Evidence { target: 0, conf: 0.95, positive: true });
    ev.push(Event::Admit(echo(0)));
    ev.push(Event::Admit(echo(1)));
    ev.push(Event::Query { target: 0, relevance: 0.9 });
    ev.push(Event::Evidence { target: 7, conf: 0.30, positive: true });
    ev.push(Event::Admit(echo(2)));
    ev.push(Event::Evidence { target: 8, conf: 0.30, positive: true });
    ev.push(Event::Admit(echo(3)));
    ev.push(Event::Evidence { target: 7, conf: 0.95, positive: true });
    ev.push(Event::Admit(echo(4)));
    ev.push(Event::Evidence { target: 9, conf: 0.30, positive: true });
    ev.push(Event::Admit(echo(5)));
    ev.push(Event::Evidence { target: 8, conf: 0.95, positive: true });
    ev.push(Event::Admit(echo(6)));
    ev.push(Event::Evidence { target: 10, conf: 0.30, positive: true });
    ev.push(Event::Evidence { target: 11, conf: 0.30, positive: true });
    ev.push(Event::Evidence { target: 9, conf: 0.95, positive: true });
    ev.push(Event::Evidence { target: 12, conf: 0.30, positive: true });
    ev.push(Event::Evidence { target: 10, conf: 0.95, positive: true });
    ev.push(Event::Evidence { target: 13, conf: 0.30, positive: true });
    ev.push(Event::Evidence { target: 11, conf: 0.95, positive: true });
    ev.push(Event::Evidence { target: 12, conf: 0.95, positive: true });
    ev.push(Event::Evidence { target: 13, conf: 0.95, positive: true });
    for _ in 0..7 {
        ev.push(Event::PressureTick);
    }
    for i in 0..4 {
        ev.push(Event::Admit(band(i, f_conf[i], f_u[i])));
    }
    ev.push(Event::Admit(s));
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![0],
        required_support_ids: vec![18],
        forbidden_governing_ids: vec![],
    }));
    ev
}

const HEAVY_BULK_SLOTS: [u32; 19] = [
    8, 11, 14, 17, 22, 25, 27, 29, 31, 33, 12, 13, 15, 16, 18, 19, 21, 23, 24,
];

/// A long noisy session: one premise anchor, one support fact, one item whose
/// importance only becomes clear through late evidence, and a stream of bulk
/// filler sized to the flat budget of the capacity setting.
fn gen_heavy(rng: &mut ChaCha12Rng, flat_cap: usize) -> Vec<Event> {
    let n_bulk = flat_cap.saturating_sub(3);
    let mut slots: Vec<u32> = HEAVY_BULK_SLOTS[..n_bulk].to_vec();
    slots.sort_unstable();

    let mut a = item(0, "anchor", 0.70, 0.15);
    a.cue.importance_cue = 0.55;
    a.cue.query_relevance = 0.20;
    a.cue.novelty = 0.83;
    a.labels.is_premise = true;
    a.labels.true_consequence = 0.15;

    let mut r2 = item(1, "support", 0.90, 0.0);
    r2.cue.shock = 0.2;
    r2.cue.importance_cue = 0.90;
    r2.cue.query_relevance = 0.90;
    r2.cue.novelty = 0.50;
    r2.labels.is_support = true;

    let mut imp = item(2, "late_important", 0.75, 1.0);
    imp.cue.importance_cue = 0.20;
    imp.cue.query_relevance = 0.30;
    imp.cue.novelty = 0.83;
    imp.labels.is_late_important = true;
    imp.labels.true_consequence = 1.0;

    let mut bulk = Vec::new();
    for (i, _) in slots.iter().enumerate() {
        let conf = rng.gen_range(0.60..0.83);
        let cue = rng.gen_range(0.01..0.05);
        let mut b = item(3 + i as ItemId, &format!("bulk_{i}"), conf, 0.0);
        b.cue.importance_cue = cue;
        b.cue.query_relevance = 0.10;
        b.cue.novelty = 0.83;
        bulk.push(b);
    }

    let mut ev = Vec::with_capacity(40);
    let mut bulk_iter = bulk.into_iter();
    for step in 1..=39u32 {
        if step == 1 {
            ev.push(Event::Admit(a.clone()));
        } else if step == 3 {
            ev.push(Event::Admit(r2.clone()));
        } else if step == 6 {
            ev.push(Event::Admit(imp.clone()));
        } else if step == 9 {
            ev.push(Event::Evidence { target: 2, conf: 0.95, positive: true });
        } else if step == 20 {
            ev.push(Event::Query { target: 1, relevance: 0.55 });
        } else if slots.contains(&step) {
            ev.push(Event::Admit(bulk_iter.next().unwrap()));
        } else {
            ev.push(Event::PressureTick);
        }
    }
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![0],
        required_support_ids: vec![1],
        forbidden_governing_ids: vec![],
    }));
    ev
}

/// Both gates matter: a premise that clears confidence and strength, cold and
/// hot distractors that clear only confidence, and loud false premises that
/// clear only strength. Strength inputs follow the importance cue here.
fn gen_gate_strength(rng: &mut ChaCha12Rng) -> Vec<Event> {
    let cold: Vec<f64> = (0..3).map(|_| rng.gen_range(0.901..0.9049)).collect();
    let hot: Vec<f64> = (0..3).map(|_| rng.gen_range(0.9035..0.92)).collect();

    let mut f0 = item(0, "opening_note", 0.60, 0.05);
    f0.cue.importance_cue = 0.10;
    f0.cue.query_relevance = 0.2;

    let mut p = item(1, "premise", 0.95, 0.92);
    p.cue.importance_cue = 0.92;
    p.cue.query_relevance = 0.8;
    p.labels.is_premise = true;
    p.labels.true_consequence = 1.0;

    let mut s = item(2, "support", 0.90, 0.50);
    s.cue.importance_cue = 0.50;
    s.cue.query_relevance = 0.9;
    s.cue.novelty = 0.50;
    s.labels.is_support = true;
    s.labels.true_consequence = 0.9;

    let dist = |i: usize, conf: f64| {
        let mut d = item(3 + i as ItemId, &format!("echoing_claim_{i}"), conf, 0.25);
        d.cue.importance_cue = 0.25;
        d.cue.query_relevance = 0.3;
        d.labels.is_local_distractor = true;
        d
    };
    let fp = |i: usize| {
        let mut f = item(9 + i as ItemId, &format!("loud_rumor_{i}"), 0.30, 1.0);
        f.cue.importance_cue = 1.0;
        f.cue.query_relevance = 0.1;
        f.labels.is_false_premise = true;
        f
    };
    let tail = |id: ItemId, key: &str| {
        let mut t = item(id, key, 0.20, 0.01);
        t.cue.importance_cue = 0.05;
        t.cue.query_relevance = 0.05;
        t
    };

    let mut ev = Vec::with_capacity(14);
    ev.push(Event::Admit(f0));
    ev.push(Event::Admit(p));
    ev.push(Event::Admit(s));
    for i in 0..3 {
        ev.push(Event::Admit(dist(i, cold[i])));
    }
    for i in 0..3 {
        ev.push(Event::Admit(dist(3 + i, hot[i])));
    }
    ev.push(Event::Admit(fp(0)));
    ev.push(Event::Admit(fp(1)));
    ev.push(Event::Admit(tail(11, "stray_note_a")));
    ev.push(Event::Admit(tail(12, "stray_note_b")));
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![1],
        required_support_ids: vec![2],
        forbidden_governing_ids: vec![9, 10],
    }));
    ev
}

/// Four probes spanning the confidence/strength quadrants, plus local
/// distractors and confidence filler that stress protection decisions.
fn gen_quadrant(rng: &mut ChaCha12Rng) -> Vec<Event> {
    let mut ev = Vec::with_capacity(21);

    let mut hc_hs = item(0, "hc_hs", 0.90, 1.0);
    hc_hs.cue.importance_cue = 0.95;
    hc_hs.cue.query_relevance = 0.6;
    let mut mc_hs = item(1, "mc_hs", 0.60, 1.0);
    mc_hs.cue.importance_cue = 0.90;
    mc_hs.cue.query_relevance = 0.6;
    let mut hc_ls = item(2, "hc_ls", 0.900, 0.0);
    hc_ls.cue.importance_cue = 0.20;
    hc_ls.cue.query_relevance = 0.6;
    let mut lc_ls = item(3, "lc_ls", 0.20, 0.0);
    lc_ls.cue.importance_cue = 0.10;

    ev.push(Event::Admit(hc_hs));
    ev.push(Event::Admit(mc_hs));
    ev.push(Event::Admit(hc_ls));
    ev.push(Event::Admit(lc_ls));
    for i in 0..5 {
        let conf = rng.gen_range(0.901..0.9049);
        let cue = rng.gen_range(0.45..0.48);
        let mut d = item(4 + i as ItemId, &format!("dist_{i}"), conf, 0.0);
        d.cue.importance_cue = cue;
        d.cue.query_relevance = 0.3;
        d.labels.is_local_distractor = true;
        ev.push(Event::Admit(d));
    }
    for i in 0..4 {
        let conf = rng.gen_range(0.86..0.918);
        let cue = rng.gen_range(0.30..0.40);
        let mut f = item(9 + i as ItemId, &format!("filler_hi_{i}"), conf, 0.0);
        f.cue.importance_cue = cue;
        ev.push(Event::Admit(f));
    }
    for i in 0..7 {
        let conf = rng.gen_range(0.55..0.85);
        let cue = rng.gen_range(0.05..0.25);
        let mut f = item(13 + i as ItemId, &format!("filler_lo_{i}"), conf, 0.0);
        f.cue.importance_cue = cue;
        ev.push(Event::Admit(f));
    }
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![],
        required_support_ids: vec![],
        forbidden_governing_ids: vec![],
    }));
    ev
}

fn coarse_bucket(consequence: f64) -> f64 {
    if consequence >= 0.95 {
        0.9
    } else if consequence >= 0.5 {
        0.5
    } else {
        0.1
    }
}

/// The same stream under four strength sources: a premise and support with
/// real consequences, very confident no-consequence distractors, and loud
/// false premises. Only the strength signal differs per variant.
fn gen_strength_source(rng: &mut ChaCha12Rng, source: Source) -> Vec<Event> {
    let s_cue = rng.gen_range(0.185..0.215);
    let d_conf: Vec<f64> = (0..6).map(|_| rng.gen_range(0.96..0.99)).collect();
    let d_cue: Vec<f64> = (0..6).map(|_| rng.gen_range(0.16..0.18)).collect();

    let build = |id: ItemId, key: &str, conf: f64, imp: f64, qrel: f64, cons: f64| {
        let mut it = item(id, key, conf, 0.0);
        it.cue.importance_cue = imp;
        it.cue.query_relevance = qrel;
        it.labels.true_consequence = cons;
        it
    };
    let mut items = Vec::new();
    let mut p = build(0, "premise", 0.95, 0.88, 0.8, 1.0);
    p.labels.is_premise = true;
    items.push(p);
    let mut s = build(1, "support", 0.80, s_cue, 0.9, 0.9);
    s.labels.is_support = true;
    items.push(s);
    for i in 0..6 {
        let mut d = build(
            2 + i as ItemId,
            &format!("confident_aside_{i}"),
            d_conf[i],
            d_cue[i],
            0.3,
            0.0,
        );
        d.labels.is_local_distractor = true;
        items.push(d);
    }
    for i in 0..4 {
        let mut f = build(8 + i as ItemId, &format!("loud_rumor_{i}"), 0.30, 1.0, 0.1, 0.0);
        f.labels.is_false_premise = true;
        items.push(f);
    }
    for it in items.iter_mut() {
        it.strength_input = match source {
            Source::Oracle => it.labels.true_consequence,
            Source::Noisy => {
                let noise = rng.gen_range(-0.15..0.15);
                (it.labels.true_consequence + noise).clamp(0.0, 1.0)
            }
            Source::CoarseCue => coarse_bucket(it.labels.true_consequence),
            Source::GenericProxy => it.cue.importance_cue,
        };
    }

    let mut ev: Vec<Event> = items.into_iter().map(Event::Admit).collect();
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![0],
        required_support_ids: vec![1],
        forbidden_governing_ids: vec![8, 9, 10, 11],
    }));
    ev
}

/// Streams where each retention heuristic's favourite signal points the wrong
/// way: recency favours late junk, frequency favours probed support only,
/// query overlap favours drifting bulk, and generic importance favours loud
/// false premises. Strength inputs follow the importance cue.
fn gen_implicit(rng: &mut ChaCha12Rng) -> Vec<Event> {
    let fp_cue: Vec<f64> = (0..4).map(|_| rng.gen_range(0.90..0.97)).collect();
    let fp4_qrel = rng.gen_range(0.40..0.458);
    let d_conf: Vec<f64> = (0..6).map(|_| rng.gen_range(0.60..0.68)).collect();
    let d_cue: Vec<f64> = (0..6).map(|_| rng.gen_range(0.12..0.20)).collect();
    let d_qrel: Vec<f64> = (0..6).map(|_| rng.gen_range(0.45..0.60)).collect();
    let probe_premise = rng.gen_bool(0.02);

    let mut p = item(0, "premise", 0.95, 0.88);
    p.cue.importance_cue = 0.88;
    p.cue.query_relevance = 0.30;
    p.labels.is_premise = true;
    p.labels.true_consequence = 1.0;

    let mut s = item(1, "support", 0.88, 0.87);
    s.cue.importance_cue = 0.87;
    s.cue.query_relevance = 0.90;
    s.cue.novelty = 0.5;
    s.labels.is_support = true;
    s.labels.true_consequence = 0.9;

    let fp = |i: usize, cue: f64, qrel: f64| {
        let mut f = item(2 + i as ItemId, &format!("loud_rumor_{i}"), 0.30, cue);
        f.cue.importance_cue = cue;
        f.cue.query_relevance = qrel;
        f.labels.is_false_premise = true;
        f
    };
    let drift = |i: usize, conf: f64, cue: f64, qrel: f64| {
        let mut d = item(6 + i as ItemId, &format!("drifting_bulk_{i}"), conf, cue);
        d.cue.importance_cue = cue;
        d.cue.query_relevance = qrel;
        d.labels.is_local_distractor = true;
        d
    };

    let mut ev = Vec::with_capacity(22);
    ev.push(Event::Admit(p));
    ev.push(Event::Admit(s));
    for _ in 3..=7 {
        ev.push(Event::PressureTick);
    }
    ev.push(Event::Query { target: 1, relevance: 0.9 });
    ev.push(Event::PressureTick);
    if probe_premise {
        ev.push(Event::Query { target: 0, relevance: 0.3 });
    } else {
        ev.push(Event::PressureTick);
    }
    ev.push(Event::Query { target: 1, relevance: 0.9 });
    for i in 0..4 {
        let qrel = if i == 2 { fp4_qrel } else { 0.10 };
        ev.push(Event::Admit(fp(i, fp_cue[i], qrel)));
    }
    for i in 0..6 {
        ev.push(Event::Admit(drift(i, d_conf[i], d_cue[i], d_qrel[i])));
    }
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![0],
        required_support_ids: vec![1],
        forbidden_governing_ids: vec![2, 3, 4, 5],
    }));
    ev
}

/// Five summarization cycles. The premise arrives in cycle one with strong
/// strength and salience but mid-pack confidence, recency, and frequency;
/// probes reinforce a couple of details per cycle; two support facts arrive
/// late. Each pressure tick closes a cycle.
fn gen_compression_cycle(rng: &mut ChaCha12Rng) -> Vec<Event> {
    let mut ev = Vec::new();

    let detail = |id: ItemId, key: String, conf: f64, imp: f64| {
        let mut d = item(id, &key, conf, 0.0);
        d.cue.importance_cue = imp;
        d.cue.query_relevance = 0.3;
        d
    };
    let residue = |id: ItemId, key: String, conf: f64, imp: f64, u: f64| {
        let mut r = item(id, &key, conf, u);
        r.cue.importance_cue = imp;
        r.cue.query_relevance = 0.3;
        r.labels.is_local_distractor = true;
        r
    };
    let support = |id: ItemId, key: &str| {
        let mut s = item(id, key, 0.90, 0.55);
        s.cue.importance_cue = 0.55;
        s.cue.query_relevance = 0.9;
        s.labels.is_support = true;
        s.labels.true_consequence = 0.9;
        s
    };

    let mut p = item(0, "premise", 0.95, 0.90);
    p.cue.shock = 0.9;
    p.cue.importance_cue = 0.30;
    p.cue.constraint_flag = 1.0;
    p.cue.query_relevance = 0.9;
    p.labels.is_premise = true;
    p.labels.true_consequence = 1.0;
    ev.push(Event::Admit(p));
    ev.push(Event::Query { target: 0, relevance: 0.9 });

    let mut next_id: ItemId = 1;
    for cycle in 1..=5u32 {
        let n_details = if cycle == 1 { 5 } else { 4 };
        let mut cycle_ids = Vec::new();
        for i in 0..n_details {
            let conf = rng.gen_range(0.955..0.985);
            let imp = rng.gen_range(0.05..0.30);
            ev.push(Event::Admit(detail(
                next_id,
                format!("detail_{cycle}_{i}"),
                conf,
                imp,
            )));
            cycle_ids.push(next_id);
            next_id += 1;
        }
        match cycle {
            1 => {
                for i in 0..2 {
                    let conf = rng.gen_range(0.9855..0.999);
                    let imp = rng.gen_range(0.10..0.30);
                    let u = rng.gen_range(0.11..0.265);
                    ev.push(Event::Admit(residue(
                        next_id,
                        format!("residue_{cycle}_{i}"),
                        conf,
                        imp,
                        u,
                    )));
                    cycle_ids.push(next_id);
                    next_id += 1;
                }
            }
            2 | 3 => {
                let conf = rng.gen_range(0.90..0.945);
                let imp = rng.gen_range(0.10..0.30);
                let u = rng.gen_range(0.11..0.265);
                ev.push(Event::Admit(residue(
                    next_id,
                    format!("residue_{cycle}_0"),
                    conf,
                    imp,
                    u,
                )));
                cycle_ids.push(next_id);
                next_id += 1;
            }
            4 => {
                ev.push(Event::Admit(support(next_id, "support_early")));
                next_id += 1;
            }
            _ => {
                ev.push(Event::Admit(support(next_id, "support_late")));
                next_id += 1;
            }
        }
        let n_probes = 1 + rng.gen_range(0..2usize);
        let mut targets: Vec<ItemId> = cycle_ids
            .choose_multiple(rng, n_probes.min(cycle_ids.len()))
            .cloned()
            .collect();
        targets.sort_unstable();
        for t in targets {
            ev.push(Event::Query { target: t, relevance: 1.0 });
        }
        ev.push(Event::PressureTick);
    }
    let s1 = next_id - 1 - 5; // support_early sits before cycle 5's block
    let s2 = next_id - 1;
    ev.push(Event::FinalQuery(QuerySpec {
        required_premise_ids: vec![0],
        required_support_ids: vec![s1, s2],
        forbidden_governing_ids: vec![],
    }));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::validate_stream;

    #[test]
    fn every_regime_generates_valid_streams() {
        for name in regime_names() {
            for episode in 0..20u64 {
                let stream = generate(name, episode, 42).unwrap();
                let problems = validate_stream(&stream);
                assert!(
                    problems.is_empty(),
                    "{name} episode {episode}: {problems:?}"
                );
            }
        }
    }

    #[test]
    fn streams_depend_on_episode_and_seed_only() {
        let a = generate("heavy", 3, 42).unwrap();
        let b = generate("heavy", 3, 42).unwrap();
        assert_eq!(a.events, b.events);
        let c = generate("heavy", 4, 42).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn heavy_bulk_count_tracks_flat_cap() {
        for (name, want) in [
            ("heavy_very_tight", 7),
            ("heavy_tight", 10),
            ("heavy", 13),
            ("heavy_roomy", 18),
            ("heavy_very_roomy", 22),
        ] {
            let stream = generate(name, 0, 42).unwrap();
            assert_eq!(stream.admitted().len(), want, "{name}");
        }
    }

    #[test]
    fn compression_cycle_final_query_names_both_supports() {
        let stream = generate("compression_cycle", 0, 42).unwrap();
        let q = stream.final_query().unwrap();
        assert_eq!(q.required_support_ids.len(), 2);
        for id in &q.required_support_ids {
            let spec = stream.admitted_spec(*id).unwrap();
            assert!(spec.labels.is_support, "id {id} is not a support item");
        }
    }
}
