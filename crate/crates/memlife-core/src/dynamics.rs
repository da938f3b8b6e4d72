//! Confidence and strength update dynamics.
//!
//! Both channels share one plasticity scalar per touch:
//!   p = clip(lambda_stage * e_in * r_conf * r_str, p_min, 1)
//! where e_in grows with evidence confidence, r_conf discounts contradiction,
//! and r_str slows change as strength consolidates. Confidence moves toward 1
//! on corroboration and toward 0 on contradiction; strength rises with a
//! bounded increment weighted by the consequence estimate b.

use crate::types::{clip01, Stage};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// Curvature of evidence input.
    pub alpha: f64,
    /// Strength-retention decay rate.
    pub beta: f64,
    /// Contradiction discount rate.
    pub sigma: f64,
    pub lambda_transient: f64,
    pub lambda_working: f64,
    pub lambda_durable: f64,
    pub p_min: f64,
    /// Initial-strength mapping range.
    pub m_min: f64,
    pub m_max: f64,
    /// Weight of a strength increment relative to plasticity.
    pub strength_gain: f64,
    /// Consequence-estimate mix: b = b_conf_w * c_eff + b_shock_w * shock.
    pub b_conf_w: f64,
    pub b_shock_w: f64,
    /// Salience-scorer weights over
    /// [importance_cue, constraint_flag, strength_input, evidence_conf, shock].
    pub salience_w: [f64; 5],
    /// Global scaling knobs used by sensitivity sweeps.
    pub shock_scale: f64,
    pub confidence_scale: f64,
    /// When set, initial strength is fixed at this value and strength updates
    /// are disabled (strength stays frozen).
    pub fixed_strength: Option<f64>,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics {
            alpha: 2.0,
            beta: 3.0,
            sigma: 1.0,
            lambda_transient: 0.9,
            lambda_working: 0.5,
            lambda_durable: 0.2,
            p_min: 0.01,
            m_min: 0.02,
            m_max: 0.30,
            strength_gain: 0.35,
            b_conf_w: 0.60,
            b_shock_w: 0.20,
            salience_w: [0.8, 0.5, 1.2, 1.0, 0.8],
            shock_scale: 1.0,
            confidence_scale: 1.0,
            fixed_strength: None,
        }
    }
}

impl Dynamics {
    pub fn lambda(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Transient => self.lambda_transient,
            Stage::Working => self.lambda_working,
            Stage::Durable => self.lambda_durable,
        }
    }

    /// Evidence input: normalized exponential ramp of evidence confidence.
    pub fn evidence_input(&self, conf: f64) -> f64 {
        let a = self.alpha;
        if a.abs() < 1e-12 {
            return clip01(conf);
        }
        ((a * clip01(conf)).exp() - 1.0) / (a.exp() - 1.0)
    }

    /// Contradiction discount: 1 for corroboration, exp(-2 sigma) for
    /// contradiction.
    pub fn confidence_ratio(&self, positive: bool) -> f64 {
        let sign = if positive { 1.0 } else { -1.0 };
        (self.sigma * (sign - 1.0)).exp()
    }

    /// Consolidation drag: strength slows further change.
    pub fn strength_retention(&self, m: f64) -> f64 {
        (-self.beta * m).exp()
    }

    pub fn plasticity(&self, stage: Stage, conf: f64, positive: bool, m: f64) -> f64 {
        let raw = self.lambda(stage)
            * self.evidence_input(conf)
            * self.confidence_ratio(positive)
            * self.strength_retention(m);
        raw.clamp(self.p_min, 1.0)
    }

    /// Multiplicative-toward-bound confidence update.
    pub fn update_confidence(&self, c: f64, p: f64, positive: bool) -> f64 {
        if positive {
            c + p * (1.0 - c)
        } else {
            c * (1.0 - p)
        }
    }

    /// Consequence estimate from effective confidence and item shock.
    pub fn strength_base(&self, c_eff: f64, shock: f64) -> f64 {
        let z = clip01(self.shock_scale * shock);
        clip01(self.b_conf_w * clip01(c_eff) + self.b_shock_w * z)
    }

    /// Bounded strength increment; no-op when strength is frozen.
    pub fn update_strength(&self, m: f64, p: f64, b: f64) -> f64 {
        if self.fixed_strength.is_some() {
            return m;
        }
        m + p * self.strength_gain * b * (1.0 - m)
    }

    /// Map a salience level in [0,1] onto the initial-strength range.
    pub fn salience_to_strength(&self, s: f64) -> f64 {
        self.m_min + (self.m_max - self.m_min) * clip01(s)
    }

    /// Initial strength from the configured strength-channel input.
    pub fn initial_strength(&self, strength_input: f64) -> f64 {
        if let Some(v) = self.fixed_strength {
            return v;
        }
        self.salience_to_strength(strength_input)
    }

    /// Cue-only salience scorer (bias 0); the fallback strength source when no
    /// channel input is available.
    pub fn salience_score(
        &self,
        importance_cue: f64,
        constraint_flag: f64,
        strength_input: f64,
        evidence_conf: f64,
        shock: f64,
    ) -> f64 {
        let w = self.salience_w;
        let x = w[0] * importance_cue
            + w[1] * constraint_flag
            + w[2] * strength_input
            + w[3] * evidence_conf
            + w[4] * shock;
        1.0 / (1.0 + (-x).exp())
    }

    /// Admission confidence after the global confidence scale.
    pub fn admission_confidence(&self, evidence_conf: f64) -> f64 {
        clip01(self.confidence_scale * evidence_conf)
    }

    /// Evidence confidence after the global confidence scale.
    pub fn scaled_evidence(&self, conf: f64) -> f64 {
        clip01(self.confidence_scale * conf)
    }
}
