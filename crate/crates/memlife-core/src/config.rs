//! Dotted key=value configuration for runs.
//!
//! Precedence is defaults, then config file, then explicit overrides, applied
//! in that order. Unknown keys are hard errors so typos do not silently run
//! a different experiment.

use crate::dynamics::Dynamics;
use crate::policy::PolicyParams;
use crate::types::CapacityConfig;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey(String),
    BadValue { key: String, value: String, want: &'static str },
    BadLine(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown config key: {k}"),
            ConfigError::BadValue { key, value, want } => {
                write!(f, "bad value for {key}: {value:?} (expected {want})")
            }
            ConfigError::BadLine(l) => write!(f, "bad config line (expected key=value): {l:?}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs besides output plumbing.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub dynamics: Dynamics,
    pub caps_override: Option<CapacityConfig>,
    pub params: PolicyParams,
    pub seed: u64,
    pub episodes: u32,
    pub regimes: Vec<String>,
    pub policies: Vec<String>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            dynamics: Dynamics::default(),
            caps_override: None,
            params: PolicyParams::default(),
            seed: 42,
            episodes: 100,
            regimes: Vec::new(),
            policies: Vec::new(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.trim().parse::<f64>().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        want: "a number",
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse::<usize>().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        want: "a non-negative integer",
    })
}

impl RunSettings {
    fn caps_mut(&mut self) -> &mut CapacityConfig {
        if self.caps_override.is_none() {
            self.caps_override = Some(CapacityConfig::default());
        }
        self.caps_override.as_mut().unwrap()
    }

    /// Apply a single dotted key. `dynamics.alpha=2.0`, `caps.flat_cap=13`,
    /// `run.seed=7`, `policy.front_door.tau=0.8` all land here.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let value = value.trim();
        let d = &mut self.dynamics;
        match key {
            "dynamics.alpha" => d.alpha = parse_f64(key, value)?,
            "dynamics.beta" => d.beta = parse_f64(key, value)?,
            "dynamics.sigma" => d.sigma = parse_f64(key, value)?,
            "dynamics.lambda_transient" => d.lambda_transient = parse_f64(key, value)?,
            "dynamics.lambda_working" => d.lambda_working = parse_f64(key, value)?,
            "dynamics.lambda_durable" => d.lambda_durable = parse_f64(key, value)?,
            "dynamics.p_min" => d.p_min = parse_f64(key, value)?,
            "dynamics.strength_gain" => d.strength_gain = parse_f64(key, value)?,
            "dynamics.m_min" => d.m_min = parse_f64(key, value)?,
            "dynamics.m_max" => d.m_max = parse_f64(key, value)?,
            "dynamics.shock_scale" => d.shock_scale = parse_f64(key, value)?,
            "dynamics.confidence_scale" => d.confidence_scale = parse_f64(key, value)?,
            "dynamics.fixed_strength" => {
                d.fixed_strength = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                };
            }
            "caps.transient_cap" => self.caps_mut().transient_cap = parse_usize(key, value)?,
            "caps.working_cap" => self.caps_mut().working_cap = parse_usize(key, value)?,
            "caps.durable_cap" => self.caps_mut().durable_cap = parse_usize(key, value)?,
            "caps.flat_cap" => self.caps_mut().flat_cap = parse_usize(key, value)?,
            "caps.soft_budget" => self.caps_mut().soft_budget = parse_usize(key, value)?,
            "run.seed" => {
                self.seed = value.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    want: "an unsigned integer",
                })?
            }
            "run.episodes" => {
                let n = parse_usize(key, value)?;
                if n == 0 {
                    return Err(ConfigError::BadValue {
                        key: key.to_string(),
                        value: value.to_string(),
                        want: "a positive episode count",
                    });
                }
                self.episodes = n as u32;
            }
            "run.regimes" => {
                self.regimes = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
            }
            "run.policies" => {
                self.policies = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
            }
            _ => {
                if let Some(rest) = key.strip_prefix("policy.") {
                    let mut it = rest.splitn(2, '.');
                    let policy = it.next().unwrap_or("");
                    let param = it.next().ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
                    let v = parse_f64(key, value)?;
                    self.params
                        .set(policy, param, v)
                        .map_err(|e| ConfigError::BadValue {
                            key: key.to_string(),
                            value: e,
                            want: "a known policy parameter",
                        })?;
                } else {
                    return Err(ConfigError::UnknownKey(key.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Apply one `key=value` pair given as a single string.
    pub fn apply_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let mut it = pair.splitn(2, '=');
        let key = it.next().unwrap_or("");
        let value = it.next().ok_or_else(|| ConfigError::BadLine(pair.to_string()))?;
        if key.trim().is_empty() {
            return Err(ConfigError::BadLine(pair.to_string()));
        }
        self.apply(key, value)
    }

    /// Apply a config file body: one `key=value` per line, `#` comments.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.apply_pair(line)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn applies_in_order_with_later_wins() {
        let mut s = RunSettings::default();
        s.apply_file_text("dynamics.alpha = 3.0\nrun.seed=7\n# comment\n\ncaps.flat_cap=9")
            .unwrap();
        s.apply_pair("dynamics.alpha=2.5").unwrap();
        assert_eq!(s.dynamics.alpha, 2.5);
        assert_eq!(s.seed, 7);
        assert_eq!(s.caps_override.unwrap().flat_cap, 9);
    }

    #[test]
    fn fixed_strength_accepts_none() {
        let mut s = RunSettings::default();
        s.apply_pair("dynamics.fixed_strength=0.1").unwrap();
        assert_eq!(s.dynamics.fixed_strength, Some(0.1));
        s.apply_pair("dynamics.fixed_strength=none").unwrap();
        assert_eq!(s.dynamics.fixed_strength, None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut s = RunSettings::default();
        assert!(matches!(
            s.apply_pair("dynamics.gamma=1.0"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(s.apply_pair("no_equals_here"), Err(ConfigError::BadLine(_))));
        assert!(matches!(
            s.apply_pair("run.episodes=zero"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            s.apply_pair("policy.front_door.nope=1"),
            Err(ConfigError::BadValue { .. })
        ));
        s.apply_pair("policy.front_door.tau=0.8").unwrap();
        assert_eq!(s.params.front_door_tau, 0.8);
    }
}
