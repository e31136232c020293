//! JSON model configuration.
//!
//! ```json
//! {
//!   "drift": 1.0,
//!   "sigma": 0.3,
//!   "jumps": {
//!     "lambda": 2.0,
//!     "p": 0.4,
//!     "up":   [{ "weight": 1.0, "rate": 3.0 }],
//!     "down": [{ "weight": 1.0, "rate": 2.0 }]
//!   }
//! }
//! ```
//!
//! Unknown fields are rejected. Every error carries the line and column
//! reported by the JSON reader.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use super::{JumpMixtureSpec, LevyModel, Phase};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("model config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("model config: {0}")]
    Model(#[from] crate::error::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(deserialize_with = "finite")]
    pub drift: f64,
    #[serde(deserialize_with = "non_negative")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<JumpsConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawJumps")]
pub struct JumpsConfig {
    pub lambda: f64,
    pub p: f64,
    pub up: Vec<PhaseConfig>,
    pub down: Vec<PhaseConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(deserialize_with = "non_negative")]
    pub weight: f64,
    #[serde(deserialize_with = "positive")]
    pub rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJumps {
    #[serde(deserialize_with = "non_negative")]
    lambda: f64,
    #[serde(deserialize_with = "probability")]
    p: f64,
    #[serde(default)]
    up: Vec<PhaseConfig>,
    #[serde(default)]
    down: Vec<PhaseConfig>,
}

impl TryFrom<RawJumps> for JumpsConfig {
    type Error = String;

    fn try_from(raw: RawJumps) -> Result<Self, String> {
        let check = |label: &str, phases: &[PhaseConfig], mass: f64| -> Result<(), String> {
            if mass == 0.0 {
                return Ok(());
            }
            let total: f64 = phases.iter().map(|ph| ph.weight).sum();
            if phases.is_empty() {
                Err(format!("jumps.{label}: side has probability {mass} but no phases"))
            } else if (total - 1.0).abs() > 1e-9 {
                Err(format!("jumps.{label}: weights sum to {total}, expected 1"))
            } else {
                Ok(())
            }
        };
        check("up", &raw.up, raw.p)?;
        check("down", &raw.down, 1.0 - raw.p)?;
        Ok(Self { lambda: raw.lambda, p: raw.p, up: raw.up, down: raw.down })
    }
}

fn finite<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(D::Error::custom(format!("expected a finite number, got {v}")))
    }
}

fn non_negative<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(D::Error::custom(format!("expected a number >= 0, got {v}")))
    }
}

fn positive<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(D::Error::custom(format!("expected a number > 0, got {v}")))
    }
}

fn probability<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(D::Error::custom(format!("expected a probability in [0, 1], got {v}")))
    }
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_model(&self) -> Result<LevyModel, ConfigError> {
        let jumps = match &self.jumps {
            None => None,
            Some(j) => {
                let phases = |list: &[PhaseConfig]| list.iter().map(|ph| Phase::new(ph.weight, ph.rate)).collect();
                Some(JumpMixtureSpec::new(j.lambda, j.p, phases(&j.up), phases(&j.down))?)
            }
        };
        Ok(LevyModel::new(self.drift, self.sigma, jumps)?)
    }
}

impl From<&LevyModel> for ModelConfig {
    fn from(model: &LevyModel) -> Self {
        let phases = |list: &[Phase]| list.iter().map(|ph| PhaseConfig { weight: ph.weight, rate: ph.rate }).collect();
        Self {
            drift: model.drift(),
            sigma: model.sigma(),
            jumps: model.jumps().map(|j| JumpsConfig {
                lambda: j.lambda(),
                p: j.p(),
                up: phases(j.up()),
                down: phases(j.down()),
            }),
        }
    }
}

impl LevyModel {
    /// Parse and validate a JSON model configuration.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        ModelConfig::from_json_str(text)?.to_model()
    }

    pub fn to_config(&self) -> ModelConfig {
        ModelConfig::from(self)
    }
}
