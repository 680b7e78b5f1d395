//! Scenario configuration and its TOML file format.
//!
//! Every field has a default, so an empty file (or one holding only
//! `version = 1`) describes the stock 10×10 m arena with five humans.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{Shape, ShapeError};
use crate::reward::RewardWeights;
use crate::sensing::{SensorConfig, SensorConfigError};
use crate::sim::{Arena, SimParams};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub seed: u64,
    pub arena: Arena,
    pub n_humans: usize,
    pub agent_radius: f64,
    pub human_radius: f64,
    pub goal_radius: f64,
    pub max_steps: u64,
    pub static_obstacles: Vec<Shape>,
    pub sim: SimParams,
    pub sensors: SensorConfig,
    pub rewards: RewardWeights,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            version: CONFIG_VERSION,
            seed: 0,
            arena: Arena::default(),
            n_humans: 5,
            agent_radius: 0.3,
            human_radius: 0.3,
            goal_radius: 0.3,
            max_steps: 200,
            static_obstacles: Vec::new(),
            sim: SimParams::default(),
            sensors: SensorConfig::default(),
            rewards: RewardWeights::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("invalid field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, reason: impl ToString) -> Self {
        ConfigError::Field {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates TOML text. Parse errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::field(name, format!("must be > 0, got {v}")))
            }
        };
        positive("arena.width", self.arena.width)?;
        positive("arena.height", self.arena.height)?;
        positive("agent_radius", self.agent_radius)?;
        positive("human_radius", self.human_radius)?;
        positive("goal_radius", self.goal_radius)?;
        if self.max_steps == 0 {
            return Err(ConfigError::field("max_steps", "must be >= 1"));
        }
        if let Some(name) = self.sim.first_invalid() {
            return Err(ConfigError::field(
                format!("sim.{name}"),
                "must be finite and > 0",
            ));
        }
        if let Some(name) = self.rewards.first_invalid() {
            return Err(ConfigError::field(
                format!("rewards.{name}"),
                "out of range (weights finite, w_step >= 0, r_soc_reward > 0)",
            ));
        }
        self.sensors
            .validate()
            .map_err(|e: SensorConfigError| ConfigError::field("sensors", e))?;
        for (i, s) in self.static_obstacles.iter().enumerate() {
            s.validate()
                .map_err(|e: ShapeError| ConfigError::field(format!("static_obstacles[{i}]"), e))?;
            if !self.arena.contains_shape(s) {
                return Err(ConfigError::field(
                    format!("static_obstacles[{i}]"),
                    "shape extends outside the arena",
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding; binds datasets to the
    /// scenario that produced them.
    pub fn digest(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("scenario config is always serializable");
        Sha256::digest(&canonical).into()
    }
}
