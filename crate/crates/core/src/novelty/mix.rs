use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::EnvFamily;

/// Intrinsic strength coefficient: training reward is `r_e + alpha * r_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardMix {
    alpha: f64,
}

impl RewardMix {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(RewardMix { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mix(&self, r_e: f64, r_i: f64) -> f64 {
        mix(r_e, r_i, *self)
    }
}

pub fn mix(r_e: f64, r_i: f64, cfg: RewardMix) -> f64 {
    r_e + cfg.alpha * r_i
}

/// Learner family an alpha preset was tuned for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentFamily {
    /// Distributed actor-critic (IMPALA-like).
    ModelFree,
    /// World-model agent (DreamerV3-like).
    WorldModel,
}

/// Best alpha found by grid search for each learner family and environment family.
pub fn default_alpha(agent: AgentFamily, env: EnvFamily) -> f64 {
    match (agent, env) {
        (AgentFamily::ModelFree, EnvFamily::Minigrid) => 0.0025,
        (AgentFamily::WorldModel, EnvFamily::Minigrid) => 0.0025,
        (AgentFamily::ModelFree, EnvFamily::Crafter) => 0.005,
        (AgentFamily::WorldModel, EnvFamily::Crafter) => 0.001,
    }
}
