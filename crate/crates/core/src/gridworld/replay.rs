//! JSON layout and replay documents for debugging and golden tests.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cell::Action;
use super::env::{make_env, EnvKind, Environment};
use crate::error::{Error, Result};

/// Initial layout plus the actions taken from it. `grid` holds row-major
/// cell codes (see [`super::Cell::code`]) with the agent drawn in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub kind: EnvKind,
    pub layout_seed: u64,
    pub fixed_layout: bool,
    pub episode_seed: u64,
    pub height: usize,
    pub width: usize,
    pub grid: Vec<u16>,
    pub actions: Vec<Action>,
    /// Extrinsic reward of each action, as recorded.
    #[serde(default)]
    pub rewards: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOutcome {
    pub rewards: Vec<f64>,
    pub done: bool,
    /// The regenerated initial layout equals the recorded one.
    pub layout_matches: bool,
    /// Rewards equal the recorded ones (vacuously true when none were recorded).
    pub rewards_match: bool,
}

impl Replay {
    /// Plays `actions` in a freshly reset environment and records the trace.
    /// Stops early if the episode ends.
    pub fn record(
        kind: EnvKind,
        layout_seed: u64,
        fixed_layout: bool,
        episode_seed: u64,
        actions: &[Action],
    ) -> Result<Replay> {
        let mut env = make_env(kind, layout_seed, fixed_layout);
        env.reset(episode_seed);
        let grid = env.layout_codes().expect("env was reset");
        let (height, width) = kind.dims();
        let mut taken = Vec::new();
        let mut rewards = Vec::new();
        for &a in actions {
            if env.is_done() {
                break;
            }
            rewards.push(env.step(a)?.extrinsic_reward);
            taken.push(a);
        }
        Ok(Replay {
            kind,
            layout_seed,
            fixed_layout,
            episode_seed,
            height,
            width,
            grid,
            actions: taken,
            rewards,
        })
    }

    pub fn environment(&self) -> Environment {
        make_env(self.kind, self.layout_seed, self.fixed_layout)
    }

    /// Re-executes the trace against the current dynamics.
    pub fn play(&self) -> Result<ReplayOutcome> {
        let mut env = self.environment();
        env.reset(self.episode_seed);
        let layout_matches = env.layout_codes().as_deref() == Some(self.grid.as_slice());
        let mut rewards = Vec::with_capacity(self.actions.len());
        for &a in &self.actions {
            rewards.push(env.step(a)?.extrinsic_reward);
        }
        let rewards_match = self.rewards.is_empty() || self.rewards == rewards;
        Ok(ReplayOutcome {
            rewards,
            done: env.is_done(),
            layout_matches,
            rewards_match,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Replay> {
        let replay: Replay = serde_json::from_str(text)?;
        if replay.grid.len() != replay.height * replay.width {
            return Err(Error::config(format!(
                "replay grid has {} cells, expected {}x{}",
                replay.grid.len(),
                replay.height,
                replay.width
            )));
        }
        Ok(replay)
    }

    pub fn load(path: &Path) -> Result<Replay> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
