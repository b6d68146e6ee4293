use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::keys::{ChangeKey, StateKey};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

pub const DEFAULT_GAMMA_I: f64 = 0.99;

/// Pseudocount tables for hashed states and changes.
///
/// Counts are incremented before the reward is computed, so the first visit
/// of a fresh `(s, c)` pair is worth `1/2` and every reward lies in `(0, 1/2]`.
/// Each call to [`CountStore::maybe_reset`] clears both tables together with
/// probability `reset_probability`, which may not exceed `1 - gamma_i`.
#[derive(Clone, Debug)]
pub struct CountStore {
    state_counts: HashMap<StateKey, u64>,
    change_counts: HashMap<ChangeKey, u64>,
    gamma_i: f64,
    reset_probability: f64,
    rng: StreamRng,
    resets: u64,
}

impl CountStore {
    /// `gamma_i` must lie in `[0, 1)` and `reset_probability` in `[0, 1 - gamma_i]`.
    pub fn new(gamma_i: f64, reset_probability: f64, rng: StreamRng) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma_i) {
            return Err(Error::config(format!("gamma_i must be in [0, 1), got {gamma_i}")));
        }
        // allow for the rounding in `1 - gamma_i`
        let bound = 1.0 - gamma_i + f64::EPSILON;
        if !(0.0..=bound).contains(&reset_probability) {
            return Err(Error::config(format!(
                "reset_probability must be in [0, 1 - gamma_i] = [0, {}], got {reset_probability}",
                1.0 - gamma_i
            )));
        }
        Ok(CountStore {
            state_counts: HashMap::new(),
            change_counts: HashMap::new(),
            gamma_i,
            reset_probability,
            rng,
            resets: 0,
        })
    }

    /// Store using the largest permitted reset probability, `1 - gamma_i`.
    pub fn with_boundary_reset(gamma_i: f64, rng: StreamRng) -> Result<Self> {
        Self::new(gamma_i, 1.0 - gamma_i, rng)
    }

    pub fn gamma_i(&self) -> f64 {
        self.gamma_i
    }

    pub fn reset_probability(&self) -> f64 {
        self.reset_probability
    }

    /// Number of resets performed so far.
    pub fn resets(&self) -> u64 {
        self.resets
    }

    pub fn state_count(&self, key: StateKey) -> u64 {
        self.state_counts.get(&key).copied().unwrap_or(0)
    }

    pub fn change_count(&self, key: ChangeKey) -> u64 {
        self.change_counts.get(&key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> (usize, usize) {
        (self.state_counts.len(), self.change_counts.len())
    }

    pub fn is_empty(&self) -> bool {
        self.state_counts.is_empty() && self.change_counts.is_empty()
    }

    /// Counts the pair, then returns `1 / (n(s) + n(c))`.
    pub fn observe_and_reward(&mut self, s: StateKey, c: ChangeKey) -> f64 {
        let ns = self.state_counts.entry(s).or_insert(0);
        *ns += 1;
        let ns = *ns;
        let nc = self.change_counts.entry(c).or_insert(0);
        *nc += 1;
        1.0 / (ns + *nc) as f64
    }

    /// Per-step reset draw from the store's own random stream.
    pub fn maybe_reset(&mut self) -> bool {
        let hit = self.rng.gen::<f64>() < self.reset_probability;
        if hit {
            self.clear();
        }
        hit
    }

    /// Per-step reset draw from an external generator.
    pub fn maybe_reset_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let hit = rng.gen::<f64>() < self.reset_probability;
        if hit {
            self.clear();
        }
        hit
    }

    /// Clears both tables.
    pub fn clear(&mut self) {
        self.state_counts.clear();
        self.change_counts.clear();
        self.resets += 1;
    }

    pub fn snapshot(&self) -> CountSnapshot {
        let mut state_counts: Vec<(u64, u64)> =
            self.state_counts.iter().map(|(k, n)| (k.0, *n)).collect();
        let mut change_counts: Vec<(u64, u64)> =
            self.change_counts.iter().map(|(k, n)| (k.0, *n)).collect();
        state_counts.sort_unstable();
        change_counts.sort_unstable();
        CountSnapshot {
            gamma_i: self.gamma_i,
            reset_probability: self.reset_probability,
            resets: self.resets,
            state_counts,
            change_counts,
            rng: self.rng.clone(),
        }
    }

    pub fn from_snapshot(snap: CountSnapshot) -> Result<Self> {
        let mut store = Self::new(snap.gamma_i, snap.reset_probability, snap.rng)?;
        if snap.state_counts.iter().chain(&snap.change_counts).any(|(_, n)| *n == 0) {
            return Err(Error::config("count snapshot contains a zero count"));
        }
        store.state_counts = snap.state_counts.into_iter().map(|(k, n)| (StateKey(k), n)).collect();
        store.change_counts = snap.change_counts.into_iter().map(|(k, n)| (ChangeKey(k), n)).collect();
        store.resets = snap.resets;
        Ok(store)
    }
}

/// Serializable dump of a [`CountStore`]: sorted key/count pairs plus the
/// reset generator's state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSnapshot {
    pub gamma_i: f64,
    pub reset_probability: f64,
    pub resets: u64,
    pub state_counts: Vec<(u64, u64)>,
    pub change_counts: Vec<(u64, u64)>,
    pub rng: StreamRng,
}

impl CountSnapshot {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
