use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};
use crate::gridworld::{Item, Observation, VIEW_SIZE};

/// Fixed seed so keys are stable across processes and platforms.
const HASH_SEED: u64 = 0x0c8e_7e11_5eed_0001;
const STATE_TAG: u8 = b'S';
const CHANGE_TAG: u8 = b'C';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateKey(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChangeKey(pub u64);

impl ChangeKey {
    /// Key of the empty difference, shared by every `(o, o)` pair.
    pub fn empty() -> ChangeKey {
        ChangeKey(xxh3_64_with_seed(&[CHANGE_TAG], HASH_SEED))
    }
}

/// Canonical byte form: tag, 49 little-endian cell codes in row-major order,
/// inventory entries in item order, then vitals when present.
pub fn canonical_bytes(obs: &Observation) -> Vec<u8> {
    let mut out = Vec::with_capacity(1 + 2 * VIEW_SIZE * VIEW_SIZE + 16);
    out.push(STATE_TAG);
    for cell in obs.cells() {
        out.extend_from_slice(&cell.code().to_le_bytes());
    }
    out.push(b'I');
    for (item, n) in obs.inventory() {
        out.push(item.code());
        out.extend_from_slice(&n.to_le_bytes());
    }
    if let Some(v) = obs.vitals() {
        out.extend_from_slice(&[b'V', v.health, v.food]);
    }
    out
}

pub fn hash_observation(obs: &Observation) -> StateKey {
    StateKey(xxh3_64_with_seed(&canonical_bytes(obs), HASH_SEED))
}

/// Difference between two observations: changed view cells as
/// `(index, old code, new code)`, signed inventory deltas and vitals deltas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Change {
    pub cells: Vec<(u8, u16, u16)>,
    pub inventory: Vec<(Item, i64)>,
    pub vitals: Option<(i16, i16)>,
}

impl Change {
    pub fn between(prev: &Observation, next: &Observation) -> Result<Change> {
        if prev.vitals().is_some() != next.vitals().is_some() {
            return Err(Error::usage(
                "compute_change: observations differ in shape (vitals present in only one)",
            ));
        }
        let cells = prev
            .cells()
            .zip(next.cells())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| (i as u8, a.code(), b.code()))
            .collect();
        let items: BTreeSet<Item> = prev
            .inventory()
            .keys()
            .chain(next.inventory().keys())
            .copied()
            .collect();
        let inventory = items
            .into_iter()
            .map(|item| (item, next.count(item) as i64 - prev.count(item) as i64))
            .filter(|(_, d)| *d != 0)
            .collect();
        let vitals = match (prev.vitals(), next.vitals()) {
            (Some(a), Some(b)) if a != b => Some((
                b.health as i16 - a.health as i16,
                b.food as i16 - a.food as i16,
            )),
            _ => None,
        };
        Ok(Change {
            cells,
            inventory,
            vitals,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.inventory.is_empty() && self.vitals.is_none()
    }

    pub fn key(&self) -> ChangeKey {
        let mut out = Vec::with_capacity(1 + 5 * self.cells.len());
        out.push(CHANGE_TAG);
        for &(idx, old, new) in &self.cells {
            out.push(idx);
            out.extend_from_slice(&old.to_le_bytes());
            out.extend_from_slice(&new.to_le_bytes());
        }
        if !self.inventory.is_empty() {
            out.push(b'I');
            for (item, d) in &self.inventory {
                out.push(item.code());
                out.extend_from_slice(&d.to_le_bytes());
            }
        }
        if let Some((dh, df)) = self.vitals {
            out.push(b'V');
            out.extend_from_slice(&dh.to_le_bytes());
            out.extend_from_slice(&df.to_le_bytes());
        }
        ChangeKey(xxh3_64_with_seed(&out, HASH_SEED))
    }
}

/// Key of the change from `prev` to `next`.
pub fn compute_change(prev: &Observation, next: &Observation) -> Result<ChangeKey> {
    Ok(Change::between(prev, next)?.key())
}
