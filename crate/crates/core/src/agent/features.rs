//! Fixed sparse binarization of observations.
//!
//! Every view cell contributes one active unit chosen by its category, the
//! inventory contributes one unit per item slot (count bucket 0, 1, 2, 3+),
//! vitals contribute one unit each for health and food, and a constant bias
//! unit is always on.

use crate::gridworld::{DoorState, Item, ObjectKind, Observation, VIEW_CELLS};

pub const CELL_CATEGORIES: usize = 12;
pub const INVENTORY_BUCKETS: usize = 4;
pub const VITAL_LEVELS: usize = 10;

const VIEW_UNITS: usize = VIEW_CELLS * CELL_CATEGORIES;
const INVENTORY_OFFSET: usize = VIEW_UNITS;
const VITALS_OFFSET: usize = INVENTORY_OFFSET + Item::SLOTS * INVENTORY_BUCKETS;
const BIAS_UNIT: usize = VITALS_OFFSET + 2 * VITAL_LEVELS;

/// Width of the binarized input.
pub const INPUT_DIM: usize = BIAS_UNIT + 1;

/// Indices of the active (value 1) units, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseInput {
    active: Vec<u32>,
}

impl SparseInput {
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    /// Dense 0/1 vector; used by tests and diagnostics.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; INPUT_DIM];
        for &i in &self.active {
            v[i as usize] = 1.0;
        }
        v
    }
}

fn category(kind: ObjectKind, door: Option<DoorState>) -> usize {
    match (kind, door) {
        (ObjectKind::Empty, _) => 0,
        (ObjectKind::Wall, _) => 1,
        (ObjectKind::Door, Some(DoorState::Open)) => 2,
        (ObjectKind::Door, Some(DoorState::Closed)) => 3,
        (ObjectKind::Door, _) => 4,
        (ObjectKind::Key, _) => 5,
        (ObjectKind::Goal, _) => 6,
        (ObjectKind::ResourceTree, _) => 7,
        (ObjectKind::ResourceStone, _) => 8,
        (ObjectKind::CraftingTable, _) => 9,
        (ObjectKind::Agent, _) => 10,
        (ObjectKind::ResourceDiamond, _) => 11,
    }
}

pub fn binarize(obs: &Observation) -> SparseInput {
    let mut active = Vec::with_capacity(VIEW_CELLS + Item::SLOTS + 3);
    for (i, cell) in obs.cells().enumerate() {
        active.push((i * CELL_CATEGORIES + category(cell.kind(), cell.door_state())) as u32);
    }
    let mut slots = [0u32; Item::SLOTS];
    for (item, n) in obs.inventory() {
        slots[item.slot()] += n;
    }
    for (slot, n) in slots.iter().enumerate() {
        let bucket = (*n as usize).min(INVENTORY_BUCKETS - 1);
        active.push((INVENTORY_OFFSET + slot * INVENTORY_BUCKETS + bucket) as u32);
    }
    if let Some(v) = obs.vitals() {
        let h = (v.health as usize).min(VITAL_LEVELS - 1);
        let f = (v.food as usize).min(VITAL_LEVELS - 1);
        active.push((VITALS_OFFSET + h) as u32);
        active.push((VITALS_OFFSET + VITAL_LEVELS + f) as u32);
    }
    active.push(BIAS_UNIT as u32);
    SparseInput { active }
}
