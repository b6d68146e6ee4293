use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cell::{Cell, Item};

pub const VIEW_SIZE: usize = 7;
pub const VIEW_CELLS: usize = VIEW_SIZE * VIEW_SIZE;
/// Position of the agent inside its own view: bottom row, center column.
pub const AGENT_VIEW_ROW: usize = VIEW_SIZE - 1;
pub const AGENT_VIEW_COL: usize = VIEW_SIZE / 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vitals {
    pub health: u8,
    pub food: u8,
}

/// Egocentric 7x7 view plus carried items. Row 0 is the farthest row ahead of
/// the agent; the agent sits at `(AGENT_VIEW_ROW, AGENT_VIEW_COL)` facing up.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    view: [[Cell; VIEW_SIZE]; VIEW_SIZE],
    inventory: BTreeMap<Item, u32>,
    vitals: Option<Vitals>,
}

impl Observation {
    pub fn new(
        view: [[Cell; VIEW_SIZE]; VIEW_SIZE],
        inventory: BTreeMap<Item, u32>,
        vitals: Option<Vitals>,
    ) -> Self {
        let inventory = inventory.into_iter().filter(|(_, n)| *n > 0).collect();
        Observation {
            view,
            inventory,
            vitals,
        }
    }

    pub fn view(&self) -> &[[Cell; VIEW_SIZE]; VIEW_SIZE] {
        &self.view
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.view[row][col]
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.view.iter().flatten().copied()
    }

    /// Carried items with nonzero counts, in a canonical order.
    pub fn inventory(&self) -> &BTreeMap<Item, u32> {
        &self.inventory
    }

    pub fn count(&self, item: Item) -> u32 {
        self.inventory.get(&item).copied().unwrap_or(0)
    }

    pub fn vitals(&self) -> Option<Vitals> {
        self.vitals
    }

    /// The cell directly in front of the agent.
    pub fn front(&self) -> Cell {
        self.view[AGENT_VIEW_ROW - 1][AGENT_VIEW_COL]
    }
}
