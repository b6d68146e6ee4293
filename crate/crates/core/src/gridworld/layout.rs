//! Procedural map generation with rejection of unsolvable layouts.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::cell::{Cell, Direction, DoorState, ObjectKind, MAX_COLOR};
use super::env::{EnvKind, EnvState, MAX_VITAL};
use super::observation::Vitals;
use super::solver;
use crate::rng::StreamRng;

pub const ROOMS_HEIGHT: usize = 6;
pub const ROOMS_WIDTH: usize = 12;
/// Column of the wall separating the two rooms.
pub const PARTITION_COL: usize = 6;
pub const CRAFT_SIZE: usize = 12;
pub const CRAFT_TREES: usize = 10;
pub const CRAFT_STONES: usize = 8;

const MAX_ATTEMPTS: usize = 10_000;

pub(crate) fn generate(kind: EnvKind, rng: &mut StreamRng) -> EnvState {
    for _ in 0..MAX_ATTEMPTS {
        let state = match kind {
            EnvKind::Doorkey | EnvKind::Unlock => two_rooms(kind, rng),
            EnvKind::Craftworld => craft_map(rng),
        };
        if solver::solve(kind, &state).is_some() {
            return state;
        }
    }
    unreachable!("no solvable {kind} layout in {MAX_ATTEMPTS} attempts")
}

fn bordered(height: usize, width: usize) -> EnvState {
    let mut grid = vec![Cell::EMPTY; height * width];
    for r in 0..height {
        for c in 0..width {
            if r == 0 || c == 0 || r == height - 1 || c == width - 1 {
                grid[r * width + c] = Cell::WALL;
            }
        }
    }
    EnvState {
        height,
        width,
        grid,
        agent_pos: (1, 1),
        agent_dir: Direction::North,
        step_count: 0,
        inventory: BTreeMap::new(),
        vitals: None,
        achievements: BTreeSet::new(),
        done: false,
        layout_seed: 0,
    }
}

fn empty_cells(state: &EnvState, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<(usize, usize)> {
    rows.flat_map(|r| cols.clone().map(move |c| (r, c)))
        .filter(|&(r, c)| state.cell(r, c) == Cell::EMPTY)
        .collect()
}

fn two_rooms(kind: EnvKind, rng: &mut StreamRng) -> EnvState {
    let mut s = bordered(ROOMS_HEIGHT, ROOMS_WIDTH);
    for r in 0..ROOMS_HEIGHT {
        s.set(r, PARTITION_COL, Cell::WALL);
    }
    let color = rng.gen_range(0..=MAX_COLOR);
    let door_row = rng.gen_range(1..ROOMS_HEIGHT - 1);
    s.set(door_row, PARTITION_COL, Cell::door(DoorState::Locked, color));
    if kind == EnvKind::Doorkey {
        s.set(ROOMS_HEIGHT - 2, ROOMS_WIDTH - 2, Cell::GOAL);
    }
    let mut left = empty_cells(&s, 1..ROOMS_HEIGHT - 1, 1..PARTITION_COL);
    left.shuffle(rng);
    let (kr, kc) = left[0];
    s.set(kr, kc, Cell::key(color));
    s.agent_pos = left[1];
    s.agent_dir = Direction::ALL[rng.gen_range(0..4)];
    s
}

fn craft_map(rng: &mut StreamRng) -> EnvState {
    let mut s = bordered(CRAFT_SIZE, CRAFT_SIZE);
    let mut free = empty_cells(&s, 1..CRAFT_SIZE - 1, 1..CRAFT_SIZE - 1);
    free.shuffle(rng);
    let mut cells = free.into_iter();
    for _ in 0..CRAFT_TREES {
        let (r, c) = cells.next().expect("map too small");
        s.set(r, c, Cell::plain(ObjectKind::ResourceTree));
    }
    for _ in 0..CRAFT_STONES {
        let (r, c) = cells.next().expect("map too small");
        s.set(r, c, Cell::plain(ObjectKind::ResourceStone));
    }
    let (r, c) = cells.next().expect("map too small");
    s.set(r, c, Cell::plain(ObjectKind::ResourceDiamond));
    s.agent_pos = cells.next().expect("map too small");
    s.agent_dir = Direction::ALL[rng.gen_range(0..4)];
    s.vitals = Some(Vitals {
        health: MAX_VITAL,
        food: MAX_VITAL,
    });
    s
}
