use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::cell::{Action, Cell, Direction, DoorState, Item, ObjectKind};
use super::layout;
use super::observation::{Observation, Vitals, AGENT_VIEW_COL, AGENT_VIEW_ROW, VIEW_SIZE};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, StreamRng};

pub const CRAFT_MAX_STEPS: u32 = 1000;
/// Steps between hunger ticks in the crafting world.
pub const HUNGER_INTERVAL: u32 = 25;
pub const MAX_VITAL: u8 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Doorkey,
    Unlock,
    Craftworld,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvFamily {
    Minigrid,
    Crafter,
}

impl EnvKind {
    pub fn family(self) -> EnvFamily {
        match self {
            EnvKind::Doorkey | EnvKind::Unlock => EnvFamily::Minigrid,
            EnvKind::Craftworld => EnvFamily::Crafter,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Doorkey => "doorkey",
            EnvKind::Unlock => "unlock",
            EnvKind::Craftworld => "craftworld",
        }
    }

    /// Map dimensions as (height, width).
    pub fn dims(self) -> (usize, usize) {
        match self {
            EnvKind::Doorkey | EnvKind::Unlock => (layout::ROOMS_HEIGHT, layout::ROOMS_WIDTH),
            EnvKind::Craftworld => (layout::CRAFT_SIZE, layout::CRAFT_SIZE),
        }
    }

    pub fn max_steps(self) -> u32 {
        match self {
            EnvKind::Doorkey | EnvKind::Unlock => {
                let (h, w) = self.dims();
                4 * (h * w) as u32
            }
            EnvKind::Craftworld => CRAFT_MAX_STEPS,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "doorkey" => Ok(EnvKind::Doorkey),
            "unlock" => Ok(EnvKind::Unlock),
            "craftworld" | "crafter" => Ok(EnvKind::Craftworld),
            other => Err(Error::config(format!("unknown environment kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Achievement {
    CollectWood,
    PlaceTable,
    MakePickaxe,
    CollectStone,
    MakeStonePickaxe,
    CollectDiamond,
}

impl Achievement {
    pub const ALL: [Achievement; 6] = [
        Achievement::CollectWood,
        Achievement::PlaceTable,
        Achievement::MakePickaxe,
        Achievement::CollectStone,
        Achievement::MakeStonePickaxe,
        Achievement::CollectDiamond,
    ];
}

/// Full simulator state for one episode.
///
/// The agent is tracked by position and is never stored in `grid`; it is
/// drawn in only when rendering observations or exporting layouts, which
/// keeps exactly one agent on the map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvState {
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) grid: Vec<Cell>,
    pub(crate) agent_pos: (usize, usize),
    pub(crate) agent_dir: Direction,
    pub(crate) step_count: u32,
    pub(crate) inventory: BTreeMap<Item, u32>,
    pub(crate) vitals: Option<Vitals>,
    pub(crate) achievements: BTreeSet<Achievement>,
    pub(crate) done: bool,
    /// Seed the layout was generated from; the dynamics are deterministic.
    pub(crate) layout_seed: u64,
}

impl EnvState {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.grid[row * self.width + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.grid[row * self.width + col] = cell;
    }

    /// Cell at a signed position; anything off the map reads as wall.
    pub fn cell_at(&self, row: i64, col: i64) -> Cell {
        if row < 0 || col < 0 || row >= self.height as i64 || col >= self.width as i64 {
            Cell::WALL
        } else {
            self.cell(row as usize, col as usize)
        }
    }

    pub fn agent_pos(&self) -> (usize, usize) {
        self.agent_pos
    }

    pub fn agent_dir(&self) -> Direction {
        self.agent_dir
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    pub fn achievements(&self) -> &BTreeSet<Achievement> {
        &self.achievements
    }

    pub fn inventory(&self) -> &BTreeMap<Item, u32> {
        &self.inventory
    }

    pub fn vitals(&self) -> Option<Vitals> {
        self.vitals
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn layout_seed(&self) -> u64 {
        self.layout_seed
    }

    pub(crate) fn front_pos(&self) -> (i64, i64) {
        let (dr, dc) = self.agent_dir.delta();
        (self.agent_pos.0 as i64 + dr, self.agent_pos.1 as i64 + dc)
    }

    pub(crate) fn count(&self, item: Item) -> u32 {
        self.inventory.get(&item).copied().unwrap_or(0)
    }

    fn add(&mut self, item: Item, n: u32) {
        *self.inventory.entry(item).or_insert(0) += n;
    }

    fn take(&mut self, item: Item, n: u32) {
        let slot = self.inventory.entry(item).or_insert(0);
        *slot -= n;
        if *slot == 0 {
            self.inventory.remove(&item);
        }
    }

    pub(crate) fn carried_key(&self) -> Option<u8> {
        self.inventory.keys().find_map(|i| match i {
            Item::Key(c) => Some(*c),
            _ => None,
        })
    }

    /// Whether a crafting table lies in the 3x3 block around the agent.
    pub(crate) fn table_nearby(&self) -> bool {
        let (r, c) = (self.agent_pos.0 as i64, self.agent_pos.1 as i64);
        (-1..=1).any(|dr| {
            (-1..=1).any(|dc| self.cell_at(r + dr, c + dc).kind() == ObjectKind::CraftingTable)
        })
    }

    /// Row-major cell codes with the agent drawn in.
    pub fn grid_codes(&self) -> Vec<u16> {
        let mut codes: Vec<u16> = self.grid.iter().map(Cell::code).collect();
        codes[self.agent_pos.0 * self.width + self.agent_pos.1] = Cell::AGENT.code();
        codes
    }

    pub fn observe(&self) -> Observation {
        let mut view = [[Cell::WALL; VIEW_SIZE]; VIEW_SIZE];
        let (fr, fc) = self.agent_dir.delta();
        let (rr, rc) = self.agent_dir.right().delta();
        let (ar, ac) = (self.agent_pos.0 as i64, self.agent_pos.1 as i64);
        for (vr, row) in view.iter_mut().enumerate() {
            let ahead = (AGENT_VIEW_ROW - vr) as i64;
            for (vc, slot) in row.iter_mut().enumerate() {
                let lateral = vc as i64 - AGENT_VIEW_COL as i64;
                *slot = self.cell_at(ar + ahead * fr + lateral * rr, ac + ahead * fc + lateral * rc);
            }
        }
        view[AGENT_VIEW_ROW][AGENT_VIEW_COL] = Cell::AGENT;
        Observation::new(view, self.inventory.clone(), self.vitals)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepInfo {
    /// The episode's goal was reached on this step.
    pub success: bool,
    /// Achievement unlocked for the first time this episode.
    pub achievement: Option<Achievement>,
    /// The episode ended by exhausting `max_steps`.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub extrinsic_reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Construction parameters of an environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub layout_seed: u64,
    pub fixed_layout: bool,
}

impl EnvSpec {
    pub fn new(kind: EnvKind, layout_seed: u64, fixed_layout: bool) -> Self {
        EnvSpec {
            kind,
            layout_seed,
            fixed_layout,
        }
    }

    pub fn build(&self) -> Environment {
        make_env(self.kind, self.layout_seed, self.fixed_layout)
    }
}

/// A seeded environment instance. Single-threaded; distinct instances share
/// no state and can live on different threads.
#[derive(Clone, Debug)]
pub struct Environment {
    kind: EnvKind,
    layout_seed: u64,
    fixed_layout: bool,
    max_steps: u32,
    state: Option<EnvState>,
    episode_seed: u64,
}

/// Builds an environment. With `fixed_layout` every reset produces the map
/// generated from `layout_seed`; otherwise each reset draws a fresh map from
/// the episode seed.
pub fn make_env(kind: EnvKind, layout_seed: u64, fixed_layout: bool) -> Environment {
    Environment {
        kind,
        layout_seed,
        fixed_layout,
        max_steps: kind.max_steps(),
        state: None,
        episode_seed: 0,
    }
}

impl Environment {
    pub(crate) fn with_state(kind: EnvKind, state: EnvState) -> Environment {
        Environment {
            kind,
            layout_seed: state.layout_seed,
            fixed_layout: true,
            max_steps: kind.max_steps(),
            state: Some(state),
            episode_seed: 0,
        }
    }

    pub fn kind(&self) -> EnvKind {
        self.kind
    }

    pub fn layout_seed(&self) -> u64 {
        self.layout_seed
    }

    pub fn fixed_layout(&self) -> bool {
        self.fixed_layout
    }

    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    pub fn episode_seed(&self) -> u64 {
        self.episode_seed
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.state.as_ref().is_none_or(|s| s.done)
    }

    pub fn reset(&mut self, episode_seed: u64) -> Observation {
        let seed = if self.fixed_layout {
            self.layout_seed
        } else {
            mix_seed(self.layout_seed, episode_seed)
        };
        let mut rng = StreamRng::seed_from_u64(seed);
        let mut state = layout::generate(self.kind, &mut rng);
        state.layout_seed = seed;
        let obs = state.observe();
        self.state = Some(state);
        self.episode_seed = episode_seed;
        obs
    }

    /// Current observation. Errors if the environment was never reset.
    pub fn observe(&self) -> Result<Observation> {
        self.state
            .as_ref()
            .map(EnvState::observe)
            .ok_or_else(|| Error::usage("observe before reset"))
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let kind = self.kind;
        let max_steps = self.max_steps;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| Error::usage("step before reset"))?;
        if state.done {
            return Err(Error::usage("step after episode end; call reset"));
        }
        let mut reward = 0.0;
        let mut info = StepInfo::default();
        let mut unlocked = None;

        match action {
            Action::TurnLeft => state.agent_dir = state.agent_dir.left(),
            Action::TurnRight => state.agent_dir = state.agent_dir.right(),
            Action::Forward => {
                let (r, c) = state.front_pos();
                let front = state.cell_at(r, c);
                if front.walkable() {
                    state.agent_pos = (r as usize, c as usize);
                    if front.kind() == ObjectKind::Goal && kind == EnvKind::Doorkey {
                        reward = 1.0;
                        info.success = true;
                        state.done = true;
                    }
                }
            }
            Action::Pickup => {
                let (r, c) = state.front_pos();
                let front = state.cell_at(r, c);
                match (kind.family(), front.kind()) {
                    (EnvFamily::Minigrid, ObjectKind::Key) if state.inventory.is_empty() => {
                        state.add(Item::Key(front.color().unwrap_or(0)), 1);
                        state.set(r as usize, c as usize, Cell::EMPTY);
                    }
                    (EnvFamily::Crafter, ObjectKind::ResourceTree) => {
                        state.add(Item::Wood, 1);
                        unlocked = Some(Achievement::CollectWood);
                    }
                    (EnvFamily::Crafter, ObjectKind::ResourceStone)
                        if state.count(Item::WoodPickaxe) > 0 =>
                    {
                        state.add(Item::Stone, 1);
                        state.set(r as usize, c as usize, Cell::EMPTY);
                        unlocked = Some(Achievement::CollectStone);
                    }
                    (EnvFamily::Crafter, ObjectKind::ResourceDiamond)
                        if state.count(Item::StonePickaxe) > 0 =>
                    {
                        state.add(Item::Diamond, 1);
                        state.set(r as usize, c as usize, Cell::EMPTY);
                        unlocked = Some(Achievement::CollectDiamond);
                    }
                    _ => {}
                }
            }
            Action::Toggle => {
                let (r, c) = state.front_pos();
                let front = state.cell_at(r, c);
                if front.kind() == ObjectKind::Door {
                    let color = front.color().unwrap_or(0);
                    let next = match front.door_state() {
                        Some(DoorState::Locked) if state.carried_key() == Some(color) => {
                            if kind == EnvKind::Unlock {
                                reward = 1.0;
                                info.success = true;
                                state.done = true;
                            }
                            Some(DoorState::Open)
                        }
                        Some(DoorState::Closed) => Some(DoorState::Open),
                        Some(DoorState::Open) => Some(DoorState::Closed),
                        _ => None,
                    };
                    if let Some(s) = next {
                        state.set(r as usize, c as usize, Cell::door(s, color));
                    }
                }
            }
            Action::Craft => {
                if kind == EnvKind::Craftworld {
                    unlocked = craft(state);
                }
            }
            Action::Noop => {}
        }

        if let Some(a) = unlocked {
            if state.achievements.insert(a) {
                reward += 1.0;
                info.achievement = Some(a);
            }
        }

        state.step_count += 1;
        if let Some(v) = state.vitals.as_mut() {
            if state.step_count % HUNGER_INTERVAL == 0 {
                if v.food > 0 {
                    v.food -= 1;
                } else {
                    v.health = v.health.saturating_sub(1);
                }
            }
            if v.health == 0 {
                state.done = true;
            }
        }
        if state.step_count >= max_steps && !state.done {
            state.done = true;
            info.truncated = true;
        }

        Ok(StepResult {
            observation: state.observe(),
            extrinsic_reward: reward,
            done: state.done,
            info,
        })
    }

    /// Serializable snapshot of the current layout.
    pub fn layout_codes(&self) -> Option<Vec<u16>> {
        self.state.as_ref().map(EnvState::grid_codes)
    }
}

/// Crafting rules. Next to a table: a wood pickaxe costs one wood, then a
/// stone pickaxe costs one wood and one stone. Away from a table, one wood
/// places a table on the empty cell in front.
fn craft(state: &mut EnvState) -> Option<Achievement> {
    let wood = state.count(Item::Wood);
    if state.table_nearby() {
        if state.count(Item::WoodPickaxe) == 0 && wood >= 1 {
            state.take(Item::Wood, 1);
            state.add(Item::WoodPickaxe, 1);
            return Some(Achievement::MakePickaxe);
        }
        if state.count(Item::WoodPickaxe) > 0
            && state.count(Item::StonePickaxe) == 0
            && wood >= 1
            && state.count(Item::Stone) >= 1
        {
            state.take(Item::Wood, 1);
            state.take(Item::Stone, 1);
            state.add(Item::StonePickaxe, 1);
            return Some(Achievement::MakeStonePickaxe);
        }
        return None;
    }
    let (r, c) = state.front_pos();
    if wood >= 1 && state.cell_at(r, c).kind() == ObjectKind::Empty {
        state.take(Item::Wood, 1);
        state.set(r as usize, c as usize, Cell::plain(ObjectKind::CraftingTable));
        return Some(Achievement::PlaceTable);
    }
    None
}
