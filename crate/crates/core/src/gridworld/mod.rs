//! Seeded sparse-reward grid environments: two-room `doorkey` / `unlock`
//! tasks and a reduced crafting world.

mod cell;
mod env;
mod layout;
mod observation;
mod replay;
pub mod solver;

pub use cell::{Action, Cell, Direction, DoorState, Item, ObjectKind, MAX_COLOR};
pub use env::{
    make_env, Achievement, EnvFamily, EnvKind, EnvSpec, EnvState, Environment, StepInfo, StepResult,
    CRAFT_MAX_STEPS, HUNGER_INTERVAL, MAX_VITAL,
};
pub use layout::{CRAFT_SIZE, PARTITION_COL, ROOMS_HEIGHT, ROOMS_WIDTH};
pub use observation::{Observation, Vitals, AGENT_VIEW_COL, AGENT_VIEW_ROW, VIEW_CELLS, VIEW_SIZE};
pub use replay::{Replay, ReplayOutcome};
