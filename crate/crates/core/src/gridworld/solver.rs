//! Scripted planner used to reject unsolvable layouts and as a test oracle.
//!
//! Navigation is breadth-first search over (position, heading) with the
//! three movement actions; the task scripts chain navigation targets with
//! interaction actions and replay everything against the real dynamics.

use std::collections::{HashMap, VecDeque};

use super::cell::{Action, Direction, DoorState, Item, ObjectKind};
use super::env::{Achievement, EnvKind, EnvState, Environment};

type Pose = ((usize, usize), Direction);

/// Shortest movement sequence from the current pose to any pose satisfying
/// `goal`. Only walkable cells are entered.
pub fn navigate(state: &EnvState, goal: impl Fn(&EnvState, Pose) -> bool) -> Option<Vec<Action>> {
    let start: Pose = (state.agent_pos(), state.agent_dir());
    let mut prev: HashMap<Pose, (Pose, Action)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = std::collections::HashSet::from([start]);
    while let Some(pose) = queue.pop_front() {
        if goal(state, pose) {
            let mut path = Vec::new();
            let mut cur = pose;
            while cur != start {
                let (p, a) = prev[&cur];
                path.push(a);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let ((r, c), d) = pose;
        let (dr, dc) = d.delta();
        let (fr, fc) = (r as i64 + dr, c as i64 + dc);
        let mut next = vec![((r, c), d.left()), ((r, c), d.right())];
        let actions = [Action::TurnLeft, Action::TurnRight, Action::Forward];
        if state.cell_at(fr, fc).walkable() {
            next.push(((fr as usize, fc as usize), d));
        }
        for (n, a) in next.into_iter().zip(actions) {
            if seen.insert(n) {
                prev.insert(n, (pose, a));
                queue.push_back(n);
            }
        }
    }
    None
}

fn front_kind(state: &EnvState, ((r, c), d): Pose) -> ObjectKind {
    let (dr, dc) = d.delta();
    state.cell_at(r as i64 + dr, c as i64 + dc).kind()
}

/// Navigation target: face a cell of `kind`.
fn facing(kind: ObjectKind) -> impl Fn(&EnvState, Pose) -> bool {
    move |s, pose| front_kind(s, pose) == kind
}

struct Runner {
    env: Environment,
    trace: Vec<Action>,
    success: bool,
}

impl Runner {
    fn run(&mut self, actions: &[Action]) -> Option<()> {
        for &a in actions {
            let step = self.env.step(a).ok()?;
            self.success |= step.info.success;
            self.trace.push(a);
        }
        Some(())
    }

    fn state(&self) -> &EnvState {
        self.env.state().expect("runner env has state")
    }

    fn go(&mut self, goal: impl Fn(&EnvState, Pose) -> bool) -> Option<()> {
        let path = navigate(self.state(), goal)?;
        self.run(&path)
    }
}

/// Plans a goal-reaching action sequence for `state`: the success step for
/// doorkey and unlock, all six achievements for the crafting world. Returns
/// `None` when the plan fails or the episode would end first.
pub fn solve(kind: EnvKind, state: &EnvState) -> Option<Vec<Action>> {
    let mut runner = Runner {
        env: Environment::with_state(kind, state.clone()),
        trace: Vec::new(),
        success: false,
    };
    let ok = match kind {
        EnvKind::Doorkey | EnvKind::Unlock => solve_rooms(&mut runner, kind),
        EnvKind::Craftworld => solve_craft(&mut runner),
    };
    ok?;
    let s = runner.state();
    let finished = match kind {
        EnvKind::Doorkey | EnvKind::Unlock => runner.success,
        EnvKind::Craftworld => s.achievements().len() == Achievement::ALL.len(),
    };
    finished.then_some(runner.trace)
}

fn solve_rooms(r: &mut Runner, kind: EnvKind) -> Option<()> {
    if r.state().carried_key().is_none() {
        r.go(facing(ObjectKind::Key))?;
        r.run(&[Action::Pickup])?;
    }
    let locked = |s: &EnvState, ((row, col), d): Pose| {
        let (dr, dc) = d.delta();
        let cell = s.cell_at(row as i64 + dr, col as i64 + dc);
        cell.kind() == ObjectKind::Door && cell.door_state() == Some(DoorState::Locked)
    };
    if navigate(r.state(), locked).is_some() {
        r.go(locked)?;
        r.run(&[Action::Toggle])?;
    }
    if kind == EnvKind::Doorkey {
        r.go(facing(ObjectKind::Goal))?;
        r.run(&[Action::Forward])?;
    }
    Some(())
}

fn near_table(s: &EnvState, ((row, col), _): Pose) -> bool {
    (-1..=1).any(|dr| {
        (-1..=1).any(|dc| s.cell_at(row as i64 + dr, col as i64 + dc).kind() == ObjectKind::CraftingTable)
    })
}

/// Picks up where the episode stands, so it also serves mid-episode.
fn solve_craft(r: &mut Runner) -> Option<()> {
    let done = |r: &Runner, a: Achievement| r.state().achievements().contains(&a);
    let wood_needed = [Achievement::PlaceTable, Achievement::MakePickaxe, Achievement::MakeStonePickaxe]
        .iter()
        .filter(|&&a| !done(r, a))
        .count() as u32;
    if r.state().count(Item::Wood) < wood_needed || !done(r, Achievement::CollectWood) {
        r.go(facing(ObjectKind::ResourceTree))?;
        while r.state().count(Item::Wood) < wood_needed.max(1) {
            r.run(&[Action::Pickup])?;
        }
    }
    if !done(r, Achievement::PlaceTable) {
        r.go(facing(ObjectKind::Empty))?;
        r.run(&[Action::Craft])?;
    }
    if !done(r, Achievement::MakePickaxe) {
        r.go(near_table)?;
        r.run(&[Action::Craft])?;
    }
    if !done(r, Achievement::MakeStonePickaxe) && r.state().count(Item::Stone) == 0 {
        r.go(facing(ObjectKind::ResourceStone))?;
        r.run(&[Action::Pickup])?;
    }
    if !done(r, Achievement::MakeStonePickaxe) {
        r.go(near_table)?;
        r.run(&[Action::Craft])?;
    }
    if !done(r, Achievement::CollectDiamond) {
        r.go(facing(ObjectKind::ResourceDiamond))?;
        r.run(&[Action::Pickup])?;
    }
    Some(())
}

/// Next action of the scripted solver from the environment's current state.
pub fn scripted_action(env: &Environment) -> Option<Action> {
    let state = env.state()?;
    solve(env.kind(), state)?.first().copied()
}
