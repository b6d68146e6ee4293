#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use cbet::agent::{
    binarize, loss_and_gradient, AgentStream, SparseInput, StreamRole, StreamShape, TrainHyper, Trajectory, Transition,
    UpdateContext,
};
use cbet::gridworld::{Action, Direction, EnvKind, EnvState, Environment, ObjectKind};
use cbet::rng::StreamRng;

/// Plain dictionary reference for the pseudocount reward.
#[derive(Default)]
pub struct DictCounts {
    pub states: HashMap<u64, u64>,
    pub changes: HashMap<u64, u64>,
}

impl DictCounts {
    pub fn observe(&mut self, s: u64, c: u64) -> f64 {
        let ns = self.states.entry(s).or_insert(0);
        *ns += 1;
        let ns = *ns;
        let nc = self.changes.entry(c).or_insert(0);
        *nc += 1;
        1.0 / (ns + *nc) as f64
    }

    pub fn clear(&mut self) {
        self.states.clear();
        self.changes.clear();
    }
}

type Pose = ((usize, usize), Direction);

fn front(((r, c), d): Pose) -> (i64, i64) {
    let (dr, dc) = d.delta();
    (r as i64 + dr, c as i64 + dc)
}

/// Shortest turn/forward sequence from the agent's pose to a pose satisfying
/// `goal`, walking only on cells the map reports as walkable.
pub fn plan_to(state: &EnvState, goal: impl Fn(&EnvState, Pose) -> bool) -> Option<Vec<Action>> {
    let start = (state.agent_pos(), state.agent_dir());
    let mut prev: HashMap<Pose, (Pose, Action)> = HashMap::new();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(pose) = queue.pop_front() {
        if goal(state, pose) {
            let mut path = Vec::new();
            let mut cur = pose;
            while let Some(&(p, a)) = prev.get(&cur) {
                path.push(a);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let (pos, d) = pose;
        let mut next = vec![((pos, d.left()), Action::TurnLeft), ((pos, d.right()), Action::TurnRight)];
        let (fr, fc) = front(pose);
        if state.cell_at(fr, fc).walkable() {
            next.push((((fr as usize, fc as usize), d), Action::Forward));
        }
        for (n, a) in next {
            if seen.insert(n) {
                prev.insert(n, (pose, a));
                queue.push_back(n);
            }
        }
    }
    None
}

pub fn facing(kind: ObjectKind) -> impl Fn(&EnvState, Pose) -> bool {
    move |s, pose| {
        let (r, c) = front(pose);
        s.cell_at(r, c).kind() == kind
    }
}

/// Runs `actions`, returning the summed extrinsic reward.
pub fn play(env: &mut Environment, actions: &[Action]) -> f64 {
    actions.iter().map(|&a| env.step(a).unwrap().extrinsic_reward).sum()
}

/// Cells reachable from `from` through cells accepted by `pass`.
pub fn flood(state: &EnvState, from: (usize, usize), pass: impl Fn(ObjectKind) -> bool) -> HashSet<(usize, usize)> {
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some((r, c)) = queue.pop_front() {
        for d in Direction::ALL {
            let (dr, dc) = d.delta();
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr < 0 || nc < 0 || nr as usize >= state.height() || nc as usize >= state.width() {
                continue;
            }
            let n = (nr as usize, nc as usize);
            if pass(state.cell(n.0, n.1).kind()) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn cells_of(state: &EnvState, kind: ObjectKind) -> Vec<(usize, usize)> {
    (0..state.height())
        .flat_map(|r| (0..state.width()).map(move |c| (r, c)))
        .filter(|&(r, c)| state.cell(r, c).kind() == kind)
        .collect()
}

fn adjacent_to(region: &HashSet<(usize, usize)>, (r, c): (usize, usize)) -> bool {
    Direction::ALL.iter().any(|d| {
        let (dr, dc) = d.delta();
        region.contains(&((r as i64 + dr) as usize, (c as i64 + dc) as usize))
    })
}

/// Reachability oracle for the two-room tasks: the key and the locked door
/// touch the agent's room, and (doorkey) the goal is reachable once the door
/// is open.
pub fn rooms_reachable(state: &EnvState, kind: EnvKind) -> bool {
    let walk = |k: ObjectKind| matches!(k, ObjectKind::Empty | ObjectKind::Goal);
    let room = flood(state, state.agent_pos(), walk);
    let keys = cells_of(state, ObjectKind::Key);
    let doors = cells_of(state, ObjectKind::Door);
    if keys.len() != 1 || doors.len() != 1 {
        return false;
    }
    // the key cell empties once picked up
    let after_pickup = flood(state, state.agent_pos(), |k| walk(k) || k == ObjectKind::Key);
    if !adjacent_to(&room, keys[0]) || !adjacent_to(&after_pickup, doors[0]) {
        return false;
    }
    match kind {
        EnvKind::Doorkey => {
            let open = flood(state, state.agent_pos(), |k| walk(k) || k == ObjectKind::Door || k == ObjectKind::Key);
            cells_of(state, ObjectKind::Goal).iter().any(|g| open.contains(g))
        }
        _ => true,
    }
}

/// Reachability oracle for the crafting map: a tree and a stone touch the
/// agent's region, and a diamond is reachable once stones can be mined.
pub fn craft_reachable(state: &EnvState) -> bool {
    let region = flood(state, state.agent_pos(), |k| k == ObjectKind::Empty);
    let touches = |k| cells_of(state, k).iter().any(|&p| adjacent_to(&region, p));
    let mined = flood(state, state.agent_pos(), |k| {
        matches!(k, ObjectKind::Empty | ObjectKind::ResourceStone)
    });
    touches(ObjectKind::ResourceTree)
        && touches(ObjectKind::ResourceStone)
        && cells_of(state, ObjectKind::ResourceDiamond)
            .iter()
            .any(|&p| adjacent_to(&mined, p))
}

/// Explicit double sum of the truncated importance-weighted target, without
/// the backward recursion. `values` carries the bootstrap value last.
#[allow(clippy::too_many_arguments)]
pub fn expanded_targets(
    rewards: &[f64],
    dones: &[bool],
    values: &[f64],
    ratios: &[f64],
    rho_bar: f64,
    c_bar: f64,
    gamma: f64,
    n: usize,
) -> Vec<f64> {
    let t_len = rewards.len();
    let g = |t: usize| if dones[t] { 0.0 } else { gamma };
    (0..t_len)
        .map(|s| {
            let mut v = values[s];
            for t in s..(s + n).min(t_len) {
                let mut weight = 1.0;
                for i in s..t {
                    weight *= g(i) * ratios[i].min(c_bar);
                }
                let delta = ratios[t].min(rho_bar) * (rewards[t] + g(t) * values[t + 1] - values[t]);
                v += weight * delta;
            }
            v
        })
        .collect()
}

/// A trajectory of real observations from random play, with random rewards,
/// terminal flags and behavior logits.
pub fn random_trajectory(rng: &mut StreamRng, len: usize, stream: &AgentStream) -> Trajectory {
    let mut env = cbet::gridworld::make_env(EnvKind::Doorkey, rng.gen(), false);
    let mut obs = env.reset(rng.gen());
    let mut transitions = Vec::with_capacity(len);
    for _ in 0..len {
        let action = rng.gen_range(0..Action::COUNT);
        let input = binarize(&obs);
        let features = stream.encode_input(&input);
        let done = rng.gen_bool(0.2);
        transitions.push(Transition {
            observation: obs.clone(),
            input,
            features,
            action,
            behavior_logits: (0..Action::COUNT).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            reward: rng.gen_range(-1.0..1.0),
            done,
            extrinsic_reward: 0.0,
            intrinsic_reward: None,
            reset: false,
        });
        let step = env.step(Action::ALL[action]).unwrap();
        obs = if step.done { env.reset(rng.gen()) } else { step.observation };
    }
    Trajectory {
        transitions,
        bootstrap: Some(binarize(&obs)),
    }
}

/// Stream with every parameter drawn at unit scale so all gradient paths
/// carry signal.
pub fn rough_stream(role: StreamRole, width: usize, rng: &mut StreamRng) -> AgentStream {
    let shape = StreamShape::new(width);
    let params = (0..shape.param_count()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    AgentStream::from_params(role, shape, params).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative error between the analytic gradient and central differences,
/// over the parameters the batch can touch.
pub fn gradient_error(stream: &AgentStream, ctx: &UpdateContext, rng: &mut StreamRng) -> f64 {
    let hyper = TrainHyper {
        entropy_coeff: 0.05,
        ..TrainHyper::default()
    };
    let traj = random_trajectory(rng, 4, stream);
    let steps: Vec<(&SparseInput, usize)> = traj.transitions.iter().map(|t| (&t.input, t.action)).collect();
    let targets: Vec<f64> = (0..steps.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let advantages: Vec<f64> = (0..steps.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (_, analytic) = loss_and_gradient(stream, ctx, &steps, &targets, &advantages, &hyper);

    let shape = stream.shape();
    let mut touched: Vec<usize> = steps
        .iter()
        .flat_map(|(x, _)| x.active().iter().flat_map(|&i| (i as usize * shape.width)..((i as usize + 1) * shape.width)))
        .collect();
    touched.extend(shape.encoder_len()..shape.param_count());
    touched.sort_unstable();
    touched.dedup();

    let h = 1e-6;
    let mut probe = stream.clone();
    let (mut a, mut fd) = (Vec::new(), Vec::new());
    for i in touched {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let (up, _) = loss_and_gradient(&probe, ctx, &steps, &targets, &advantages, &hyper);
        probe.params_mut()[i] = orig - h;
        let (down, _) = loss_and_gradient(&probe, ctx, &steps, &targets, &advantages, &hyper);
        probe.params_mut()[i] = orig;
        a.push(analytic[i]);
        fd.push((up - down) / (2.0 * h));
    }
    let diff: Vec<f64> = a.iter().zip(&fd).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(&a).max(norm(&fd)).max(1e-12)
}
