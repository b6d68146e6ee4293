//! Synchronous multi-actor rollout collection and truncated importance-weight
//! value targets.
//!
//! Every actor owns its environment, count store and random streams, and all
//! actors advance in lockstep under one read-only policy snapshot. The
//! learner consumes whole batches; parameters never change mid-unroll.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{
    binarize, log_softmax, sample_action, AgentStream, Trajectory, Transition, UpdateContext,
};
use crate::error::{Error, Result};
use crate::gridworld::{Action, Environment, Observation};
use crate::novelty::{compute_change, hash_observation, CountStore, RewardMix};
use crate::rng::{stream, Stream, StreamRng};
use rand::RngCore;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    /// Clip for the importance ratios weighting the temporal differences.
    pub rho_bar: f64,
    /// Clip for the trace coefficients.
    pub c_bar: f64,
    pub unroll_length: usize,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            rho_bar: 1.0,
            c_bar: 1.0,
            unroll_length: 20,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_bar >= 1.0 && self.c_bar >= 1.0) {
            return Err(Error::config("rho_bar and c_bar must be >= 1"));
        }
        if self.c_bar > self.rho_bar {
            return Err(Error::config("c_bar must not exceed rho_bar"));
        }
        if self.unroll_length < 1 {
            return Err(Error::config("unroll_length must be >= 1"));
        }
        Ok(())
    }
}

/// Which reward the learner trains on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardRule {
    Extrinsic,
    Mixed(RewardMix),
    Intrinsic,
}

impl RewardRule {
    fn needs_novelty(&self) -> bool {
        !matches!(self, RewardRule::Extrinsic)
    }

    fn apply(&self, r_e: f64, r_i: Option<f64>) -> f64 {
        match (self, r_i) {
            (RewardRule::Extrinsic, _) => r_e,
            (RewardRule::Mixed(m), Some(ri)) => m.mix(r_e, ri),
            (RewardRule::Intrinsic, Some(ri)) => ri,
            _ => unreachable!("novelty presence checked at collect time"),
        }
    }
}

/// Read-only policy shared by all actors for one batch.
#[derive(Clone, Copy, Debug)]
pub struct PolicySnapshot<'a> {
    pub version: u64,
    pub stream: &'a AgentStream,
    pub ctx: UpdateContext<'a>,
}

/// One actor: an environment, optional count store, and its random streams.
#[derive(Clone, Debug)]
pub struct ActorSlot {
    index: usize,
    env: Environment,
    novelty: Option<CountStore>,
    action_rng: StreamRng,
    episode_rng: StreamRng,
    obs: Observation,
    snapshot_version: u64,
    episode_return: f64,
    completed_returns: Vec<f64>,
    intrinsic_sum: f64,
    intrinsic_steps: u64,
}

impl ActorSlot {
    /// Actor `index` of experiment `seed`; resets `env` from the actor's
    /// episode-seed stream.
    pub fn new(index: usize, seed: u64, mut env: Environment, novelty: Option<CountStore>) -> Self {
        let mut episode_rng = stream(seed, Stream::Environment, index as u64);
        let obs = env.reset(episode_rng.next_u64());
        ActorSlot {
            index,
            env,
            novelty,
            action_rng: stream(seed, Stream::Action, index as u64),
            episode_rng,
            obs,
            snapshot_version: 0,
            episode_return: 0.0,
            completed_returns: Vec::new(),
            intrinsic_sum: 0.0,
            intrinsic_steps: 0,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn snapshot_version(&self) -> u64 {
        self.snapshot_version
    }

    pub fn novelty(&self) -> Option<&CountStore> {
        self.novelty.as_ref()
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// Extrinsic returns of episodes finished since the last call.
    pub fn drain_returns(&mut self) -> Vec<f64> {
        std::mem::take(&mut self.completed_returns)
    }

    /// Sum and count of intrinsic rewards since the last call.
    pub fn drain_intrinsic(&mut self) -> (f64, u64) {
        let out = (self.intrinsic_sum, self.intrinsic_steps);
        self.intrinsic_sum = 0.0;
        self.intrinsic_steps = 0;
        out
    }

    fn unroll(&mut self, snapshot: &PolicySnapshot, len: usize, rule: RewardRule) -> Result<Trajectory> {
        if rule.needs_novelty() && self.novelty.is_none() {
            return Err(Error::config("reward rule needs a count store but the actor has none"));
        }
        self.snapshot_version = snapshot.version;
        let mut transitions = Vec::with_capacity(len);
        for _ in 0..len {
            let input = binarize(&self.obs);
            let fwd = snapshot.ctx.forward(snapshot.stream, &input);
            let sampled = sample_action(&fwd.logits, &mut self.action_rng);
            let action = Action::from_index(sampled.index).expect("logit count equals action count");
            let step = self.env.step(action)?;
            let (r_i, reset) = match self.novelty.as_mut() {
                Some(store) => {
                    let s = hash_observation(&step.observation);
                    let c = compute_change(&self.obs, &step.observation)?;
                    let r = store.observe_and_reward(s, c);
                    (Some(r), store.maybe_reset())
                }
                None => (None, false),
            };
            if let Some(r) = r_i {
                self.intrinsic_sum += r;
                self.intrinsic_steps += 1;
            }
            let reward = rule.apply(step.extrinsic_reward, r_i);
            self.episode_return += step.extrinsic_reward;
            let prev = std::mem::replace(&mut self.obs, step.observation);
            transitions.push(Transition {
                observation: prev,
                input,
                features: fwd.z,
                action: sampled.index,
                behavior_logits: fwd.logits,
                reward,
                done: step.done,
                extrinsic_reward: step.extrinsic_reward,
                intrinsic_reward: r_i,
                reset,
            });
            if step.done {
                self.completed_returns.push(self.episode_return);
                self.episode_return = 0.0;
                self.obs = self.env.reset(self.episode_rng.next_u64());
            }
        }
        let bootstrap = match transitions.last() {
            Some(t) if t.done => None,
            _ => Some(binarize(&self.obs)),
        };
        Ok(Trajectory {
            transitions,
            bootstrap,
        })
    }
}

/// Advances every actor `unroll_length` steps under `snapshot`. The batch is
/// ordered by actor; an actor failure aborts the batch.
pub fn collect(
    actors: &mut [ActorSlot],
    snapshot: &PolicySnapshot,
    unroll_length: usize,
    rule: RewardRule,
) -> Result<Vec<Trajectory>> {
    actors
        .par_iter_mut()
        .map(|a| {
            a.unroll(snapshot, unroll_length, rule).map_err(|e| Error::Actor {
                actor: a.index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Corrected value targets `v_s` and policy-gradient advantages.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectedTargets {
    pub values: Vec<f64>,
    pub advantages: Vec<f64>,
    /// Clipped importance ratios `min(rho_bar, pi/mu)`.
    pub rhos: Vec<f64>,
    /// Clipped trace coefficients `min(c_bar, pi/mu)`.
    pub cs: Vec<f64>,
}

/// Importance ratios `pi_current(a_t|x_t) / pi_behavior(a_t|x_t)` and the
/// current values, bootstrap included as the last element.
fn ratios_and_values(
    traj: &Trajectory,
    stream: &AgentStream,
    ctx: &UpdateContext,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ratios = Vec::with_capacity(traj.len());
    let mut values = Vec::with_capacity(traj.len() + 1);
    for (t, tr) in traj.transitions.iter().enumerate() {
        let f = ctx.forward(stream, &tr.input);
        let log_pi = log_softmax(&f.logits)[tr.action];
        let log_mu = log_softmax(&tr.behavior_logits)[tr.action];
        let ratio = (log_pi - log_mu).exp();
        if !ratio.is_finite() {
            return Err(Error::Training {
                message: format!("non-finite importance ratio at step {t}"),
                dump: format!("log_pi={log_pi} log_mu={log_mu} action={}", tr.action),
            });
        }
        ratios.push(ratio);
        values.push(f.value);
    }
    values.push(traj.bootstrap.as_ref().map_or(0.0, |x| ctx.forward(stream, x).value));
    Ok((ratios, values))
}

/// Truncated importance-weighted n-step targets:
///
/// ```text
/// v_s = V(x_s) + sum_{t=s}^{s+n-1} (prod_{i=s}^{t-1} g_i c_i) * rho_t * (r_t + g_t V(x_{t+1}) - V(x_t))
/// ```
///
/// with `g_t = gamma * (1 - done_t)`, the sum clipped at the unroll end, and
/// advantages `rho_s * (r_s + g_s v_{s+1} - V(x_s))`. `n_step = None` uses
/// the whole remaining unroll. With matching policies and both clips at
/// least 1 the targets are the on-policy n-step returns.
pub fn offpolicy_targets(
    traj: &Trajectory,
    stream: &AgentStream,
    ctx: &UpdateContext,
    cfg: &CorrectionConfig,
    gamma: f64,
    n_step: Option<usize>,
) -> Result<CorrectedTargets> {
    traj.validate()?;
    let (ratios, values) = ratios_and_values(traj, stream, ctx)?;
    let t_len = traj.len();
    let n = n_step.unwrap_or(t_len).max(1);
    let rhos: Vec<f64> = ratios.iter().map(|r| r.min(cfg.rho_bar)).collect();
    let cs: Vec<f64> = ratios.iter().map(|r| r.min(cfg.c_bar)).collect();
    let discounts: Vec<f64> = traj
        .transitions
        .iter()
        .map(|t| if t.done { 0.0 } else { gamma })
        .collect();
    let deltas: Vec<f64> = (0..t_len)
        .map(|t| rhos[t] * (traj.transitions[t].reward + discounts[t] * values[t + 1] - values[t]))
        .collect();

    let mut targets = Vec::with_capacity(t_len);
    for s in 0..t_len {
        let end = (s + n).min(t_len);
        let mut acc = 0.0;
        for t in (s..end).rev() {
            acc = deltas[t] + discounts[t] * cs[t] * acc;
        }
        targets.push(values[s] + acc);
    }
    let advantages = (0..t_len)
        .map(|s| {
            let next = if s + 1 < t_len { targets[s + 1] } else { values[t_len] };
            rhos[s] * (traj.transitions[s].reward + discounts[s] * next - values[s])
        })
        .collect();
    Ok(CorrectedTargets {
        values: targets,
        advantages,
        rhos,
        cs,
    })
}
