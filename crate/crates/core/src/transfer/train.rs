//! The training protocols: tabula-rasa training on mixed rewards,
//! intrinsic-only pre-training of an exploration stream, and fine-tuning a
//! task stream next to the frozen exploration stream.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::combine::{CombinedPolicy, TransferMode};
use crate::agent::{
    apply_update, AgentStream, Optimizer, Policy, StreamRole, StreamShape, TrainHyper,
    UpdateContext,
};
use crate::collector::{collect, offpolicy_targets, ActorSlot, CorrectionConfig, PolicySnapshot, RewardRule};
use crate::error::{Error, Result};
use crate::gridworld::{EnvSpec, Observation};
use crate::harness::eval::evaluate_indexed;
use crate::harness::events::{EventSink, LogEvent, Phase};
use crate::harness::metrics::MetricsRow;
use crate::novelty::{CountStore, RewardMix, DEFAULT_GAMMA_I};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyConfig {
    pub gamma_i: f64,
    pub reset_probability: f64,
}

impl Default for NoveltyConfig {
    fn default() -> Self {
        NoveltyConfig {
            gamma_i: DEFAULT_GAMMA_I,
            reset_probability: 1.0 - DEFAULT_GAMMA_I,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSchedule {
    pub every: u64,
    pub episodes: usize,
}

impl Default for EvalSchedule {
    fn default() -> Self {
        EvalSchedule {
            every: 10_000,
            episodes: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Rmsprop,
}

impl OptimizerKind {
    pub fn build(self, param_count: usize) -> Optimizer {
        match self {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Rmsprop => Optimizer::rmsprop(param_count),
        }
    }
}

/// Everything one training loop needs besides the learner itself.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopConfig {
    pub env: EnvSpec,
    pub seed: u64,
    pub num_actors: usize,
    pub correction: CorrectionConfig,
    pub hyper: TrainHyper,
    pub optimizer: OptimizerKind,
    pub novelty: Option<NoveltyConfig>,
    pub step_budget: u64,
    pub eval: EvalSchedule,
    pub log_wall_clock: bool,
}

impl LoopConfig {
    pub fn new(env: EnvSpec, seed: u64, step_budget: u64) -> Self {
        LoopConfig {
            env,
            seed,
            num_actors: 8,
            correction: CorrectionConfig::default(),
            hyper: TrainHyper::default(),
            optimizer: OptimizerKind::Rmsprop,
            novelty: Some(NoveltyConfig::default()),
            step_budget,
            eval: EvalSchedule::default(),
            log_wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.correction.validate()?;
        self.hyper.validate()?;
        if self.num_actors < 1 {
            return Err(Error::config("num_actors must be >= 1"));
        }
        if self.step_budget < 1 {
            return Err(Error::config("step budget must be > 0"));
        }
        if self.eval.every < 1 {
            return Err(Error::config("eval_every must be >= 1"));
        }
        Ok(())
    }
}

/// The trainable agent of a loop.
#[derive(Clone, Debug, PartialEq)]
pub enum Learner {
    Single(AgentStream),
    Combined(CombinedPolicy),
}

impl Learner {
    fn snapshot_parts(&self) -> (&AgentStream, UpdateContext<'_>) {
        match self {
            Learner::Single(s) => (s, UpdateContext::default()),
            Learner::Combined(c) => (c.extrinsic(), c.context()),
        }
    }

    fn split_mut(&mut self) -> (UpdateContext<'_>, &mut AgentStream) {
        match self {
            Learner::Single(s) => (UpdateContext::default(), s),
            Learner::Combined(c) => c.split_mut(),
        }
    }

    /// The stream whose parameters the loop updates.
    pub fn trained(&self) -> &AgentStream {
        self.snapshot_parts().0
    }
}

impl Policy for Learner {
    fn action_logits(&self, obs: &Observation) -> Vec<f64> {
        match self {
            Learner::Single(s) => s.action_logits(obs),
            Learner::Combined(c) => c.action_logits(obs),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoopOutput {
    pub rows: Vec<MetricsRow>,
    pub learner: Learner,
    /// Final count stores, one per actor (empty when counting was off).
    pub stores: Vec<CountStore>,
    pub updates: u64,
}

/// Runs `cfg.step_budget` environment steps across all actors, updating
/// the learner after every batch and evaluating at step 0 and at every
/// multiple of `cfg.eval.every`.
pub fn run_loop(
    cfg: &LoopConfig,
    phase: Phase,
    rule: RewardRule,
    mut learner: Learner,
    sink: &mut dyn EventSink,
) -> Result<LoopOutput> {
    cfg.validate()?;
    let novelty = match (rule, cfg.novelty) {
        (RewardRule::Extrinsic, n) => n,
        (_, Some(n)) => Some(n),
        (_, None) => return Err(Error::config("this reward rule needs novelty counting")),
    };
    let mut actors = (0..cfg.num_actors)
        .map(|i| {
            let store = novelty
                .map(|n| {
                    CountStore::new(n.gamma_i, n.reset_probability, stream(cfg.seed, Stream::CountReset, i as u64))
                })
                .transpose()?;
            Ok(ActorSlot::new(i, cfg.seed, cfg.env.build(), store))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut optimizer = cfg.optimizer.build(learner.trained().params().len());
    let start = Instant::now();
    let wall = |start: &Instant| if cfg.log_wall_clock { start.elapsed().as_secs_f64() } else { 0.0 };

    let mut rows = Vec::new();
    let mut eval_index = 0u64;
    let mut evaluate = |learner: &Learner, step: u64, intrinsic: (f64, u64), episodes: u64, sink: &mut dyn EventSink| {
        let returns = evaluate_indexed(learner, cfg.env, cfg.eval.episodes, cfg.seed, eval_index);
        eval_index += 1;
        sink.record(&LogEvent::Eval {
            phase,
            step,
            returns: returns.clone(),
        })?;
        let mean_i = if intrinsic.1 > 0 { intrinsic.0 / intrinsic.1 as f64 } else { 0.0 };
        rows.push(MetricsRow::from_returns(step, returns, mean_i, episodes, wall(&start)));
        Ok::<_, Error>(())
    };
    evaluate(&learner, 0, (0.0, 0), 0, sink)?;

    let mut global = 0u64;
    let mut version = 0u64;
    let mut updates = 0u64;
    let mut episodes = 0u64;
    let mut intrinsic = (0.0, 0u64);
    let mut next_eval = cfg.eval.every.min(cfg.step_budget);
    while global < cfg.step_budget {
        let remaining = next_eval - global;
        let n_act = cfg.num_actors as u64;
        let (active, len) = if remaining >= n_act {
            (cfg.num_actors, (remaining / n_act).min(cfg.correction.unroll_length as u64) as usize)
        } else {
            (remaining as usize, 1)
        };
        let batch = {
            let (stream, ctx) = learner.snapshot_parts();
            let snap = PolicySnapshot { version, stream, ctx };
            collect(&mut actors[..active], &snap, len, rule)?
        };

        if sink.wants_steps() {
            for t in 0..len {
                for (a, traj) in batch.iter().enumerate() {
                    let tr = &traj.transitions[t];
                    sink.record(&LogEvent::Step {
                        phase,
                        step: global + (t * active + a) as u64 + 1,
                        actor: a,
                        action: tr.action,
                        r_e: tr.extrinsic_reward,
                        r_i: tr.intrinsic_reward,
                        r_t: tr.reward,
                        reset: tr.reset,
                        done: tr.done,
                    })?;
                }
            }
        }
        for actor in &mut actors[..active] {
            episodes += actor.drain_returns().len() as u64;
            let (s, n) = actor.drain_intrinsic();
            intrinsic.0 += s;
            intrinsic.1 += n;
        }

        for traj in &batch {
            let (ctx, stream) = learner.split_mut();
            let targets = offpolicy_targets(traj, stream, &ctx, &cfg.correction, cfg.hyper.gamma, Some(cfg.hyper.n_step))?;
            apply_update(stream, traj, &targets.values, &targets.advantages, &cfg.hyper, &ctx, &mut optimizer)?;
            updates += 1;
        }
        version += 1;
        global += (active * len) as u64;

        if global == next_eval {
            // a budget that is not a multiple of the cadence ends without a row
            if global.is_multiple_of(cfg.eval.every) {
                evaluate(&learner, global, intrinsic, episodes, sink)?;
                intrinsic = (0.0, 0);
            }
            next_eval = (next_eval + cfg.eval.every).min(cfg.step_budget);
        }
    }
    sink.flush()?;
    Ok(LoopOutput {
        rows,
        learner,
        stores: actors.iter().filter_map(|a| a.novelty().cloned()).collect(),
        updates,
    })
}

/// A fresh stream initialized from the agent-init stream of `seed`.
pub fn fresh_stream(role: StreamRole, width: usize, seed: u64) -> AgentStream {
    let index = match role {
        StreamRole::Intrinsic => 0,
        StreamRole::Extrinsic => 1,
    };
    AgentStream::init(role, StreamShape::new(width), &mut stream(seed, Stream::AgentInit, index))
}

/// Trains one stream from scratch on `r_e + alpha * r_i`, or on `r_e` alone
/// when `mix` is `None` (the baseline). Counts still run in the baseline so
/// the mean intrinsic reward is logged for both.
pub fn train_tabula_rasa(
    cfg: &LoopConfig,
    stream: AgentStream,
    mix: Option<RewardMix>,
    sink: &mut dyn EventSink,
) -> Result<LoopOutput> {
    let rule = match mix {
        Some(m) => RewardRule::Mixed(m),
        None => RewardRule::Extrinsic,
    };
    run_loop(cfg, Phase::TabulaRasa, rule, Learner::Single(stream), sink)
}

/// Trains an exploration stream on intrinsic reward alone.
pub fn pretrain_explorer(cfg: &LoopConfig, stream: AgentStream, sink: &mut dyn EventSink) -> Result<LoopOutput> {
    run_loop(cfg, Phase::Pretrain, RewardRule::Intrinsic, Learner::Single(stream), sink)
}

/// Trains `extrinsic` on task reward while acting with the combination of
/// it and the frozen `intrinsic` stream. No counting happens.
pub fn finetune_task(
    cfg: &LoopConfig,
    intrinsic: AgentStream,
    extrinsic: AgentStream,
    mode: TransferMode,
    combine_scale: f64,
    sink: &mut dyn EventSink,
) -> Result<LoopOutput> {
    let combined = CombinedPolicy::new(intrinsic, extrinsic, mode, combine_scale)?;
    let cfg = LoopConfig {
        novelty: None,
        ..cfg.clone()
    };
    run_loop(&cfg, Phase::Finetune, RewardRule::Extrinsic, Learner::Combined(combined), sink)
}
