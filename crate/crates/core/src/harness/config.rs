//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # tabula-rasa CBET on procedurally generated doorkey maps
//! algorithm = cbet_ac
//! env_kind = doorkey
//! seeds = 1, 2, 3, 4, 5
//! alpha = 0.0025
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key is optional except
//! where an algorithm needs it; unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{TrainHyper, DEFAULT_WIDTH};
use crate::collector::CorrectionConfig;
use crate::error::{Error, Result};
use crate::gridworld::{EnvFamily, EnvKind, EnvSpec};
use crate::novelty::{default_alpha, AgentFamily, DEFAULT_GAMMA_I};
use crate::transfer::{EvalSchedule, LoopConfig, NoveltyConfig, OptimizerKind, TransferMode};

pub const GRID_STEP_BUDGET: u64 = 300_000;
pub const CRAFT_STEP_BUDGET: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BaselineAc,
    CbetAc,
    CbetTransferModelFree,
    CbetTransferWorldModel,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BaselineAc => "baseline_ac",
            Algorithm::CbetAc => "cbet_ac",
            Algorithm::CbetTransferModelFree => "cbet_transfer_model_free",
            Algorithm::CbetTransferWorldModel => "cbet_transfer_world_model",
        }
    }

    pub fn transfer_mode(self) -> Option<TransferMode> {
        match self {
            Algorithm::CbetTransferModelFree => Some(TransferMode::ModelFree),
            Algorithm::CbetTransferWorldModel => Some(TransferMode::WorldModel),
            _ => None,
        }
    }

    pub fn agent_family(self) -> AgentFamily {
        match self {
            Algorithm::CbetTransferWorldModel => AgentFamily::WorldModel,
            _ => AgentFamily::ModelFree,
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline_ac" => Ok(Algorithm::BaselineAc),
            "cbet_ac" => Ok(Algorithm::CbetAc),
            "cbet_transfer_model_free" => Ok(Algorithm::CbetTransferModelFree),
            "cbet_transfer_world_model" => Ok(Algorithm::CbetTransferWorldModel),
            other => Err(Error::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Environment of tabula-rasa runs.
    pub env_kind: EnvKind,
    pub exploration_env: EnvKind,
    pub task_env: EnvKind,
    pub fixed_layout: bool,
    /// `None`: each run uses its seed as layout seed.
    pub layout_seed: Option<u64>,
    pub alpha: f64,
    pub gamma_i: f64,
    pub reset_probability: f64,
    pub seeds: Vec<u64>,
    pub step_budget: u64,
    pub pretrain_steps: u64,
    pub finetune_steps: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub rolling_window: u64,
    pub num_actors: usize,
    pub correction: CorrectionConfig,
    pub hyper: TrainHyper,
    pub optimizer: OptimizerKind,
    pub encoder_width: usize,
    pub combine_scale: f64,
    pub output_dir: PathBuf,
    pub event_log: bool,
    pub log_wall_clock: bool,
}

const KEYS: &[&str] = &[
    "algorithm",
    "env_kind",
    "exploration_env",
    "task_env",
    "fixed_layout",
    "layout_seed",
    "alpha",
    "gamma_i",
    "reset_probability",
    "seeds",
    "step_budget",
    "pretrain_steps",
    "finetune_steps",
    "eval_every",
    "eval_episodes",
    "rolling_window",
    "num_actors",
    "unroll_length",
    "rho_bar",
    "c_bar",
    "learning_rate",
    "gamma",
    "n_step",
    "entropy_coeff",
    "value_coeff",
    "max_grad_norm",
    "optimizer",
    "encoder_width",
    "combine_scale",
    "output_dir",
    "event_log",
    "log_wall_clock",
];

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(format!("line {}: expected `key = value`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::config(format!("line {}: key `{k}` given twice", n + 1)));
        }
    }
    Ok(out)
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| Error::config(format!("bad value `{v}` for `{key}`: {e}")))
        })
        .transpose()
}

impl ExperimentConfig {
    /// Defaults for `algorithm`; the step budget follows the environment.
    pub fn new(algorithm: Algorithm, env_kind: EnvKind) -> Self {
        let step_budget = match env_kind.family() {
            EnvFamily::Minigrid => GRID_STEP_BUDGET,
            EnvFamily::Crafter => CRAFT_STEP_BUDGET,
        };
        let hyper = TrainHyper {
            learning_rate: 0.001,
            n_step: CorrectionConfig::default().unroll_length,
            ..TrainHyper::default()
        };
        ExperimentConfig {
            algorithm,
            env_kind,
            exploration_env: EnvKind::Doorkey,
            task_env: EnvKind::Unlock,
            fixed_layout: false,
            layout_seed: None,
            alpha: default_alpha(algorithm.agent_family(), env_kind.family()),
            gamma_i: DEFAULT_GAMMA_I,
            reset_probability: 1.0 - DEFAULT_GAMMA_I,
            seeds: vec![1, 2, 3, 4, 5],
            step_budget,
            pretrain_steps: step_budget,
            finetune_steps: step_budget,
            eval_every: 10_000,
            eval_episodes: 8,
            rolling_window: 200_000,
            num_actors: 8,
            correction: CorrectionConfig::default(),
            hyper,
            optimizer: OptimizerKind::Rmsprop,
            encoder_width: DEFAULT_WIDTH,
            combine_scale: 1.0,
            output_dir: PathBuf::from("runs"),
            event_log: false,
            log_wall_clock: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_lines(text)?;
        let algorithm = value(&map, "algorithm")?.unwrap_or(Algorithm::CbetAc);
        let env_kind = value(&map, "env_kind")?.unwrap_or(EnvKind::Doorkey);
        let mut c = ExperimentConfig::new(algorithm, env_kind);
        if let Some(k) = value::<EnvKind>(&map, "task_env")? {
            c.task_env = k;
        }
        if let Some(k) = value(&map, "exploration_env")? {
            c.exploration_env = k;
        }
        // alpha and budgets default from whichever environment the run trains in
        let main_env = if algorithm.transfer_mode().is_some() { c.task_env } else { env_kind };
        let fresh = ExperimentConfig::new(algorithm, main_env);
        c.alpha = fresh.alpha;
        c.step_budget = fresh.step_budget;
        c.pretrain_steps = fresh.step_budget;
        c.finetune_steps = fresh.step_budget;

        macro_rules! set {
            ($field:expr, $key:literal) => {
                if let Some(v) = value(&map, $key)? {
                    $field = v;
                }
            };
        }
        set!(c.fixed_layout, "fixed_layout");
        c.layout_seed = value(&map, "layout_seed")?;
        set!(c.alpha, "alpha");
        set!(c.gamma_i, "gamma_i");
        c.reset_probability = 1.0 - c.gamma_i;
        set!(c.reset_probability, "reset_probability");
        if let Some(s) = map.get("seeds") {
            c.seeds = parse_seeds(s)?;
        }
        set!(c.step_budget, "step_budget");
        c.pretrain_steps = c.step_budget;
        c.finetune_steps = c.step_budget;
        set!(c.pretrain_steps, "pretrain_steps");
        set!(c.finetune_steps, "finetune_steps");
        set!(c.eval_every, "eval_every");
        set!(c.eval_episodes, "eval_episodes");
        c.rolling_window = c.rolling_window.min(c.reported_steps());
        set!(c.rolling_window, "rolling_window");
        set!(c.num_actors, "num_actors");
        set!(c.correction.unroll_length, "unroll_length");
        c.hyper.n_step = c.correction.unroll_length;
        set!(c.correction.rho_bar, "rho_bar");
        set!(c.correction.c_bar, "c_bar");
        set!(c.hyper.learning_rate, "learning_rate");
        set!(c.hyper.gamma, "gamma");
        set!(c.hyper.n_step, "n_step");
        set!(c.hyper.entropy_coeff, "entropy_coeff");
        set!(c.hyper.value_coeff, "value_coeff");
        if let Some(v) = map.get("max_grad_norm") {
            c.hyper.max_grad_norm = match v.as_str() {
                "none" => None,
                _ => value(&map, "max_grad_norm")?,
            };
        }
        if let Some(v) = map.get("optimizer") {
            c.optimizer = match v.as_str() {
                "sgd" => OptimizerKind::Sgd,
                "rmsprop" => OptimizerKind::Rmsprop,
                other => return Err(Error::config(format!("unknown optimizer `{other}`"))),
            };
        }
        set!(c.encoder_width, "encoder_width");
        set!(c.combine_scale, "combine_scale");
        set!(c.output_dir, "output_dir");
        set!(c.event_log, "event_log");
        set!(c.log_wall_clock, "log_wall_clock");
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Budget of the phase whose metrics the run reports.
    pub fn reported_steps(&self) -> u64 {
        if self.algorithm.transfer_mode().is_some() {
            self.finetune_steps
        } else {
            self.step_budget
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must not be empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.gamma_i) {
            return Err(Error::config("gamma_i must be in [0, 1)"));
        }
        if !(self.reset_probability >= 0.0 && self.reset_probability <= 1.0 - self.gamma_i + 1e-12) {
            return Err(Error::config("reset_probability must be in [0, 1 - gamma_i]"));
        }
        let steps = self.reported_steps();
        if steps < 1 || (self.algorithm.transfer_mode().is_some() && self.pretrain_steps < 1) {
            return Err(Error::config("step budgets must be > 0"));
        }
        if self.eval_every < 1 || self.eval_every > steps {
            return Err(Error::config("eval_every must be in [1, step budget]"));
        }
        if self.eval_episodes < 1 {
            return Err(Error::config("eval_episodes must be >= 1"));
        }
        if self.rolling_window < 1 || self.rolling_window > steps {
            return Err(Error::config("rolling_window must be in [1, step budget]"));
        }
        if self.encoder_width < 1 {
            return Err(Error::config("encoder_width must be >= 1"));
        }
        if self.combine_scale != 1.0 && self.combine_scale != 0.5 {
            return Err(Error::config("combine_scale must be 1.0 (sum) or 0.5 (average)"));
        }
        if self.algorithm.transfer_mode().is_some()
            && self.exploration_env.family() != self.task_env.family()
        {
            return Err(Error::config(format!(
                "{} and {} observations differ in shape; transfer needs a shared input domain",
                self.exploration_env.name(),
                self.task_env.name()
            )));
        }
        self.loop_config(self.env_kind, self.seeds[0], steps).validate()
    }

    pub fn env_spec(&self, kind: EnvKind, seed: u64) -> EnvSpec {
        EnvSpec::new(kind, self.layout_seed.unwrap_or(seed), self.fixed_layout)
    }

    pub fn loop_config(&self, kind: EnvKind, seed: u64, steps: u64) -> LoopConfig {
        LoopConfig {
            env: self.env_spec(kind, seed),
            seed,
            num_actors: self.num_actors,
            correction: self.correction,
            hyper: self.hyper,
            optimizer: self.optimizer,
            novelty: Some(NoveltyConfig {
                gamma_i: self.gamma_i,
                reset_probability: self.reset_probability,
            }),
            step_budget: steps,
            eval: EvalSchedule {
                every: self.eval_every,
                episodes: self.eval_episodes,
            },
            log_wall_clock: self.log_wall_clock,
        }
    }
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .map_err(|e| Error::config(format!("bad seed `{}`: {e}", x.trim())))
        })
        .collect()
}
