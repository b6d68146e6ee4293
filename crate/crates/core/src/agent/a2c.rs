//! n-step advantage actor-critic for the linear-tanh stack, with
//! analytically derived gradients.
//!
//! Loss over a trajectory of length `T`, with value targets `G_t` and
//! advantages `A_t` held constant:
//!
//! ```text
//! L = (1/T) * sum_t [ -A_t * log pi(a_t | x_t)
//!                     + value_coeff * 0.5 * (G_t - V(x_t))^2
//!                     - entropy_coeff * H(pi(. | x_t)) ]
//! ```
//!
//! When the trained stream acts jointly with a frozen prior stream, `pi` is
//! `softmax(scale * (prior_logits + logits))` and only the trained stream's
//! parameters receive gradient.

use serde::{Deserialize, Serialize};

use super::features::SparseInput;
use super::policy::{entropy, log_softmax, softmax};
use super::stream::{AgentStream, FeatureVector};
use crate::error::{Error, Result};
use crate::gridworld::Observation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub gamma: f64,
    pub n_step: usize,
    pub entropy_coeff: f64,
    pub value_coeff: f64,
    /// Global-norm gradient clip; `None` disables clipping.
    pub max_grad_norm: Option<f64>,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            learning_rate: 0.01,
            gamma: 0.99,
            n_step: 5,
            entropy_coeff: 0.01,
            value_coeff: 0.5,
            max_grad_norm: Some(40.0),
        }
    }
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(m.to_string()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must be in (0, 1)");
        }
        if self.n_step < 1 {
            return bad("n_step must be >= 1");
        }
        if !(self.entropy_coeff >= 0.0 && self.value_coeff >= 0.0) {
            return bad("entropy_coeff and value_coeff must be >= 0");
        }
        if self.max_grad_norm.is_some_and(|n| n.is_nan() || n <= 0.0) {
            return bad("max_grad_norm must be > 0");
        }
        Ok(())
    }
}

/// One step of experience.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub input: SparseInput,
    /// Features of the acting stream when the action was chosen.
    pub features: FeatureVector,
    pub action: usize,
    pub behavior_logits: Vec<f64>,
    /// Reward the learner trains on (mixed, intrinsic-only or extrinsic-only).
    pub reward: f64,
    pub done: bool,
    pub extrinsic_reward: f64,
    pub intrinsic_reward: Option<f64>,
    /// The count tables were reset on this step.
    pub reset: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    /// Input following the last transition, for bootstrapping; `None` when
    /// the last transition ended an episode.
    pub bootstrap: Option<SparseInput>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(last) = self.transitions.last() else {
            return Err(Error::usage("empty trajectory"));
        };
        if !last.done && self.bootstrap.is_none() {
            return Err(Error::usage("trajectory cut mid-episode needs a bootstrap input"));
        }
        Ok(())
    }
}

/// How the trained stream's policy is formed.
#[derive(Clone, Copy, Debug)]
pub struct UpdateContext<'a> {
    /// Frozen stream whose logits are added to the trained stream's.
    pub prior: Option<&'a AgentStream>,
    /// Use the prior's encoder for the trained stream's heads as well
    /// (one shared feature map); the trained encoder then gets no gradient.
    pub shared_features: bool,
    /// Multiplier on the summed logits when a prior is present.
    pub combine_scale: f64,
}

impl Default for UpdateContext<'_> {
    fn default() -> Self {
        UpdateContext {
            prior: None,
            shared_features: false,
            combine_scale: 1.0,
        }
    }
}

/// Forward pass of the trained stream in context.
#[derive(Clone, Debug)]
pub struct Forward {
    pub z: FeatureVector,
    /// Logits of the trained stream alone.
    pub own_logits: Vec<f64>,
    /// Logits of the acting policy.
    pub logits: Vec<f64>,
    pub value: f64,
}

impl UpdateContext<'_> {
    pub fn forward(&self, stream: &AgentStream, x: &SparseInput) -> Forward {
        let z = match (self.shared_features, self.prior) {
            (true, Some(p)) => p.encode_input(x),
            _ => stream.encode_input(x),
        };
        let own_logits = stream.policy_logits(&z);
        let value = stream.value(&z);
        let logits = match self.prior {
            None => own_logits.clone(),
            Some(p) => {
                let pz = if self.shared_features { z.clone() } else { p.encode_input(x) };
                p.policy_logits(&pz)
                    .iter()
                    .zip(&own_logits)
                    .map(|(a, b)| self.combine_scale * (a + b))
                    .collect()
            }
        };
        Forward {
            z,
            own_logits,
            logits,
            value,
        }
    }

    fn trains_encoder(&self) -> bool {
        !(self.shared_features && self.prior.is_some())
    }

    fn logit_scale(&self) -> f64 {
        if self.prior.is_some() {
            self.combine_scale
        } else {
            1.0
        }
    }
}

/// On-policy n-step returns. `values[t]` is `V(x_t)`; `bootstrap_value` is
/// `V(x_T)` (ignored when the last step is terminal). The sum for step `t`
/// stops at the first terminal step or after `n` rewards, whichever is first.
pub fn n_step_returns(
    rewards: &[f64],
    dones: &[bool],
    values: &[f64],
    bootstrap_value: f64,
    gamma: f64,
    n: usize,
) -> Vec<f64> {
    let t_len = rewards.len();
    (0..t_len)
        .map(|t| {
            let mut g = 0.0;
            let mut discount = 1.0;
            let end = (t + n).min(t_len);
            for k in t..end {
                g += discount * rewards[k];
                discount *= gamma;
                if dones[k] {
                    return g;
                }
            }
            let tail = if end == t_len { bootstrap_value } else { values[end] };
            g + discount * tail
        })
        .collect()
}

/// Values of every step plus the bootstrap value, under the current parameters.
pub fn trajectory_values(stream: &AgentStream, traj: &Trajectory, ctx: &UpdateContext) -> (Vec<f64>, f64) {
    let values = traj
        .transitions
        .iter()
        .map(|t| ctx.forward(stream, &t.input).value)
        .collect();
    let bootstrap = traj
        .bootstrap
        .as_ref()
        .map_or(0.0, |x| ctx.forward(stream, x).value);
    (values, bootstrap)
}

/// Loss and its gradient with respect to every parameter of `stream`.
pub fn loss_and_gradient(
    stream: &AgentStream,
    ctx: &UpdateContext,
    steps: &[(&SparseInput, usize)],
    value_targets: &[f64],
    advantages: &[f64],
    hyper: &TrainHyper,
) -> (f64, Vec<f64>) {
    let shape = stream.shape();
    let w = shape.width;
    let n_actions = shape.n_actions;
    let mut grad = vec![0.0; shape.param_count()];
    let mut loss = 0.0;
    let inv_t = 1.0 / steps.len() as f64;
    let scale = ctx.logit_scale();
    let train_encoder = ctx.trains_encoder();
    let pw = shape.policy_w_offset();
    let pb = shape.policy_b_offset();
    let vw = shape.value_w_offset();
    let vb = shape.value_b_offset();

    for (((x, action), &target), &adv) in steps.iter().zip(value_targets).zip(advantages) {
        let f = ctx.forward(stream, x);
        let probs = softmax(&f.logits);
        let logp = log_softmax(&f.logits);
        let h = entropy(&probs);
        let err = f.value - target;
        loss += inv_t
            * (-adv * logp[*action] + hyper.value_coeff * 0.5 * err * err - hyper.entropy_coeff * h);

        // dL/d(own logits)
        let dlogits: Vec<f64> = (0..n_actions)
            .map(|k| {
                let onehot = if k == *action { 1.0 } else { 0.0 };
                let pg = -adv * (onehot - probs[k]);
                let ent = hyper.entropy_coeff * probs[k] * (logp[k] + h);
                inv_t * scale * (pg + ent)
            })
            .collect();
        let dvalue = inv_t * hyper.value_coeff * err;

        let z = f.z.values();
        for k in 0..n_actions {
            let row = &mut grad[pw + k * w..pw + (k + 1) * w];
            for (g, zj) in row.iter_mut().zip(z) {
                *g += dlogits[k] * zj;
            }
            grad[pb + k] += dlogits[k];
        }
        for (g, zj) in grad[vw..vb].iter_mut().zip(z) {
            *g += dvalue * zj;
        }
        grad[vb] += dvalue;

        if train_encoder {
            let pweights = stream.policy_weights();
            let vweights = stream.value_weights();
            let dpre: Vec<f64> = (0..w)
                .map(|j| {
                    let dz: f64 = (0..n_actions).map(|k| pweights[k * w + j] * dlogits[k]).sum::<f64>()
                        + vweights[j] * dvalue;
                    dz * (1.0 - z[j] * z[j])
                })
                .collect();
            for &i in x.active() {
                let row = &mut grad[i as usize * w..(i as usize + 1) * w];
                for (g, d) in row.iter_mut().zip(&dpre) {
                    *g += d;
                }
            }
        }
    }
    (loss, grad)
}

/// First-order optimizer applied to a stream's flat parameter vector.
#[derive(Clone, Debug)]
pub enum Optimizer {
    Sgd,
    /// Uncentered RMSProp.
    RmsProp {
        decay: f64,
        epsilon: f64,
        square_avg: Vec<f64>,
    },
}

impl Optimizer {
    pub fn rmsprop(param_count: usize) -> Self {
        Optimizer::RmsProp {
            decay: 0.99,
            epsilon: 1e-5,
            square_avg: vec![0.0; param_count],
        }
    }

    fn apply(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            Optimizer::RmsProp {
                decay,
                epsilon,
                square_avg,
            } => {
                for ((p, g), s) in params.iter_mut().zip(grad).zip(square_avg.iter_mut()) {
                    *s = *decay * *s + (1.0 - *decay) * g * g;
                    *p -= lr * g / (s.sqrt() + *epsilon);
                }
            }
        }
    }
}

fn training_error(stream: &AgentStream, grad: &[f64], loss: f64) -> Error {
    let bad = grad.iter().position(|g| !g.is_finite());
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let shape = stream.shape();
    let dump = format!(
        "loss={loss} first_nonfinite_grad_index={bad:?} shape={shape:?} \
         encoder_norm={:.6e} policy_norm={:.6e} value_norm={:.6e} params_finite={}",
        norm(stream.encoder()),
        norm(stream.policy_weights()),
        norm(stream.value_weights()),
        stream.is_finite()
    );
    Error::Training {
        message: "non-finite gradient".into(),
        dump,
    }
}

/// Applies one gradient step given precomputed targets and advantages.
pub fn apply_update(
    stream: &mut AgentStream,
    traj: &Trajectory,
    value_targets: &[f64],
    advantages: &[f64],
    hyper: &TrainHyper,
    ctx: &UpdateContext,
    optimizer: &mut Optimizer,
) -> Result<f64> {
    traj.validate()?;
    let steps: Vec<(&SparseInput, usize)> =
        traj.transitions.iter().map(|t| (&t.input, t.action)).collect();
    let (loss, mut grad) = loss_and_gradient(stream, ctx, &steps, value_targets, advantages, hyper);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(training_error(stream, &grad, loss));
    }
    if let Some(max) = hyper.max_grad_norm {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > max {
            let k = max / norm;
            grad.iter_mut().for_each(|g| *g *= k);
        }
    }
    if hyper.learning_rate > 0.0 {
        optimizer.apply(stream.params_mut(), &grad, hyper.learning_rate);
    }
    Ok(loss)
}

/// One plain gradient step of n-step advantage actor-critic on `traj`.
pub fn a2c_update(stream: &AgentStream, traj: &Trajectory, hyper: &TrainHyper) -> Result<AgentStream> {
    let mut next = stream.clone();
    a2c_update_in_place(&mut next, traj, hyper, &UpdateContext::default(), &mut Optimizer::Sgd)?;
    Ok(next)
}

/// [`a2c_update`] with an explicit acting context and optimizer.
pub fn a2c_update_in_place(
    stream: &mut AgentStream,
    traj: &Trajectory,
    hyper: &TrainHyper,
    ctx: &UpdateContext,
    optimizer: &mut Optimizer,
) -> Result<f64> {
    traj.validate()?;
    let (values, bootstrap) = trajectory_values(stream, traj, ctx);
    let rewards: Vec<f64> = traj.transitions.iter().map(|t| t.reward).collect();
    let dones: Vec<bool> = traj.transitions.iter().map(|t| t.done).collect();
    let targets = n_step_returns(&rewards, &dones, &values, bootstrap, hyper.gamma, hyper.n_step);
    let advantages: Vec<f64> = targets.iter().zip(&values).map(|(g, v)| g - v).collect();
    apply_update(stream, traj, &targets, &advantages, hyper, ctx, optimizer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_step_returns_cut_at_terminal_and_bootstrap() {
        let r = [1.0, 0.0, 2.0, 0.0];
        let d = [false, true, false, false];
        let v = [10.0, 20.0, 30.0, 40.0];
        let g = n_step_returns(&r, &d, &v, 50.0, 0.5, 2);
        assert_eq!(g[0], 1.0); // terminal at step 1
        assert_eq!(g[1], 0.0);
        assert_eq!(g[2], 2.0 + 0.5 * 0.0 + 0.25 * 50.0);
        assert_eq!(g[3], 0.0 + 0.5 * 50.0);
        let g1 = n_step_returns(&r, &[false; 4], &v, 50.0, 0.5, 1);
        assert_eq!(g1, vec![1.0 + 10.0, 15.0, 2.0 + 20.0, 25.0]);
    }
}
