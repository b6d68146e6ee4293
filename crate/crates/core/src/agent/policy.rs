use rand::Rng;

use crate::gridworld::Observation;

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledAction {
    pub index: usize,
    /// Log-probability of `index` under the sampling distribution.
    pub log_prob: f64,
}

/// Draws an action index from `softmax(logits)` by inverse CDF.
pub fn sample_action<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> SampledAction {
    let probs = softmax(logits);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut index = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            index = i;
            break;
        }
    }
    // a trailing zero-probability action cannot be chosen by rounding
    while probs[index] == 0.0 && index > 0 {
        index -= 1;
    }
    SampledAction {
        index,
        log_prob: log_softmax(logits)[index],
    }
}

/// Anything that maps an observation to action logits.
pub trait Policy {
    fn action_logits(&self, obs: &Observation) -> Vec<f64>;
}

impl Policy for super::AgentStream {
    fn action_logits(&self, obs: &Observation) -> Vec<f64> {
        self.logits_for(obs)
    }
}
