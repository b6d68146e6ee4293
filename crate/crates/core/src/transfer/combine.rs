use serde::{Deserialize, Serialize};

use crate::agent::{binarize, softmax, AgentStream, Policy, UpdateContext};
use crate::error::{Error, Result};
use crate::gridworld::Observation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    /// Both policy heads read one shared feature map (the frozen stream's).
    ModelFree,
    /// Each stream encodes the observation with its own encoder.
    WorldModel,
}

/// Frozen exploration stream plus trainable task stream acting as
/// `softmax(scale * (f_i + f_e))`. `combine_scale` is 1 for the sum of
/// logits and 0.5 for their average.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedPolicy {
    intrinsic: AgentStream,
    extrinsic: AgentStream,
    mode: TransferMode,
    combine_scale: f64,
}

impl CombinedPolicy {
    pub fn new(
        intrinsic: AgentStream,
        extrinsic: AgentStream,
        mode: TransferMode,
        combine_scale: f64,
    ) -> Result<Self> {
        let (si, se) = (intrinsic.shape(), extrinsic.shape());
        if si.n_actions != se.n_actions {
            return Err(Error::config(format!(
                "action-set size mismatch: intrinsic {} vs extrinsic {}",
                si.n_actions, se.n_actions
            )));
        }
        if si.input_dim != se.input_dim {
            return Err(Error::config("streams disagree on observation input size"));
        }
        if mode == TransferMode::ModelFree && si.width != se.width {
            return Err(Error::config(
                "model-free combination shares one feature map; stream widths must match",
            ));
        }
        if !(combine_scale > 0.0 && combine_scale.is_finite()) {
            return Err(Error::config("combine_scale must be positive"));
        }
        Ok(CombinedPolicy {
            intrinsic,
            extrinsic,
            mode,
            combine_scale,
        })
    }

    pub fn intrinsic(&self) -> &AgentStream {
        &self.intrinsic
    }

    pub fn extrinsic(&self) -> &AgentStream {
        &self.extrinsic
    }

    pub fn extrinsic_mut(&mut self) -> &mut AgentStream {
        &mut self.extrinsic
    }

    pub fn mode(&self) -> TransferMode {
        self.mode
    }

    pub fn combine_scale(&self) -> f64 {
        self.combine_scale
    }

    /// Context in which the extrinsic stream acts and is trained.
    pub fn context(&self) -> UpdateContext<'_> {
        UpdateContext {
            prior: Some(&self.intrinsic),
            shared_features: self.mode == TransferMode::ModelFree,
            combine_scale: self.combine_scale,
        }
    }

    /// The acting context together with the trainable stream.
    pub fn split_mut(&mut self) -> (UpdateContext<'_>, &mut AgentStream) {
        let ctx = UpdateContext {
            prior: Some(&self.intrinsic),
            shared_features: self.mode == TransferMode::ModelFree,
            combine_scale: self.combine_scale,
        };
        (ctx, &mut self.extrinsic)
    }

    pub fn logits(&self, obs: &Observation) -> Vec<f64> {
        self.context().forward(&self.extrinsic, &binarize(obs)).logits
    }

    /// Action distribution of the task policy.
    pub fn combine(&self, obs: &Observation) -> Vec<f64> {
        softmax(&self.logits(obs))
    }

    pub fn into_parts(self) -> (AgentStream, AgentStream) {
        (self.intrinsic, self.extrinsic)
    }
}

impl Policy for CombinedPolicy {
    fn action_logits(&self, obs: &Observation) -> Vec<f64> {
        self.logits(obs)
    }
}

/// Softmax of the scaled elementwise sum of two logit vectors.
pub fn combine_logits(intrinsic: &[f64], extrinsic: &[f64], scale: f64) -> Result<Vec<f64>> {
    if intrinsic.len() != extrinsic.len() {
        return Err(Error::config(format!(
            "action-set size mismatch: {} vs {}",
            intrinsic.len(),
            extrinsic.len()
        )));
    }
    let sum: Vec<f64> = intrinsic.iter().zip(extrinsic).map(|(a, b)| scale * (a + b)).collect();
    Ok(softmax(&sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{StreamRole, StreamShape};
    use crate::gridworld::{make_env, EnvKind};
    use crate::rng::{stream, Stream};

    fn streams(width: usize) -> (AgentStream, AgentStream) {
        let mut rng = stream(11, Stream::AgentInit, 0);
        (
            AgentStream::init(StreamRole::Intrinsic, StreamShape::new(width), &mut rng),
            AgentStream::init(StreamRole::Extrinsic, StreamShape::new(width), &mut rng),
        )
    }

    #[test]
    fn two_action_example() {
        let p = combine_logits(&[2.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e * e / (e * e + e)).abs() < 1e-15);
        assert!((p[0] - 0.731_058_578_6).abs() < 1e-9);
    }

    #[test]
    fn zero_intrinsic_head_reduces_to_extrinsic() {
        let (mut i, e) = streams(8);
        i.policy_mut().iter_mut().for_each(|p| *p = 0.0);
        let obs = make_env(EnvKind::Unlock, 5, true).reset(0);
        for mode in [TransferMode::ModelFree, TransferMode::WorldModel] {
            let c = CombinedPolicy::new(i.clone(), e.clone(), mode, 1.0).unwrap();
            let expected = match mode {
                // heads read the intrinsic encoder's features in model-free mode
                TransferMode::ModelFree => softmax(&e.policy_logits(&i.encode(&obs))),
                TransferMode::WorldModel => softmax(&e.logits_for(&obs)),
            };
            assert_eq!(c.combine(&obs), expected);
        }
    }

    #[test]
    fn mismatched_action_sets_are_rejected() {
        let (i, _) = streams(4);
        let mut shape = StreamShape::new(4);
        shape.n_actions = 3;
        let e = AgentStream::zeros(StreamRole::Extrinsic, shape);
        assert!(matches!(
            CombinedPolicy::new(i, e, TransferMode::WorldModel, 1.0),
            Err(Error::Config(_))
        ));
        assert!(combine_logits(&[0.0; 3], &[0.0; 4], 1.0).is_err());
    }

    #[test]
    fn modes_agree_when_encoders_are_shared() {
        let (i, mut e) = streams(8);
        e.encoder_mut().copy_from_slice(i.encoder());
        let mf = CombinedPolicy::new(i.clone(), e.clone(), TransferMode::ModelFree, 1.0).unwrap();
        let wm = CombinedPolicy::new(i, e, TransferMode::WorldModel, 1.0).unwrap();
        let mut env = make_env(EnvKind::Doorkey, 2, false);
        let mut obs = env.reset(0);
        for k in 0..100u64 {
            assert_eq!(mf.combine(&obs), wm.combine(&obs));
            let r = env.step(crate::gridworld::Action::ALL[(k % 3) as usize]).unwrap();
            obs = if r.done { env.reset(k) } else { r.observation };
        }
    }
}
