use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{binarize, SparseInput, INPUT_DIM};
use crate::gridworld::{Action, Observation};
use crate::rng::StreamRng;

pub const DEFAULT_WIDTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRole {
    Intrinsic,
    Extrinsic,
}

impl StreamRole {
    pub fn code(self) -> u8 {
        match self {
            StreamRole::Intrinsic => 0,
            StreamRole::Extrinsic => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(StreamRole::Intrinsic),
            1 => Some(StreamRole::Extrinsic),
            _ => None,
        }
    }
}

/// Encoder output `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shape of an [`AgentStream`]'s parameter block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamShape {
    pub input_dim: usize,
    pub width: usize,
    pub n_actions: usize,
}

impl StreamShape {
    pub fn new(width: usize) -> Self {
        StreamShape {
            input_dim: INPUT_DIM,
            width,
            n_actions: Action::COUNT,
        }
    }

    pub fn encoder_len(&self) -> usize {
        self.input_dim * self.width
    }

    pub fn policy_w_offset(&self) -> usize {
        self.encoder_len()
    }

    pub fn policy_b_offset(&self) -> usize {
        self.policy_w_offset() + self.n_actions * self.width
    }

    pub fn value_w_offset(&self) -> usize {
        self.policy_b_offset() + self.n_actions
    }

    pub fn value_b_offset(&self) -> usize {
        self.value_w_offset() + self.width
    }

    pub fn param_count(&self) -> usize {
        self.value_b_offset() + 1
    }
}

/// One encoder + policy head + value head.
///
/// Parameters live in a single flat vector laid out as
/// `[encoder | policy weights | policy bias | value weights | value bias]`.
/// The encoder is stored input-major (`input_dim` rows of `width`) so a
/// sparse input sums a handful of contiguous rows; the policy weights are
/// `n_actions` rows of `width`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentStream {
    role: StreamRole,
    shape: StreamShape,
    params: Vec<f64>,
}

impl AgentStream {
    /// All-zero parameters.
    pub fn zeros(role: StreamRole, shape: StreamShape) -> Self {
        AgentStream {
            role,
            shape,
            params: vec![0.0; shape.param_count()],
        }
    }

    /// Random encoder scaled so a typical binarized input gives unit-variance
    /// pre-activations; small heads.
    pub fn init(role: StreamRole, shape: StreamShape, rng: &mut StreamRng) -> Self {
        let mut s = Self::zeros(role, shape);
        // ~57 active units per observation
        let enc = (3.0f64 / 57.0).sqrt();
        let head = 0.01;
        let (pw, pb) = (shape.policy_w_offset(), shape.policy_b_offset());
        let (vw, vb) = (shape.value_w_offset(), shape.value_b_offset());
        for p in &mut s.params[..pw] {
            *p = rng.gen_range(-enc..enc);
        }
        for p in &mut s.params[pw..pb] {
            *p = rng.gen_range(-head..head);
        }
        for p in &mut s.params[vw..vb] {
            *p = rng.gen_range(-head..head);
        }
        s
    }

    pub fn from_params(role: StreamRole, shape: StreamShape, params: Vec<f64>) -> Option<Self> {
        (params.len() == shape.param_count()).then_some(AgentStream {
            role,
            shape,
            params,
        })
    }

    pub fn role(&self) -> StreamRole {
        self.role
    }

    pub fn with_role(mut self, role: StreamRole) -> Self {
        self.role = role;
        self
    }

    pub fn shape(&self) -> StreamShape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn n_actions(&self) -> usize {
        self.shape.n_actions
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn encoder(&self) -> &[f64] {
        &self.params[..self.shape.encoder_len()]
    }

    pub fn encoder_mut(&mut self) -> &mut [f64] {
        let n = self.shape.encoder_len();
        &mut self.params[..n]
    }

    pub fn policy_weights(&self) -> &[f64] {
        &self.params[self.shape.policy_w_offset()..self.shape.policy_b_offset()]
    }

    pub fn policy_bias(&self) -> &[f64] {
        &self.params[self.shape.policy_b_offset()..self.shape.value_w_offset()]
    }

    /// Policy weights and bias as one mutable block.
    pub fn policy_mut(&mut self) -> &mut [f64] {
        let (a, b) = (self.shape.policy_w_offset(), self.shape.value_w_offset());
        &mut self.params[a..b]
    }

    pub fn value_weights(&self) -> &[f64] {
        &self.params[self.shape.value_w_offset()..self.shape.value_b_offset()]
    }

    pub fn value_bias(&self) -> f64 {
        self.params[self.shape.value_b_offset()]
    }

    pub fn encode_input(&self, x: &SparseInput) -> FeatureVector {
        let w = self.shape.width;
        let enc = self.encoder();
        let mut pre = vec![0.0; w];
        for &i in x.active() {
            let row = &enc[i as usize * w..(i as usize + 1) * w];
            for (p, r) in pre.iter_mut().zip(row) {
                *p += r;
            }
        }
        FeatureVector(pre.into_iter().map(f64::tanh).collect())
    }

    pub fn encode(&self, obs: &Observation) -> FeatureVector {
        self.encode_input(&binarize(obs))
    }

    pub fn policy_logits(&self, z: &FeatureVector) -> Vec<f64> {
        let w = self.shape.width;
        self.policy_weights()
            .chunks_exact(w)
            .zip(self.policy_bias())
            .map(|(row, b)| dot(row, z.values()) + b)
            .collect()
    }

    pub fn value(&self, z: &FeatureVector) -> f64 {
        dot(self.value_weights(), z.values()) + self.value_bias()
    }

    /// Logits for an observation under this stream's own encoder.
    pub fn logits_for(&self, obs: &Observation) -> Vec<f64> {
        self.policy_logits(&self.encode(obs))
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{make_env, EnvKind};
    use crate::rng::{stream, Stream};

    #[test]
    fn zero_encoder_gives_zero_features() {
        let s = AgentStream::zeros(StreamRole::Extrinsic, StreamShape::new(16));
        let obs = make_env(EnvKind::Doorkey, 1, true).reset(0);
        assert!(s.encode(&obs).values().iter().all(|&v| v == 0.0));
        assert!(s.logits_for(&obs).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn doubling_policy_params_doubles_logits() {
        let mut s = AgentStream::init(StreamRole::Extrinsic, StreamShape::new(8), &mut stream(1, Stream::AgentInit, 0));
        let obs = make_env(EnvKind::Unlock, 2, true).reset(0);
        let z = s.encode(&obs);
        let before = s.policy_logits(&z);
        s.policy_mut().iter_mut().for_each(|p| *p *= 2.0);
        let after = s.policy_logits(&z);
        for (a, b) in before.iter().zip(&after) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn layout_offsets_partition_params() {
        let shape = StreamShape::new(5);
        assert_eq!(shape.param_count(), INPUT_DIM * 5 + Action::COUNT * 5 + Action::COUNT + 5 + 1);
    }
}
