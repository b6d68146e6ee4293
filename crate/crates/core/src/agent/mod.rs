//! Trainable policy/value streams: a fixed binarization followed by a
//! learnable tanh layer (the stand-in world model), a linear softmax policy
//! head and a linear value head, trained by n-step advantage actor-critic.

mod a2c;
pub mod checkpoint;
mod features;
mod policy;
mod stream;

pub use a2c::{
    a2c_update, a2c_update_in_place, apply_update, loss_and_gradient, n_step_returns,
    trajectory_values, Forward, Optimizer, TrainHyper, Trajectory, Transition, UpdateContext,
};
pub use features::{binarize, SparseInput, CELL_CATEGORIES, INPUT_DIM};
pub use policy::{entropy, log_softmax, sample_action, softmax, Policy, SampledAction};
pub use stream::{AgentStream, FeatureVector, StreamRole, StreamShape, DEFAULT_WIDTH};
