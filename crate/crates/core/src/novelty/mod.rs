//! Count-based novelty: hashed state and change keys, pseudocount tables
//! with stochastic resets, and intrinsic/extrinsic reward mixing.

mod counts;
mod keys;
mod mix;

pub use counts::{CountSnapshot, CountStore, DEFAULT_GAMMA_I};
pub use keys::{canonical_bytes, compute_change, hash_observation, Change, ChangeKey, StateKey};
pub use mix::{default_alpha, mix, AgentFamily, RewardMix};
