use rand::RngCore;

use crate::agent::{sample_action, Policy};
use crate::gridworld::{Action, EnvSpec, Environment, Observation};
use crate::rng::{stream, Stream, StreamRng};

/// Runs `n_episodes` episodes with actions sampled from `policy` and returns
/// each episode's extrinsic return. Nothing is trained and no counts are
/// touched; all randomness comes from the evaluation stream of `seed`.
pub fn evaluate(policy: &dyn Policy, spec: EnvSpec, n_episodes: usize, seed: u64) -> Vec<f64> {
    evaluate_indexed(policy, spec, n_episodes, seed, 0)
}

/// [`evaluate`] on evaluation stream `index`, so that successive scheduled
/// evaluations of one run see different episodes.
pub fn evaluate_indexed(
    policy: &dyn Policy,
    spec: EnvSpec,
    n_episodes: usize,
    seed: u64,
    index: u64,
) -> Vec<f64> {
    let mut rng = stream(seed, Stream::Evaluation, index);
    evaluate_with(spec, n_episodes, &mut rng, |_, obs, rng| {
        Action::from_index(sample_action(&policy.action_logits(obs), rng).index)
            .expect("policy emits one logit per action")
    })
}

/// Episode loop with an arbitrary controller. The controller sees the live
/// environment so scripted solvers can plan against it.
pub fn evaluate_with<F>(spec: EnvSpec, n_episodes: usize, rng: &mut StreamRng, mut act: F) -> Vec<f64>
where
    F: FnMut(&Environment, &Observation, &mut StreamRng) -> Action,
{
    let mut env = spec.build();
    (0..n_episodes)
        .map(|_| {
            let mut obs = env.reset(rng.next_u64());
            let mut ret = 0.0;
            loop {
                let a = act(&env, &obs, rng);
                let step = env.step(a).expect("episode is live");
                ret += step.extrinsic_reward;
                if step.done {
                    break ret;
                }
                obs = step.observation;
            }
        })
        .collect()
}
