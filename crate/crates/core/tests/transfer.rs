use proptest::prelude::*;

use cbet::agent::{checkpoint, softmax, StreamRole};
use cbet::gridworld::{EnvKind, EnvSpec};
use cbet::harness::{LogEvent, NullSink, Phase};
use cbet::novelty::RewardMix;
use cbet::transfer::{
    combine_logits, finetune_task, fresh_stream, pretrain_explorer, train_tabula_rasa, EvalSchedule, LoopConfig,
    TransferMode,
};

fn small(kind: EnvKind, seed: u64, budget: u64) -> LoopConfig {
    LoopConfig {
        num_actors: 4,
        eval: EvalSchedule { every: 500, episodes: 2 },
        ..LoopConfig::new(EnvSpec::new(kind, seed, false), seed, budget)
    }
}

#[test]
fn combiner_example() {
    let p = combine_logits(&[2.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
    let e = std::f64::consts::E;
    // oracle: softmax of (2, 1) written out by hand
    let want = [e * e / (e * e + e), e / (e * e + e)];
    assert!((p[0] - 0.7311).abs() < 1e-4 && (p[1] - 0.2689).abs() < 1e-4);
    for (a, b) in p.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    let avg = combine_logits(&[2.0, 0.0], &[0.0, 1.0], 0.5).unwrap();
    assert!((avg[0] - 1.0 / (1.0 + (-0.5f64).exp())).abs() < 1e-12);
}

#[test]
fn zero_alpha_reproduces_the_baseline() {
    let cfg = small(EnvKind::Unlock, 4, 2000);
    let init = fresh_stream(StreamRole::Extrinsic, 16, 4);
    let base = train_tabula_rasa(&cfg, init.clone(), None, &mut NullSink).unwrap();
    let zero = train_tabula_rasa(&cfg, init, Some(RewardMix::new(0.0).unwrap()), &mut NullSink).unwrap();
    assert_eq!(base.rows, zero.rows);
    assert_eq!(base.learner.trained(), zero.learner.trained());
    let boosted = train_tabula_rasa(
        &cfg,
        fresh_stream(StreamRole::Extrinsic, 16, 4),
        Some(RewardMix::new(0.5).unwrap()),
        &mut NullSink,
    )
    .unwrap();
    assert_ne!(base.learner.trained(), boosted.learner.trained());
}

#[test]
fn schedule_rows_and_update_count() {
    let cfg = small(EnvKind::Doorkey, 1, 2000);
    let out = train_tabula_rasa(&cfg, fresh_stream(StreamRole::Extrinsic, 8, 1), None, &mut NullSink).unwrap();
    let steps: Vec<u64> = out.rows.iter().map(|r| r.global_step).collect();
    assert_eq!(steps, vec![0, 500, 1000, 1500, 2000]);
    assert!(out.rows.iter().all(|r| r.episode_returns.len() == 2));
    // 500 steps per period over 4 actors unrolling up to 20: 6 full batches + 1 of 5 steps
    assert_eq!(out.updates, 4 * 7 * 4);
    let uneven = small(EnvKind::Doorkey, 1, 1234);
    let out = train_tabula_rasa(&uneven, fresh_stream(StreamRole::Extrinsic, 8, 1), None, &mut NullSink).unwrap();
    let steps: Vec<u64> = out.rows.iter().map(|r| r.global_step).collect();
    assert_eq!(steps, vec![0, 500, 1000]);
}

fn step_events(events: &[LogEvent]) -> Vec<(Phase, f64, Option<f64>, f64)> {
    events
        .iter()
        .filter_map(|e| match e {
            LogEvent::Step { phase, r_e, r_i, r_t, .. } => Some((*phase, *r_e, *r_i, *r_t)),
            _ => None,
        })
        .collect()
}

#[test]
fn mixed_reward_audit() {
    let cfg = small(EnvKind::Unlock, 2, 1000);
    let mut log: Vec<LogEvent> = Vec::new();
    let alpha = 0.3;
    train_tabula_rasa(&cfg, fresh_stream(StreamRole::Extrinsic, 8, 2), Some(RewardMix::new(alpha).unwrap()), &mut log)
        .unwrap();
    let steps = step_events(&log);
    assert_eq!(steps.len(), 1000);
    for (phase, r_e, r_i, r_t) in steps {
        assert_eq!(phase, Phase::TabulaRasa);
        assert_eq!(r_t, r_e + alpha * r_i.unwrap());
    }
}

#[test]
fn pipeline_keeps_phases_pure_and_explorer_frozen() {
    let pre_cfg = small(EnvKind::Doorkey, 6, 1500);
    let mut pre_log: Vec<LogEvent> = Vec::new();
    let pre = pretrain_explorer(&pre_cfg, fresh_stream(StreamRole::Intrinsic, 8, 6), &mut pre_log).unwrap();
    for (phase, _, r_i, r_t) in step_events(&pre_log) {
        assert_eq!(phase, Phase::Pretrain);
        assert_eq!(Some(r_t), r_i);
    }
    let explorer = pre.learner.trained().clone();
    let before = checkpoint::to_bytes(&explorer);

    for mode in [TransferMode::ModelFree, TransferMode::WorldModel] {
        let ft_cfg = small(EnvKind::Unlock, 6, 1500);
        let mut ft_log: Vec<LogEvent> = Vec::new();
        let ft = finetune_task(&ft_cfg, explorer.clone(), fresh_stream(StreamRole::Extrinsic, 8, 6), mode, 1.0, &mut ft_log)
            .unwrap();
        let steps = step_events(&ft_log);
        assert_eq!(steps.len(), 1500);
        for (phase, r_e, r_i, r_t) in steps {
            assert_eq!(phase, Phase::Finetune);
            assert_eq!((r_i, r_t), (None, r_e));
        }
        assert!(ft.stores.is_empty());
        let cbet::transfer::Learner::Combined(c) = &ft.learner else {
            panic!("fine-tuning trains a combined policy");
        };
        assert_eq!(checkpoint::to_bytes(c.intrinsic()), before, "{mode:?}");
        assert_ne!(c.extrinsic(), &fresh_stream(StreamRole::Extrinsic, 8, 6));
    }
}

#[test]
fn mismatched_model_free_widths_are_rejected() {
    let err = finetune_task(
        &small(EnvKind::Unlock, 0, 100),
        fresh_stream(StreamRole::Intrinsic, 8, 0),
        fresh_stream(StreamRole::Extrinsic, 16, 0),
        TransferMode::ModelFree,
        1.0,
        &mut NullSink,
    );
    assert!(err.is_err());
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn shared_argmax_dominates(
        fi in prop::collection::vec(-5.0f64..5.0, 7),
        fe in prop::collection::vec(-5.0f64..5.0, 7),
        k in 0usize..7,
        margin in 0.01f64..3.0,
        average in any::<bool>(),
    ) {
        let (mut fi, mut fe) = (fi, fe);
        // make k the strict argmax of both
        let top_i = fi.iter().cloned().fold(f64::MIN, f64::max);
        let top_e = fe.iter().cloned().fold(f64::MIN, f64::max);
        fi[k] = top_i + margin;
        fe[k] = top_e + margin;
        let p = combine_logits(&fi, &fe, if average { 0.5 } else { 1.0 }).unwrap();
        prop_assert_eq!(argmax(&p), k);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_intrinsic_logits_give_extrinsic_policy(fe in prop::collection::vec(-20.0f64..20.0, 1..9)) {
        let p = combine_logits(&vec![0.0; fe.len()], &fe, 1.0).unwrap();
        for (a, b) in p.iter().zip(softmax(&fe)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
