//! Training protocols and the policy combiner used for transfer.

mod combine;
mod train;

pub use combine::{combine_logits, CombinedPolicy, TransferMode};
pub use train::{
    finetune_task, fresh_stream, pretrain_explorer, run_loop, train_tabula_rasa, EvalSchedule,
    Learner, LoopConfig, LoopOutput, NoveltyConfig, OptimizerKind,
};
