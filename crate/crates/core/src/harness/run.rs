use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Algorithm, ExperimentConfig};
use super::events::{EventSink, JsonlSink, NullSink};
use super::metrics::{aggregate, rolling_average, standard_error, write_aggregate_csv, write_seed_csv, AggregateRow, MetricsRow};
use crate::agent::{checkpoint, StreamRole};
use crate::error::{Error, Result};
use crate::novelty::RewardMix;
use crate::transfer::{finetune_task, fresh_stream, pretrain_explorer, train_tabula_rasa, TransferMode};

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileRecord {
    fn of(root: &Path, path: &Path) -> Result<Self> {
        Ok(FileRecord {
            path: path.strip_prefix(root).unwrap_or(path).to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub env: String,
    pub steps: u64,
    pub checkpoint: FileRecord,
    pub metrics: FileRecord,
    pub events: Option<FileRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    /// Present for transfer runs.
    pub pretrain: Option<PhaseRecord>,
    /// The phase whose metrics are reported: tabula-rasa training or fine-tuning.
    pub train: PhaseRecord,
    /// Hash of the intrinsic checkpoint re-read after fine-tuning.
    pub intrinsic_sha256_after: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub algorithm: Algorithm,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedRecord>,
    pub aggregate: FileRecord,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub per_seed: Vec<(u64, Vec<MetricsRow>)>,
    pub aggregate: Vec<AggregateRow>,
    pub manifest: Manifest,
}

pub fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed_{seed}"))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn sink_for(cfg: &ExperimentConfig, path: &Path) -> Result<Box<dyn EventSink>> {
    Ok(if cfg.event_log {
        Box::new(JsonlSink::create(path)?)
    } else {
        Box::new(NullSink)
    })
}

fn phase_record(
    root: &Path,
    dir: &Path,
    prefix: &str,
    env: &str,
    steps: u64,
    seed: u64,
    rows: &[MetricsRow],
    event_log: bool,
) -> Result<PhaseRecord> {
    let metrics = dir.join(format!("{prefix}metrics.csv"));
    write_seed_csv(&metrics, seed, rows)?;
    let events = dir.join(format!("{prefix}events.jsonl"));
    Ok(PhaseRecord {
        env: env.to_string(),
        steps,
        checkpoint: FileRecord::of(root, &dir.join(format!("{prefix}agent.ckpt")))?,
        metrics: FileRecord::of(root, &metrics)?,
        events: event_log.then(|| FileRecord::of(root, &events)).transpose()?,
    })
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<(SeedRecord, Vec<MetricsRow>)> {
    let root = cfg.output_dir.as_path();
    let dir = seed_dir(root, seed);
    create_dir(&dir)?;
    match cfg.algorithm.transfer_mode() {
        None => {
            let lc = cfg.loop_config(cfg.env_kind, seed, cfg.step_budget);
            let mix = match cfg.algorithm {
                Algorithm::CbetAc => Some(RewardMix::new(cfg.alpha)?),
                _ => None,
            };
            let mut sink = sink_for(cfg, &dir.join("events.jsonl"))?;
            let stream = fresh_stream(StreamRole::Extrinsic, cfg.encoder_width, seed);
            let out = train_tabula_rasa(&lc, stream, mix, sink.as_mut())?;
            checkpoint::save(out.learner.trained(), &dir.join("agent.ckpt"))?;
            let train = phase_record(root, &dir, "", cfg.env_kind.name(), cfg.step_budget, seed, &out.rows, cfg.event_log)?;
            Ok((
                SeedRecord {
                    seed,
                    pretrain: None,
                    train,
                    intrinsic_sha256_after: None,
                },
                out.rows,
            ))
        }
        Some(mode) => run_transfer_seed(cfg, seed, mode, root, &dir),
    }
}

fn run_transfer_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    mode: TransferMode,
    root: &Path,
    dir: &Path,
) -> Result<(SeedRecord, Vec<MetricsRow>)> {
    let pre_cfg = cfg.loop_config(cfg.exploration_env, seed, cfg.pretrain_steps);
    let mut sink = sink_for(cfg, &dir.join("pretrain_events.jsonl"))?;
    let explorer = fresh_stream(StreamRole::Intrinsic, cfg.encoder_width, seed);
    let pre = pretrain_explorer(&pre_cfg, explorer, sink.as_mut())?;
    drop(sink);
    let intrinsic_path = dir.join("pretrain_agent.ckpt");
    checkpoint::save(pre.learner.trained(), &intrinsic_path)?;
    let pretrain = phase_record(
        root,
        dir,
        "pretrain_",
        cfg.exploration_env.name(),
        cfg.pretrain_steps,
        seed,
        &pre.rows,
        cfg.event_log,
    )?;

    // fine-tuning starts from the file, exactly as a separate process would
    let intrinsic = checkpoint::load(&intrinsic_path)?;
    let fine_cfg = cfg.loop_config(cfg.task_env, seed, cfg.finetune_steps);
    let extrinsic = fresh_stream(StreamRole::Extrinsic, cfg.encoder_width, seed);
    let mut sink = sink_for(cfg, &dir.join("events.jsonl"))?;
    let fine = finetune_task(&fine_cfg, intrinsic, extrinsic, mode, cfg.combine_scale, sink.as_mut())?;
    drop(sink);
    checkpoint::save(fine.learner.trained(), &dir.join("agent.ckpt"))?;
    let after = sha256_file(&intrinsic_path)?;
    if after != pretrain.checkpoint.sha256 {
        return Err(Error::Checkpoint(format!(
            "intrinsic checkpoint {} changed during fine-tuning",
            intrinsic_path.display()
        )));
    }
    let train = phase_record(root, dir, "", cfg.task_env.name(), cfg.finetune_steps, seed, &fine.rows, cfg.event_log)?;
    Ok((
        SeedRecord {
            seed,
            pretrain: Some(pretrain),
            train,
            intrinsic_sha256_after: Some(after),
        },
        fine.rows,
    ))
}

/// Runs every seed of `cfg` (concurrently), then writes the across-seed
/// aggregate CSV and the manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    create_dir(&cfg.output_dir)?;
    let results: Vec<(SeedRecord, Vec<MetricsRow>)> = cfg
        .seeds
        .par_iter()
        .map(|&s| run_seed(cfg, s))
        .collect::<Result<_>>()?;
    let runs: Vec<Vec<MetricsRow>> = results.iter().map(|r| r.1.clone()).collect();
    let agg = aggregate(&runs)?;
    let agg_path = cfg.output_dir.join(AGGREGATE_FILE);
    write_aggregate_csv(&agg_path, &agg)?;
    let manifest = Manifest {
        algorithm: cfg.algorithm,
        config: cfg.clone(),
        seeds: results.iter().map(|r| r.0.clone()).collect(),
        aggregate: FileRecord::of(&cfg.output_dir, &agg_path)?,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    let mpath = cfg.output_dir.join(MANIFEST_FILE);
    fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))?;
    Ok(RunOutput {
        per_seed: cfg.seeds.iter().copied().zip(runs).collect(),
        aggregate: agg,
        manifest,
    })
}

/// Final value of the rolling average of one run's evaluation returns.
pub fn final_rolling_return(rows: &[MetricsRow], window: u64) -> f64 {
    let series: Vec<(u64, f64)> = rows.iter().map(|r| (r.global_step, r.mean_eval_return)).collect();
    rolling_average(&series, window).last().map_or(0.0, |p| p.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub rank: usize,
    pub alpha: f64,
    /// Mean over seeds of the final rolling-average evaluation return.
    pub score: f64,
    pub se: Option<f64>,
    pub per_seed: Vec<f64>,
}

pub const GRID_TABLE_FILE: &str = "grid_search.csv";

/// Trains `cbet_ac` once per seed for every candidate alpha and ranks the
/// candidates by final rolling return, ties going to the smaller alpha.
/// Each candidate's files land in `<output_dir>/alpha_<value>`.
pub fn grid_search(base: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<GridEntry>> {
    if alphas.is_empty() {
        return Err(Error::config("grid search needs at least one alpha"));
    }
    if base.algorithm.transfer_mode().is_some() {
        return Err(Error::config("alpha only applies to tabula-rasa runs"));
    }
    let mut entries = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = ExperimentConfig {
            algorithm: Algorithm::CbetAc,
            alpha,
            output_dir: base.output_dir.join(format!("alpha_{alpha}")),
            ..base.clone()
        };
        let out = run(&cfg)?;
        let per_seed: Vec<f64> = out
            .per_seed
            .iter()
            .map(|(_, rows)| final_rolling_return(rows, cfg.rolling_window))
            .collect();
        entries.push(GridEntry {
            rank: 0,
            alpha,
            score: per_seed.iter().sum::<f64>() / per_seed.len() as f64,
            se: standard_error(&per_seed),
            per_seed,
        });
    }
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.alpha.total_cmp(&b.alpha)));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    write_grid_table(&base.output_dir.join(GRID_TABLE_FILE), base, &entries)?;
    Ok(entries)
}

fn write_grid_table(path: &Path, base: &ExperimentConfig, entries: &[GridEntry]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "agent", "environment", "alpha", "final_rolling_return", "se", "n_seeds"])?;
    let agent = match base.algorithm.agent_family() {
        crate::novelty::AgentFamily::ModelFree => "model_free",
        crate::novelty::AgentFamily::WorldModel => "world_model",
    };
    for e in entries {
        w.write_record([
            e.rank.to_string(),
            agent.to_string(),
            base.env_kind.name().to_string(),
            e.alpha.to_string(),
            e.score.to_string(),
            e.se.map(|s| s.to_string()).unwrap_or_default(),
            e.per_seed.len().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
