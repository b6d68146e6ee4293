use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEED_COLUMNS: [&str; 7] = [
    "step",
    "seed",
    "mean_eval_return",
    "se_eval_return",
    "mean_intrinsic",
    "episodes",
    "wall_seconds",
];

/// One evaluation point of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub global_step: u64,
    pub mean_eval_return: f64,
    pub episode_returns: Vec<f64>,
    /// Standard error over the evaluation episodes.
    pub se_eval_return: Option<f64>,
    /// Mean intrinsic reward over training steps since the previous row.
    pub mean_intrinsic_reward: f64,
    /// Training episodes completed so far.
    pub episodes_completed: u64,
    pub wall_seconds: f64,
}

impl MetricsRow {
    pub fn from_returns(
        global_step: u64,
        episode_returns: Vec<f64>,
        mean_intrinsic_reward: f64,
        episodes_completed: u64,
        wall_seconds: f64,
    ) -> Self {
        MetricsRow {
            global_step,
            mean_eval_return: mean(&episode_returns).unwrap_or(0.0),
            se_eval_return: standard_error(&episode_returns),
            episode_returns,
            mean_intrinsic_reward,
            episodes_completed,
            wall_seconds,
        }
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator) over `sqrt(n)`; `None`
/// for fewer than two values.
pub fn standard_error(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let m = mean(values)?;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    Some(var.sqrt() / (n as f64).sqrt())
}

/// For every input point, the mean of values whose step lies in
/// `(step - window, step]`. Input must be sorted by step.
pub fn rolling_average(series: &[(u64, f64)], window_steps: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(series.len());
    let mut lo = 0;
    for (hi, &(step, _)) in series.iter().enumerate() {
        while series[lo].0 + window_steps <= step {
            lo += 1;
        }
        // summed fresh each time so results don't carry running-sum rounding
        let sum: f64 = series[lo..=hi].iter().map(|p| p.1).sum();
        out.push((step, sum / (hi + 1 - lo) as f64));
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_seed_csv(path: &Path, seed: u64, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SEED_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.global_step.to_string(),
            seed.to_string(),
            r.mean_eval_return.to_string(),
            fmt_opt(r.se_eval_return),
            r.mean_intrinsic_reward.to_string(),
            r.episodes_completed.to_string(),
            r.wall_seconds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A row of a per-seed or aggregate CSV as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub step: u64,
    pub seed: String,
    pub mean_eval_return: f64,
    pub se_eval_return: Option<f64>,
    pub mean_intrinsic: f64,
    pub episodes: f64,
    pub wall_seconds: f64,
    pub n_seeds: Option<usize>,
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::config(format!("bad number `{s}` in {}: {e}", path.display())))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        rows.push(CsvRow {
            step: parse(field(0))? as u64,
            seed: field(1).to_string(),
            mean_eval_return: parse(field(2))?,
            se_eval_return: match field(3) {
                "" => None,
                s => Some(parse(s)?),
            },
            mean_intrinsic: parse(field(4))?,
            episodes: parse(field(5))?,
            wall_seconds: parse(field(6))?,
            n_seeds: match field(7) {
                "" => None,
                s => Some(parse(s)? as usize),
            },
        });
    }
    Ok(rows)
}

/// Row of the across-seed aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub step: u64,
    pub mean_eval_return: f64,
    pub se_eval_return: Option<f64>,
    pub mean_intrinsic: f64,
    pub episodes: f64,
    pub wall_seconds: f64,
    pub n_seeds: usize,
}

/// Mean and standard error across seeds at each evaluation step. All runs
/// must share one schedule.
pub fn aggregate(runs: &[Vec<MetricsRow>]) -> Result<Vec<AggregateRow>> {
    let Some(first) = runs.first() else {
        return Ok(Vec::new());
    };
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(Error::usage("runs have different evaluation schedules"));
    }
    (0..first.len())
        .map(|i| {
            let step = first[i].global_step;
            if runs.iter().any(|r| r[i].global_step != step) {
                return Err(Error::usage("runs have different evaluation steps"));
            }
            let col = |f: &dyn Fn(&MetricsRow) -> f64| -> Vec<f64> { runs.iter().map(|r| f(&r[i])).collect() };
            let returns = col(&|r| r.mean_eval_return);
            Ok(AggregateRow {
                step,
                mean_eval_return: mean(&returns).unwrap_or(0.0),
                se_eval_return: standard_error(&returns),
                mean_intrinsic: mean(&col(&|r| r.mean_intrinsic_reward)).unwrap_or(0.0),
                episodes: mean(&col(&|r| r.episodes_completed as f64)).unwrap_or(0.0),
                wall_seconds: mean(&col(&|r| r.wall_seconds)).unwrap_or(0.0),
                n_seeds: runs.len(),
            })
        })
        .collect()
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = SEED_COLUMNS.to_vec();
    header.push("n_seeds");
    w.write_record(&header)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            "all".to_string(),
            r.mean_eval_return.to_string(),
            fmt_opt(r.se_eval_return),
            r.mean_intrinsic.to_string(),
            r.episodes.to_string(),
            r.wall_seconds.to_string(),
            r.n_seeds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
