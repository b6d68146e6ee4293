use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbet::agent::checkpoint;
use cbet::gridworld::{EnvKind, EnvSpec, Replay};
use cbet::harness::{evaluate, grid_search, run, ExperimentConfig};
use cbet::harness::metrics::{mean, standard_error};
use cbet::{Error, Result};

#[derive(Parser)]
#[command(name = "cbet", version, about = "Count-based exploration and policy transfer in gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabula-rasa training for every configured seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Replace the configured seeds (comma separated or repeated).
        #[arg(long = "seed-override", value_delimiter = ',')]
        seed_override: Vec<u64>,
    },
    /// Pre-train an explorer, then fine-tune a task policy next to it.
    Transfer {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rank intrinsic strengths by final rolling return.
    GridSearch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        alphas: String,
    },
    /// Evaluate a saved stream.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: EnvKind,
        #[arg(long, default_value_t = 8)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run a recorded trace and check it reproduces.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn parse_alphas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|e| Error::usage(format!("bad alpha `{}`: {e}", a.trim())))
        })
        .collect()
}

fn report(out: &cbet::harness::RunOutput) {
    if let Some(last) = out.aggregate.last() {
        println!(
            "step {}: mean eval return {:.4} over {} seeds",
            last.step, last.mean_eval_return, last.n_seeds
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, seed_override } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if !seed_override.is_empty() {
                cfg.seeds = seed_override;
            }
            if cfg.algorithm.transfer_mode().is_some() {
                return Err(Error::usage("transfer algorithms run with the `transfer` command"));
            }
            let out = run(&cfg)?;
            report(&out);
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Transfer { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            if cfg.algorithm.transfer_mode().is_none() {
                return Err(Error::usage(format!(
                    "algorithm {} is not a transfer algorithm",
                    cfg.algorithm.name()
                )));
            }
            let out = run(&cfg)?;
            report(&out);
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::GridSearch { config, alphas } => {
            let cfg = ExperimentConfig::load(&config)?;
            let entries = grid_search(&cfg, &parse_alphas(&alphas)?)?;
            println!("rank  alpha       final_rolling_return");
            for e in &entries {
                println!("{:<5} {:<11} {:.4}", e.rank, e.alpha, e.score);
            }
        }
        Command::Eval {
            checkpoint: path,
            env,
            episodes,
            seed,
        } => {
            let stream = checkpoint::load(&path)?;
            let returns = evaluate(&stream, EnvSpec::new(env, seed, false), episodes, seed);
            println!("returns: {returns:?}");
            let se = standard_error(&returns).map_or("n/a".to_string(), |s| format!("{s:.4}"));
            println!("mean {:.4} se {se}", mean(&returns).unwrap_or(0.0));
        }
        Command::Replay { trace } => {
            let replay = Replay::load(&trace)?;
            let outcome = replay.play()?;
            println!(
                "layout matches: {}, rewards match: {}, done: {}",
                outcome.layout_matches, outcome.rewards_match, outcome.done
            );
            if !(outcome.layout_matches && outcome.rewards_match) {
                return Err(Error::usage("replay diverged from the recorded trace"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
