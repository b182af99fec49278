use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use flad_core::harness::{
    cmd_analyze, cmd_generate, cmd_retrain, cmd_scalability, cmd_train, ExperimentConfig,
};

/// Adaptive federated training of a DDoS detector, with FedAvg and FLDDoS
/// baselines.
#[derive(Debug, Parser)]
#[command(name = "flad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one synthetic dataset per attack plus a manifest.
    Generate(Common),
    /// Compare strategies on one federation.
    Train(Common),
    /// Grow the federation one attack at a time, retraining from the last model.
    Retrain(Common),
    /// Sweep the federation size.
    Scalability(Common),
    /// Feature-distribution distances between datasets.
    Analyze(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<flad_core::Error>())
        .map_or(4, |e| e.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (Command::Generate(c)
    | Command::Train(c)
    | Command::Retrain(c)
    | Command::Scalability(c)
    | Command::Analyze(c)) = &cli.command;
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.output_dir = Some(out.clone());
    let quiet = c.quiet;
    let progress = move |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    let out: &Path = &out;
    match &cli.command {
        Command::Generate(_) => {
            let m = cmd_generate(&cfg, out, &progress).context("generate failed")?;
            progress(&format!("wrote {} datasets to {}", m.datasets.len(), out.join("datasets").display()));
        }
        Command::Train(_) => {
            let s = cmd_train(&cfg, out, &progress).context("train failed")?;
            for r in &s.strategies {
                progress(&format!(
                    "{:<18} rounds {:>6.1}  F1 {:.4} +/- {:.4}  budget {:.0}",
                    r.label, r.rounds.mean, r.f1.mean, r.f1.std, r.step_budget.mean
                ));
            }
        }
        Command::Retrain(_) => {
            let s = cmd_retrain(&cfg, out, &progress).context("retrain failed")?;
            for st in &s.stages {
                progress(&format!("{} clients: F1 {:.4}, std {:.4}", st.clients, st.mean_f1.mean, st.f1_std.mean));
            }
        }
        Command::Scalability(_) => {
            cmd_scalability(&cfg, out, &progress).context("scalability sweep failed")?;
        }
        Command::Analyze(_) => {
            cmd_analyze(&cfg, out, &progress).context("analysis failed")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
