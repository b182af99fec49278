use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{attack_datasets, load_library, normalize, ClientPool};
use super::io::{fmt_f64, write_csv_table, write_file, write_json};
use super::run::{flad_strategy, run_logged, Progress};
use super::stats::MeanStd;
use crate::datagen::{assemble_clients, federation_capacity};
use crate::{derive_seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityRow {
    pub clients: usize,
    pub repetitions: u32,
    pub f1: MeanStd,
    pub client_f1_std: MeanStd,
    pub rounds: MeanStd,
    /// Simulated seconds up to the stop, patience rounds included.
    pub convergence_seconds: MeanStd,
}

/// FLAD on federations of increasing size built from single attacks and
/// attack pairs. Outputs `out/scalability/scalability.csv` plus the round
/// reports of every run.
pub fn cmd_scalability(cfg: &ExperimentConfig, out: &Path, progress: Progress) -> Result<Vec<ScalabilityRow>> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let attacks = lib.library.attack.len();
    let per_client = cfg.scalability.attacks_per_client;
    let cap = federation_capacity(attacks, per_client);
    if let Some(&size) = cfg.scalability.sizes.iter().find(|&&s| s > cap) {
        return Err(Error::Capacity(if per_client == 2 {
            format!(
                "federation size {size} exceeds the {cap} distinct local datasets ({attacks} singles + {} pairs)",
                cap - attacks
            )
        } else {
            format!("federation size {size} exceeds the {cap} available attacks")
        }));
    }
    let per_attack = attack_datasets(cfg, &lib.library)?;
    write_file(&out.join("effective_config.toml"), cfg.to_toml().as_bytes())?;
    let strategy = flad_strategy(cfg);
    let hp = strategy.hyper_params(&cfg.federation);
    let dir = out.join("scalability");
    let mut rows = Vec::new();

    for &size in &cfg.scalability.sizes {
        let (mut f1, mut spread, mut rounds, mut secs) = (vec![], vec![], vec![], vec![]);
        for rep in 0..cfg.repetitions {
            let seed = derive_seed!(cfg.seed, "scalability", size as u64, rep as u64);
            let splits = assemble_clients(&per_attack, size, per_client, seed)?;
            let pool = ClientPool::new(&normalize(&splits, cfg.data.normalize), &lib.library);
            let all: Vec<usize> = (0..pool.len()).collect();
            let mut clients = pool.clients(&all, &strategy, &cfg.timing, seed)?;
            let path = dir.join(format!("size{size:03}")).join(format!("rep{rep:02}.jsonl"));
            let s = run_logged(cfg, &strategy, &hp, &mut clients, seed, None, &path)?.summary();
            progress(&format!("{size} clients rep {rep}: {} rounds, F1 {:.4}", s.rounds, s.best_mean_f1));
            f1.push(s.best_mean_f1);
            spread.push(s.best_f1_std);
            rounds.push(s.rounds as f64);
            secs.push(s.total_simulated_seconds);
        }
        rows.push(ScalabilityRow {
            clients: size,
            repetitions: cfg.repetitions,
            f1: MeanStd::of(&f1),
            client_f1_std: MeanStd::of(&spread),
            rounds: MeanStd::of(&rounds),
            convergence_seconds: MeanStd::of(&secs),
        });
    }

    write_json(&dir.join("summary.json"), &rows)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.clients.to_string(),
                r.repetitions.to_string(),
                fmt_f64(r.f1.mean),
                fmt_f64(r.f1.std),
                fmt_f64(r.client_f1_std.mean),
                fmt_f64(r.rounds.mean),
                fmt_f64(r.rounds.std),
                fmt_f64(r.convergence_seconds.mean),
                fmt_f64(r.convergence_seconds.std),
            ]
        })
        .collect();
    write_csv_table(
        &dir.join("scalability.csv"),
        &[
            "clients",
            "repetitions",
            "f1_mean",
            "f1_std",
            "client_f1_std_mean",
            "rounds_mean",
            "rounds_std",
            "convergence_seconds_mean",
            "convergence_seconds_std",
        ],
        &table,
    )?;
    Ok(rows)
}
