use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{attack_datasets, load_library, normalize, ClientPool};
use super::io::{fmt_f64, model_digest, write_csv_table, write_file, write_json};
use super::run::{flad_strategy, run_logged, Progress};
use super::stats::MeanStd;
use crate::datagen::load_dataset;
use crate::{derive_seed, seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub repetition: u32,
    pub stage: u32,
    pub clients: Vec<String>,
    pub added: String,
    pub rounds: u32,
    pub mean_f1: f64,
    pub f1_std: f64,
    pub initial_model_sha256: String,
    pub best_model_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub clients: usize,
    pub mean_f1: MeanStd,
    pub f1_std: MeanStd,
    pub rounds: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainSummary {
    pub seed: u64,
    pub repetitions: u32,
    pub dataset_sha256: String,
    pub stages: Vec<StageSummary>,
    pub records: Vec<StageRecord>,
}

/// Sequential retraining: FLAD on the first clients of a random attack order,
/// then one more client per stage, each stage starting from the previous
/// stage's best model. Outputs under `out/retrain/`.
pub fn cmd_retrain(cfg: &ExperimentConfig, out: &Path, progress: Progress) -> Result<RetrainSummary> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let mut raw = if cfg.data.datasets.is_empty() {
        attack_datasets(cfg, &lib.library)?
    } else {
        cfg.data.datasets.iter().map(load_dataset).collect::<Result<Vec<_>>>()?
    };
    if let Some(k) = cfg.retraining.attacks {
        if k > raw.len() {
            return Err(Error::Config(format!(
                "retraining.attacks is {k} but only {} attacks are available",
                raw.len()
            )));
        }
        raw.truncate(k);
    }
    if raw.len() < 3 {
        return Err(Error::Config(format!("retraining needs at least 3 attacks, got {}", raw.len())));
    }
    let first = cfg.retraining.initial_clients;
    if first >= raw.len() {
        return Err(Error::Config(format!(
            "retraining.initial_clients ({first}) must be below the number of attacks ({})",
            raw.len()
        )));
    }
    let pool = ClientPool::new(&normalize(&raw, cfg.data.normalize), &lib.library);
    write_file(&out.join("effective_config.toml"), cfg.to_toml().as_bytes())?;
    let strategy = flad_strategy(cfg);
    let hp = strategy.hyper_params(&cfg.federation);
    let dir = out.join("retrain");
    let mut records = Vec::new();

    for rep in 0..cfg.repetitions {
        let rep_seed = derive_seed!(cfg.seed, "repetition", rep as u64);
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(&mut seed::rng(derive_seed!(cfg.seed, "retrain-order", rep as u64)));
        let mut model = None;
        for size in first..=pool.len() {
            let members = &order[..size];
            let stage_seed = derive_seed!(rep_seed, "stage", size as u64);
            let mut clients = pool.clients(members, &strategy, &cfg.timing, stage_seed)?;
            let path = dir.join(format!("rep{rep:02}")).join(format!("stage{size:02}.jsonl"));
            let outcome = run_logged(cfg, &strategy, &hp, &mut clients, stage_seed, model.take(), &path)?;
            let s = outcome.summary();
            progress(&format!(
                "rep {rep} stage {size}: {} rounds, F1 {:.4} (std {:.4})",
                s.rounds, s.best_mean_f1, s.best_f1_std
            ));
            records.push(StageRecord {
                repetition: rep,
                stage: size as u32,
                clients: members.iter().map(|&i| pool.ids[i].clone()).collect(),
                added: pool.ids[members[size - 1]].clone(),
                rounds: s.rounds,
                mean_f1: s.best_mean_f1,
                f1_std: s.best_f1_std,
                initial_model_sha256: model_digest(&outcome.initial_model),
                best_model_sha256: model_digest(&outcome.best_model),
            });
            model = Some(outcome.best_model);
        }
    }

    let stages = (first..=pool.len())
        .map(|size| {
            let at: Vec<&StageRecord> = records.iter().filter(|r| r.stage as usize == size).collect();
            let col = |f: &dyn Fn(&StageRecord) -> f64| MeanStd::of(&at.iter().map(|r| f(r)).collect::<Vec<_>>());
            StageSummary {
                clients: size,
                mean_f1: col(&|r| r.mean_f1),
                f1_std: col(&|r| r.f1_std),
                rounds: col(&|r| r.rounds as f64),
            }
        })
        .collect();
    let summary = RetrainSummary {
        seed: cfg.seed,
        repetitions: cfg.repetitions,
        dataset_sha256: pool.sha256.clone(),
        stages,
        records,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    let rows: Vec<Vec<String>> = summary
        .records
        .iter()
        .map(|r| {
            vec![
                r.repetition.to_string(),
                r.stage.to_string(),
                r.added.clone(),
                r.rounds.to_string(),
                fmt_f64(r.mean_f1),
                fmt_f64(r.f1_std),
                r.initial_model_sha256.clone(),
                r.best_model_sha256.clone(),
            ]
        })
        .collect();
    write_csv_table(
        &dir.join("stages.csv"),
        &["repetition", "clients", "added", "rounds", "mean_f1", "f1_std", "initial_model_sha256", "best_model_sha256"],
        &rows,
    )?;
    Ok(summary)
}
