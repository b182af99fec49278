use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scenario};
use super::data::{attack_tpr, client_datasets, load_library, normalize, ClientPool};
use super::io::{fmt_f64, model_digest, write_csv_table, write_file, write_json};
use super::run::{run_logged, Progress};
use super::stats::MeanStd;
use crate::federation::FederationSummary;
use crate::nn::encode_params;
use crate::{derive_seed, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub repetition: u32,
    pub seed: u64,
    pub summary: FederationSummary,
    pub test_tpr: BTreeMap<String, f64>,
    pub best_model_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub label: String,
    pub strategy: String,
    pub rounds: MeanStd,
    /// Best-round mean validation F1 across clients.
    pub f1: MeanStd,
    /// Best-round standard deviation of client F1.
    pub client_f1_std: MeanStd,
    pub simulated_seconds: MeanStd,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<MeanStd>,
    /// Total MBGD steps, summed over clients and rounds.
    pub step_budget: MeanStd,
    /// Mean test-set detection rate per attack.
    pub test_tpr: BTreeMap<String, f64>,
    pub runs: Vec<StrategyRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: Scenario,
    pub seed: u64,
    pub repetitions: u32,
    pub dataset_sha256: String,
    pub clients: Vec<String>,
    pub strategies: Vec<StrategyResult>,
}

fn aggregate(label: String, strategy: String, runs: Vec<StrategyRun>) -> StrategyResult {
    let col = |f: &dyn Fn(&StrategyRun) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
    let wall: Option<Vec<f64>> = runs.iter().map(|r| r.summary.total_wall_seconds).collect();
    let mut tpr: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &runs {
        for (k, v) in &r.test_tpr {
            tpr.entry(k.clone()).or_default().push(*v);
        }
    }
    StrategyResult {
        label,
        strategy,
        rounds: col(&|r| r.summary.rounds as f64),
        f1: col(&|r| r.summary.best_mean_f1),
        client_f1_std: col(&|r| r.summary.best_f1_std),
        simulated_seconds: col(&|r| r.summary.total_simulated_seconds),
        wall_seconds: wall.map(|w| MeanStd::of(&w)),
        step_budget: col(&|r| r.summary.step_budget as f64),
        test_tpr: tpr.into_iter().map(|(k, v)| (k, MeanStd::of(&v).mean)).collect(),
        runs,
    }
}

/// Comparison of the configured strategies on one federation.
///
/// In the convergence scenario the first FLAD entry runs to its patience
/// stop in every repetition and the other strategies then run for exactly
/// the same number of rounds. Outputs under `out/train/`: one JSONL stream
/// and one best model per repetition and strategy, `summary.json`,
/// `summary.csv` and `tpr.csv`.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path, progress: Progress) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let splits = normalize(&client_datasets(cfg, &lib.library)?, cfg.data.normalize);
    let pool = ClientPool::new(&splits, &lib.library);
    let dir = out.join("train");
    write_file(&out.join("effective_config.toml"), cfg.to_toml().as_bytes())?;
    progress(&format!("{} clients, dataset sha256 {}", pool.len(), &pool.sha256[..12]));

    let mut order: Vec<usize> = (0..cfg.strategy.len()).collect();
    let reference = match cfg.scenario {
        Scenario::SingleRun => None,
        _ => cfg.strategy.iter().position(|s| s.is_flad()),
    };
    if let Some(r) = reference {
        order.retain(|&i| i != r);
        order.insert(0, r);
    }
    let everyone: Vec<usize> = (0..pool.len()).collect();
    let mut runs: Vec<Vec<StrategyRun>> = vec![Vec::new(); cfg.strategy.len()];

    for rep in 0..cfg.repetitions {
        let seed = derive_seed!(cfg.seed, "repetition", rep as u64);
        let rep_dir = dir.join(format!("rep{rep:02}"));
        let mut matched_rounds = None;
        for &si in &order {
            let s = &cfg.strategy[si];
            let label = s.label();
            let mut hp = s.hyper_params(&cfg.federation);
            if let (Some(r), false) = (matched_rounds, Some(si) == reference) {
                hp.max_rounds = Some(r);
                hp.early_stopping = false;
            }
            let mut clients = pool.clients(&everyone, s, &cfg.timing, seed)?;
            let outcome =
                run_logged(cfg, s, &hp, &mut clients, seed, None, &rep_dir.join(format!("{label}.jsonl")))?;
            let summary = outcome.summary();
            if Some(si) == reference {
                matched_rounds = Some(summary.rounds);
            }
            write_file(&rep_dir.join(format!("{label}.flmp")), &encode_params(&outcome.best_model))?;
            progress(&format!(
                "rep {rep} {label}: {} rounds, best F1 {:.4} (std {:.4}) at round {}",
                summary.rounds, summary.best_mean_f1, summary.best_f1_std, summary.best_round
            ));
            runs[si].push(StrategyRun {
                repetition: rep,
                seed,
                test_tpr: attack_tpr(&outcome.best_model, &clients)?,
                best_model_sha256: model_digest(&outcome.best_model),
                summary,
            });
        }
    }

    let strategies: Vec<StrategyResult> = cfg
        .strategy
        .iter()
        .zip(runs)
        .map(|(s, r)| aggregate(s.label(), s.name.to_ascii_lowercase(), r))
        .collect();
    let summary = ExperimentSummary {
        scenario: cfg.scenario,
        seed: cfg.seed,
        repetitions: cfg.repetitions,
        dataset_sha256: pool.sha256.clone(),
        clients: pool.ids.clone(),
        strategies,
    };
    write_outputs(&dir, &summary)?;
    Ok(summary)
}

fn write_outputs(dir: &Path, summary: &ExperimentSummary) -> Result<()> {
    write_json(&dir.join("summary.json"), summary)?;
    let rows: Vec<Vec<String>> = summary
        .strategies
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                fmt_f64(s.rounds.mean),
                fmt_f64(s.rounds.std),
                fmt_f64(s.f1.mean),
                fmt_f64(s.f1.std),
                fmt_f64(s.client_f1_std.mean),
                fmt_f64(s.simulated_seconds.mean),
                fmt_f64(s.simulated_seconds.std),
                fmt_f64(s.step_budget.mean),
            ]
        })
        .collect();
    write_csv_table(
        &dir.join("summary.csv"),
        &[
            "strategy",
            "rounds_mean",
            "rounds_std",
            "f1_mean",
            "f1_std",
            "client_f1_std_mean",
            "simulated_seconds_mean",
            "simulated_seconds_std",
            "step_budget_mean",
        ],
        &rows,
    )?;
    let mut attacks: Vec<&String> = summary.strategies.iter().flat_map(|s| s.test_tpr.keys()).collect();
    attacks.sort();
    attacks.dedup();
    let mut header = vec!["attack"];
    header.extend(summary.strategies.iter().map(|s| s.label.as_str()));
    let rows: Vec<Vec<String>> = attacks
        .iter()
        .map(|a| {
            let mut row = vec![a.to_string()];
            row.extend(
                summary
                    .strategies
                    .iter()
                    .map(|s| s.test_tpr.get(*a).map(|v| fmt_f64(*v)).unwrap_or_default()),
            );
            row
        })
        .collect();
    write_csv_table(&dir.join("tpr.csv"), &header, &rows)
}
