use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::client::{evaluate_client, simulated_round_time, ClientState};
use super::schedule::{accuracy_std, mean_accuracy, FlHyperParams, TrainingSchedule};
use super::strategy::{ClientUpdate, Strategy};
use crate::nn::{init_model, ModelParams};
use crate::{derive_seed, Error, Result};

/// Per-client line of a [`RoundReport`]. The schedule is the one executed in
/// the round; the accuracy is the one reported for the resulting global
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientRoundRecord {
    pub id: String,
    pub selected: bool,
    pub epochs: u32,
    pub steps: u32,
    pub local_steps: u64,
    pub training_seconds: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: u32,
    pub selected: Vec<String>,
    pub clients: Vec<ClientRoundRecord>,
    pub mean_accuracy: f64,
    pub accuracy_std: f64,
    pub best_accuracy: f64,
    pub best_round: u32,
    pub stop_counter: u32,
    pub round_seconds: f64,
    pub cumulative_seconds: f64,
    pub step_budget: u64,
    pub cumulative_step_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulative_wall_seconds: Option<f64>,
    /// Set on the last report when the round cap ended the run.
    pub truncated: bool,
}

/// Produces the accuracy a client reports for a global model.
pub trait Evaluator: Sync {
    fn evaluate(&self, round: u32, client_index: usize, client: &ClientState, model: &ModelParams) -> Result<f64>;
}

/// F1 on the client's validation set.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationF1;

impl Evaluator for ValidationF1 {
    fn evaluate(&self, _round: u32, _index: usize, client: &ClientState, model: &ModelParams) -> Result<f64> {
        evaluate_client(client, model)
    }
}

impl<F> Evaluator for F
where
    F: Fn(u32, usize, &ClientState, &ModelParams) -> Result<f64> + Sync,
{
    fn evaluate(&self, round: u32, client_index: usize, client: &ClientState, model: &ModelParams) -> Result<f64> {
        self(round, client_index, client, model)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub layer_dims: Vec<usize>,
    /// Starting global model; drawn from `seed` when absent.
    pub initial_model: Option<ModelParams>,
    /// Train and evaluate clients on the rayon pool.
    pub parallel: bool,
    pub record_wall_clock: bool,
}

impl RunOptions {
    pub fn new(seed: u64, layer_dims: &[usize]) -> Self {
        Self {
            seed,
            layer_dims: layer_dims.to_vec(),
            initial_model: None,
            parallel: false,
            record_wall_clock: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FederationOutcome {
    pub initial_model: ModelParams,
    pub best_model: ModelParams,
    pub best_round: u32,
    pub reports: Vec<RoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationSummary {
    pub rounds: u32,
    pub best_round: u32,
    pub best_mean_f1: f64,
    pub best_f1_std: f64,
    pub total_simulated_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_wall_seconds: Option<f64>,
    pub step_budget: u64,
    pub truncated: bool,
    pub best_round_accuracies: BTreeMap<String, f64>,
    pub final_accuracies: BTreeMap<String, f64>,
}

impl FederationOutcome {
    pub fn summary(&self) -> FederationSummary {
        let last = self.reports.last();
        let best = self.reports.iter().find(|r| r.round == self.best_round);
        let accs = |r: Option<&RoundReport>| {
            r.map(|r| r.clients.iter().map(|c| (c.id.clone(), c.accuracy)).collect())
                .unwrap_or_default()
        };
        FederationSummary {
            rounds: self.reports.len() as u32,
            best_round: self.best_round,
            best_mean_f1: best.map_or(0.0, |r| r.mean_accuracy),
            best_f1_std: best.map_or(0.0, |r| r.accuracy_std),
            total_simulated_seconds: last.map_or(0.0, |r| r.cumulative_seconds),
            total_wall_seconds: last.and_then(|r| r.cumulative_wall_seconds),
            step_budget: last.map_or(0, |r| r.cumulative_step_budget),
            truncated: last.is_some_and(|r| r.truncated),
            best_round_accuracies: accs(best),
            final_accuracies: accs(last),
        }
    }
}

/// One JSON object per line, fields in declaration order.
pub fn reports_to_jsonl(reports: &[RoundReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("reports serialize"));
        out.push('\n');
    }
    out
}

pub fn run_federation(
    clients: &mut [ClientState],
    strategy: &dyn Strategy,
    hp: &FlHyperParams,
    opts: &RunOptions,
) -> Result<FederationOutcome> {
    run_federation_with(clients, strategy, hp, opts, &ValidationF1, &mut |_| Ok(()))
}

fn map_clients<T, F>(parallel: bool, items: &[usize], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        items.par_iter().map(|&i| f(i)).collect()
    } else {
        items.iter().map(|&i| f(i)).collect()
    }
}

/// The federation loop: schedule, train selected clients, aggregate over all
/// clients, broadcast, evaluate, and stop once the mean accuracy has not
/// improved for more than `patience` rounds. Returns the best global model
/// seen. `observer` sees every report as soon as it is produced.
pub fn run_federation_with(
    clients: &mut [ClientState],
    strategy: &dyn Strategy,
    hp: &FlHyperParams,
    opts: &RunOptions,
    evaluator: &dyn Evaluator,
    observer: &mut dyn FnMut(&RoundReport) -> Result<()>,
) -> Result<FederationOutcome> {
    hp.validate()?;
    if clients.is_empty() {
        return Err(Error::InvalidInput("federation needs at least one client".into()));
    }
    let initial = match &opts.initial_model {
        Some(m) => {
            if m.layer_dims() != opts.layer_dims.as_slice() {
                return Err(Error::Incompatible(format!(
                    "initial model has dims {:?}, expected {:?}",
                    m.layer_dims(),
                    opts.layer_dims
                )));
            }
            m.clone()
        }
        None => init_model(&opts.layer_dims, derive_seed!(opts.seed, "init"))?,
    };
    for c in clients.iter_mut() {
        c.current_model = Some(initial.clone());
        c.local_model = None;
        c.schedule = TrainingSchedule::IDLE;
        c.last_accuracy = 0.0;
    }

    let all: Vec<usize> = (0..clients.len()).collect();
    let mut global = initial.clone();
    let mut best = initial.clone();
    let mut best_round = 0u32;
    let mut a_max = 0.0f64;
    let mut stop_counter = 0u32;
    let mut previous: Option<Vec<f64>> = None;
    let mut cumulative_seconds = 0.0f64;
    let mut cumulative_budget = 0u64;
    let mut cumulative_wall = 0.0f64;
    let mut reports = Vec::new();

    for round in 1u32.. {
        let started = Instant::now();
        let schedules = strategy.schedules(round, previous.as_deref(), clients, opts.seed)?;
        if schedules.len() != clients.len() {
            return Err(Error::InvalidInput(format!(
                "strategy {} returned {} schedules for {} clients",
                strategy.name(),
                schedules.len(),
                clients.len()
            )));
        }
        let selected: Vec<usize> = all.iter().copied().filter(|&i| schedules[i].selected).collect();
        if selected.is_empty() {
            return Err(Error::InvalidInput(format!("no client selected in round {round}")));
        }

        let updates: Vec<ClientUpdate> = {
            let view: &[ClientState] = clients;
            let g = &global;
            map_clients(opts.parallel, &selected, |i| {
                strategy.client_update(&view[i], g, &schedules[i], round)
            })?
        };

        let mut local_steps = vec![0u64; clients.len()];
        let next = {
            let mut contributions: Vec<&ModelParams> =
                clients.iter().map(|c| c.current_model.as_ref().unwrap_or(&global)).collect();
            for (&i, u) in selected.iter().zip(&updates) {
                contributions[i] = &u.model;
                local_steps[i] = u.local_steps;
            }
            strategy.aggregate(&contributions, clients)?
        };
        let chosen: Vec<&ClientState> = selected.iter().map(|&i| &clients[i]).collect();
        let chosen_schedules: Vec<TrainingSchedule> = selected.iter().map(|&i| schedules[i]).collect();
        let round_seconds = simulated_round_time(&chosen, &chosen_schedules)?;
        let training_seconds: Vec<f64> = all
            .iter()
            .map(|&i| if schedules[i].selected { clients[i].training_seconds(&schedules[i]) } else { 0.0 })
            .collect();

        for (&i, u) in selected.iter().zip(updates) {
            if u.local_model.is_some() {
                clients[i].local_model = u.local_model;
            }
        }
        global = next;
        for (c, s) in clients.iter_mut().zip(&schedules) {
            c.current_model = Some(global.clone());
            c.schedule = *s;
        }

        let accuracies: Vec<f64> = {
            let view: &[ClientState] = clients;
            let g = &global;
            map_clients(opts.parallel, &all, |i| evaluator.evaluate(round, i, &view[i], g))?
        };
        if let Some(a) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidInput(format!("evaluator returned accuracy {a} outside [0, 1]")));
        }
        for (c, &a) in clients.iter_mut().zip(&accuracies) {
            c.last_accuracy = a;
        }

        let mean = mean_accuracy(&accuracies);
        if mean > a_max {
            a_max = mean;
            best = global.clone();
            best_round = round;
            stop_counter = 0;
        } else {
            stop_counter += 1;
        }
        let stop = hp.early_stopping && stop_counter > hp.patience;
        let truncated = !stop && hp.max_rounds == Some(round);

        let budget: u64 = schedules.iter().map(TrainingSchedule::budget).sum();
        cumulative_seconds += round_seconds;
        cumulative_budget += budget;
        let wall = opts.record_wall_clock.then(|| started.elapsed().as_secs_f64());
        if let Some(w) = wall {
            cumulative_wall += w;
        }
        let report = RoundReport {
            round,
            selected: selected.iter().map(|&i| clients[i].id.clone()).collect(),
            clients: all
                .iter()
                .map(|&i| ClientRoundRecord {
                    id: clients[i].id.clone(),
                    selected: schedules[i].selected,
                    epochs: schedules[i].epochs,
                    steps: schedules[i].steps,
                    local_steps: local_steps[i],
                    training_seconds: training_seconds[i],
                    accuracy: accuracies[i],
                })
                .collect(),
            mean_accuracy: mean,
            accuracy_std: accuracy_std(&accuracies),
            best_accuracy: a_max,
            best_round,
            stop_counter,
            round_seconds,
            cumulative_seconds,
            step_budget: budget,
            cumulative_step_budget: cumulative_budget,
            wall_seconds: wall,
            cumulative_wall_seconds: wall.map(|_| cumulative_wall),
            truncated,
        };
        observer(&report)?;
        reports.push(report);
        if stop || truncated {
            break;
        }
        previous = Some(accuracies);
    }

    Ok(FederationOutcome { initial_model: initial, best_model: best, best_round, reports })
}
