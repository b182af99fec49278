//! Server-side orchestration: adaptive and baseline client selection,
//! local training, aggregation, early stopping and simulated round time.

mod aggregate;
mod client;
mod run;
mod schedule;
mod strategy;

pub use aggregate::{aggregate_fedavg, aggregate_mean, fedavg_weights, flddos_personalize};
pub use client::{
    evaluate_client, evaluate_on, simulated_round_time, ClientData, ClientState, LabeledMatrix, TimingModel,
};
pub use run::{
    reports_to_jsonl, run_federation, run_federation_with, ClientRoundRecord, Evaluator, FederationOutcome,
    FederationSummary, RoundReport, RunOptions, ValidationF1,
};
pub use schedule::{
    accuracy_std, baseline_quota, mean_accuracy, sample_clients, select_clients, FlHyperParams,
    TrainingSchedule,
};
pub use strategy::{ClientUpdate, FedAvg, Flad, FlDdos, Strategy, StrategyRegistry};
