//! Experiment configuration and the drivers behind the command-line tool.

mod analyze;
mod config;
mod data;
mod generate;
mod io;
mod retrain;
mod run;
mod scalability;
mod stats;
mod train;

pub use analyze::{cmd_analyze, AnalyzeSummary};
pub use config::{
    AnalyzeConfig, DataConfig, ExperimentConfig, ModelConfig, RetrainingConfig, ScalabilityConfig, Scenario,
    StrategyConfig,
};
pub use data::{
    attack_datasets, attack_tpr, client_datasets, data_seed, datasets_digest, load_library, normalize, ClientPool,
    LoadedLibrary,
};
pub use generate::{cmd_generate, Manifest, ManifestEntry};
pub use io::{model_digest, sha256_hex, JsonlWriter};
pub use retrain::{cmd_retrain, RetrainSummary, StageRecord, StageSummary};
pub use run::Progress;
pub use scalability::{cmd_scalability, ScalabilityRow};
pub use stats::MeanStd;
pub use train::{cmd_train, ExperimentSummary, StrategyResult, StrategyRun};
