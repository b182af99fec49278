use std::path::Path;

use super::config::{ExperimentConfig, StrategyConfig};
use super::io::JsonlWriter;
use crate::federation::{
    run_federation_with, ClientState, FederationOutcome, FlHyperParams, RunOptions, StrategyRegistry, ValidationF1,
};
use crate::nn::ModelParams;
use crate::Result;

/// Progress sink for human-readable status lines.
pub type Progress<'a> = &'a dyn Fn(&str);

/// One federation run whose round reports are streamed to `jsonl`.
pub(crate) fn run_logged(
    cfg: &ExperimentConfig,
    strategy: &StrategyConfig,
    hp: &FlHyperParams,
    clients: &mut [ClientState],
    seed: u64,
    initial_model: Option<ModelParams>,
    jsonl: &Path,
) -> Result<FederationOutcome> {
    let registry = StrategyRegistry::with_builtins();
    let strat = registry.build(&strategy.name, hp)?;
    let opts = RunOptions {
        seed,
        layer_dims: cfg.layer_dims(),
        initial_model,
        parallel: cfg.parallel,
        record_wall_clock: cfg.record_wall_clock,
    };
    let mut sink = JsonlWriter::create(jsonl)?;
    let result = run_federation_with(clients, strat.as_ref(), hp, &opts, &ValidationF1, &mut |r| sink.write(r));
    // Keep whatever rounds completed, even when the run failed.
    let finished = sink.finish();
    let outcome = result?;
    finished?;
    Ok(outcome)
}

/// The FLAD entry of the config, or a default one.
pub(crate) fn flad_strategy(cfg: &ExperimentConfig) -> StrategyConfig {
    cfg.strategy
        .iter()
        .find(|s| s.is_flad())
        .cloned()
        .unwrap_or_else(|| StrategyConfig::named("flad"))
}
