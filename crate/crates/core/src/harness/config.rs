use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{DEFAULT_MAX_PER_CLASS, FEATURE_NAMES, FLOW_LENGTH_FEATURE, FLOW_WIDTH};
use crate::federation::{FlHyperParams, StrategyRegistry, TimingModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// FLAD to convergence, baselines for the same number of rounds.
    #[default]
    Convergence,
    Retraining,
    Scalability,
    /// Every strategy runs to its own stopping point.
    SingleRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Attack library file; the built-in library when absent.
    pub library: Option<PathBuf>,
    /// Subset of library attacks, in the order given.
    pub attacks: Option<Vec<String>>,
    pub base_count: u64,
    pub max_per_class: u64,
    /// Defaults to one client per attack.
    pub clients: Option<usize>,
    pub attacks_per_client: usize,
    pub normalize: bool,
    /// Pre-built local datasets (FLND files), one per client. Replaces
    /// generation when non-empty.
    pub datasets: Vec<PathBuf>,
    /// Seed of the generator; derived from the root seed when absent.
    pub seed: Option<u64>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            library: None,
            attacks: None,
            base_count: 202,
            max_per_class: DEFAULT_MAX_PER_CLASS,
            clients: None,
            attacks_per_client: 1,
            normalize: true,
            datasets: Vec::new(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden_layers: usize,
    pub hidden_units: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { hidden_layers: 2, hidden_units: 32 }
    }
}

impl ModelConfig {
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![FLOW_WIDTH];
        dims.extend(std::iter::repeat_n(self.hidden_units, self.hidden_layers));
        dims.push(1);
        dims
    }
}

/// One strategy of a comparison. Unset fields fall back to `[federation]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f32>,
    /// Personalisation weight of clients holding a TCP-based attack.
    #[serde(default = "default_tcp_gamma")]
    pub tcp_gamma: f64,
    #[serde(default = "default_gamma")]
    pub default_gamma: f64,
    /// Per-client overrides keyed by client id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gamma: BTreeMap<String, f64>,
}

fn default_tcp_gamma() -> f64 {
    0.9
}

fn default_gamma() -> f64 {
    1.0
}

impl StrategyConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            epochs: None,
            batch_size: None,
            client_fraction: None,
            learning_rate: None,
            tcp_gamma: default_tcp_gamma(),
            default_gamma: default_gamma(),
            gamma: BTreeMap::new(),
        }
    }

    pub fn with_fixed(mut self, epochs: u32, batch_size: usize) -> Self {
        self.epochs = Some(epochs);
        self.batch_size = Some(batch_size);
        self
    }

    /// Label used in file names and summaries, e.g. `fedavg-e1-b50`.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut s = self.name.to_ascii_lowercase();
        if let Some(e) = self.epochs {
            s.push_str(&format!("-e{e}"));
        }
        if let Some(b) = self.batch_size {
            s.push_str(&format!("-b{b}"));
        }
        s
    }

    pub fn hyper_params(&self, base: &FlHyperParams) -> FlHyperParams {
        let mut hp = base.clone();
        if let Some(e) = self.epochs {
            hp.fixed_epochs = e;
        }
        if let Some(b) = self.batch_size {
            hp.batch_size = b;
        }
        if let Some(f) = self.client_fraction {
            hp.client_fraction = f;
        }
        if let Some(lr) = self.learning_rate {
            hp.learning_rate = lr;
        }
        hp
    }

    pub fn is_flad(&self) -> bool {
        self.name.eq_ignore_ascii_case("flad")
    }
}

fn default_strategies() -> Vec<StrategyConfig> {
    vec![
        StrategyConfig::named("flad"),
        StrategyConfig::named("fedavg").with_fixed(1, 50),
        StrategyConfig::named("fedavg").with_fixed(5, 50),
        StrategyConfig::named("flddos").with_fixed(10, 100),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrainingConfig {
    /// Number of attacks taking part; all when absent.
    pub attacks: Option<usize>,
    pub initial_clients: usize,
}

impl Default for RetrainingConfig {
    fn default() -> Self {
        Self { attacks: None, initial_clients: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalabilityConfig {
    pub sizes: Vec<usize>,
    pub attacks_per_client: usize,
}

impl Default for ScalabilityConfig {
    fn default() -> Self {
        Self { sizes: vec![13, 20, 30], attacks_per_client: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// FLND files to compare; generated from `[data]` when empty.
    pub datasets: Vec<PathBuf>,
    /// Packet attributes plus `Flow Length` by default.
    pub features: Option<Vec<String>>,
    pub bins: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self { datasets: Vec::new(), features: None, bins: crate::analysis::DEFAULT_BINS }
    }
}

impl AnalyzeConfig {
    pub fn feature_list(&self) -> Vec<String> {
        self.features.clone().unwrap_or_else(|| {
            FEATURE_NAMES
                .iter()
                .map(|s| s.to_string())
                .chain(std::iter::once(FLOW_LENGTH_FEATURE.to_string()))
                .collect()
        })
    }
}

fn default_repetitions() -> u32 {
    1
}

/// Full description of an experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub parallel: bool,
    /// Adds wall-clock fields to reports, which makes them run-dependent.
    #[serde(default)]
    pub record_wall_clock: bool,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub federation: FlHyperParams,
    #[serde(default)]
    pub timing: TimingModel,
    #[serde(default = "default_strategies")]
    pub strategy: Vec<StrategyConfig>,
    #[serde(default)]
    pub retraining: RetrainingConfig,
    #[serde(default)]
    pub scalability: ScalabilityConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(p) = self.data.library.as_mut() {
            resolve(base, p);
        }
        for p in self.data.datasets.iter_mut().chain(self.analyze.datasets.iter_mut()) {
            resolve(base, p);
        }
        if let Some(p) = self.output_dir.as_mut() {
            resolve(base, p);
        }
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        self.model.layer_dims()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1".into());
        }
        if self.model.hidden_layers < 1 || self.model.hidden_units < 1 {
            return bad("the model needs at least one hidden layer of at least one unit".into());
        }
        self.federation.validate()?;
        self.timing.validate()?;
        if let Some(p) = &self.data.library {
            if !p.is_file() {
                return bad(format!("attack library {} does not exist", p.display()));
            }
        }
        for p in self.data.datasets.iter().chain(&self.analyze.datasets) {
            if !p.is_file() {
                return bad(format!("dataset {} does not exist", p.display()));
            }
        }
        if !(1..=2).contains(&self.data.attacks_per_client) {
            return bad(format!(
                "data.attacks_per_client must be 1 or 2, got {}",
                self.data.attacks_per_client
            ));
        }
        if self.data.base_count < 20 {
            return bad(format!("data.base_count must be at least 20, got {}", self.data.base_count));
        }
        if self.strategy.is_empty() {
            return bad("at least one [[strategy]] is required".into());
        }
        let registry = StrategyRegistry::with_builtins();
        let mut labels = BTreeSet::new();
        for s in &self.strategy {
            if !registry.contains(&s.name) {
                return bad(format!(
                    "unknown strategy {:?}; available: {}",
                    s.name,
                    registry.names().join(", ")
                ));
            }
            let label = s.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return bad(format!("strategy label {label:?} is not usable as a file name"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate strategy label {label:?}"));
            }
            for g in std::iter::once(&s.tcp_gamma).chain([&s.default_gamma]).chain(s.gamma.values()) {
                if !(0.0..=1.0).contains(g) {
                    return bad(format!("strategy {label}: gamma {g} outside [0, 1]"));
                }
            }
            s.hyper_params(&self.federation).validate()?;
        }
        if self.retraining.initial_clients < 1 {
            return bad("retraining.initial_clients must be at least 1".into());
        }
        if self.scalability.sizes.is_empty() || self.scalability.sizes.contains(&0) {
            return bad("scalability.sizes must be a non-empty list of positive sizes".into());
        }
        if !(1..=2).contains(&self.scalability.attacks_per_client) {
            return bad("scalability.attacks_per_client must be 1 or 2".into());
        }
        if self.analyze.bins < 1 {
            return bad("analyze.bins must be at least 1".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.layer_dims(), vec![110, 32, 32, 1]);
        assert_eq!(cfg.federation.patience, 25);
        let labels: Vec<String> = cfg.strategy.iter().map(|s| s.label()).collect();
        assert_eq!(labels, ["flad", "fedavg-e1-b50", "fedavg-e5-b50", "flddos-e10-b100"]);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_strategies_are_config_errors() {
        assert!(matches!(ExperimentConfig::parse("sed = 1"), Err(Error::Config(_))));
        let cfg = ExperimentConfig::parse("[[strategy]]\nname = \"fedprox\"").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("fedprox")));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::parse(
            "seed = 9\nrepetitions = 2\n[federation]\npatience = 4\n[[strategy]]\nname = \"flad\"",
        )
        .unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn missing_library_names_the_path() {
        let cfg = ExperimentConfig::parse("[data]\nlibrary = \"/nonexistent/attacks.toml\"").unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("/nonexistent/attacks.toml"), "{err}");
    }
}
