use std::collections::BTreeMap;
use std::sync::Arc;

use super::config::{ExperimentConfig, StrategyConfig};
use super::io::sha256_hex;
use crate::analysis::DEFAULT_THRESHOLD;
use crate::datagen::{
    assemble_clients, encode_dataset, generate_attack_datasets, load_dataset, AttackLibrary, DatasetSplit,
    MinMaxScaler, Transport, BENIGN_TAG, BUILTIN_LIBRARY,
};
use crate::federation::{ClientData, ClientState, TimingModel};
use crate::nn::{forward, ModelParams};
use crate::{derive_seed, Error, Result};

/// The attack library an experiment uses, with the digest of its source.
#[derive(Debug, Clone)]
pub struct LoadedLibrary {
    pub library: AttackLibrary,
    pub sha256: String,
}

pub fn load_library(cfg: &ExperimentConfig) -> Result<LoadedLibrary> {
    let text = match &cfg.data.library {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("cannot read attack library {}: {e}", p.display())))?,
        None => BUILTIN_LIBRARY.to_string(),
    };
    let mut library = AttackLibrary::parse(&text)?;
    if let Some(names) = &cfg.data.attacks {
        library = library.select(names)?;
    }
    Ok(LoadedLibrary { library, sha256: sha256_hex(text.as_bytes()) })
}

pub fn data_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.data.seed.unwrap_or_else(|| derive_seed!(cfg.seed, "data"))
}

/// One unscaled dataset per library attack.
pub fn attack_datasets(cfg: &ExperimentConfig, lib: &AttackLibrary) -> Result<Vec<DatasetSplit>> {
    generate_attack_datasets(lib, cfg.data.base_count, cfg.data.max_per_class, data_seed(cfg))
}

/// Unscaled local datasets, one per client: loaded from `data.datasets` or
/// generated.
pub fn client_datasets(cfg: &ExperimentConfig, lib: &AttackLibrary) -> Result<Vec<DatasetSplit>> {
    if !cfg.data.datasets.is_empty() {
        return cfg.data.datasets.iter().map(load_dataset).collect();
    }
    let per_attack = attack_datasets(cfg, lib)?;
    let clients = cfg.data.clients.unwrap_or(per_attack.len());
    assemble_clients(&per_attack, clients, cfg.data.attacks_per_client, data_seed(cfg))
}

/// Min-max scaling fit on the union of the training partitions.
pub fn normalize(splits: &[DatasetSplit], enabled: bool) -> Vec<DatasetSplit> {
    if !enabled {
        return splits.to_vec();
    }
    let scaler = MinMaxScaler::fit_training(splits);
    splits.iter().map(|s| scaler.transform_split(s)).collect()
}

/// Digest over the serialized datasets, in order.
pub fn datasets_digest(splits: &[DatasetSplit]) -> String {
    let mut all = Vec::new();
    for s in splits {
        all.extend_from_slice(&encode_dataset(s));
    }
    sha256_hex(&all)
}

/// Client data shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct ClientPool {
    pub ids: Vec<String>,
    pub data: Vec<Arc<ClientData>>,
    /// Whether the client holds at least one TCP-based attack.
    pub tcp: Vec<bool>,
    pub sha256: String,
}

impl ClientPool {
    /// `splits` are used as given; scale them beforehand if needed.
    pub fn new(splits: &[DatasetSplit], lib: &AttackLibrary) -> Self {
        let mut ids: Vec<String> = Vec::with_capacity(splits.len());
        for (i, s) in splits.iter().enumerate() {
            let base = match s.attack_tag() {
                t if t.is_empty() => format!("client{i}"),
                t => t,
            };
            let mut id = base.clone();
            let mut k = 2;
            while ids.contains(&id) {
                id = format!("{base}#{k}");
                k += 1;
            }
            ids.push(id);
        }
        let tcp = splits
            .iter()
            .map(|s| {
                s.attack_tag().split('+').any(|t| {
                    lib.attack.iter().any(|a| a.name == t && a.protocol == Transport::Tcp)
                })
            })
            .collect();
        Self {
            ids,
            data: splits.iter().map(|s| Arc::new(ClientData::from_split(s))).collect(),
            tcp,
            sha256: datasets_digest(splits),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Fresh client states for one run.
    pub fn clients(
        &self,
        indices: &[usize],
        strategy: &StrategyConfig,
        timing: &TimingModel,
        root_seed: u64,
    ) -> Result<Vec<ClientState>> {
        indices
            .iter()
            .map(|&i| {
                let id = &self.ids[i];
                let gamma = strategy.gamma.get(id).copied().unwrap_or(if self.tcp[i] {
                    strategy.tcp_gamma
                } else {
                    strategy.default_gamma
                });
                ClientState::new(id.clone(), self.data[i].clone(), timing, root_seed)?.with_gamma(gamma)
            })
            .collect()
    }
}

/// Detection rate of every attack tag over the pooled test sets.
pub fn attack_tpr(model: &ModelParams, clients: &[ClientState]) -> Result<BTreeMap<String, f64>> {
    let mut tally: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for c in clients {
        let test = &c.data.test;
        if test.is_empty() {
            continue;
        }
        let probs = forward(model, &test.inputs)?;
        for ((p, &y), tag) in probs.iter().zip(&test.labels).zip(&test.tags) {
            if y != 1 || &**tag == BENIGN_TAG {
                continue;
            }
            let e = tally.entry(tag.to_string()).or_default();
            e.1 += 1;
            e.0 += u64::from(*p >= DEFAULT_THRESHOLD);
        }
    }
    Ok(tally
        .into_iter()
        .map(|(k, (tp, n))| (k, tp as f64 / n as f64))
        .collect())
}
