use std::collections::BTreeMap;
use std::fmt;

use super::aggregate::{aggregate_fedavg, aggregate_mean, flddos_personalize};
use super::client::ClientState;
use super::schedule::{sample_clients, select_clients, FlHyperParams, TrainingSchedule};
use crate::nn::{mbgd_fit, mbgd_fit_with_batch, ModelParams, TrainConfig};
use crate::{derive_seed, Error, Result};

/// What a client sends back after local training.
#[derive(Debug, Clone)]
pub struct ClientUpdate {
    pub model: ModelParams,
    /// MBGD steps spent on a purely local model, if any.
    pub local_steps: u64,
    pub local_model: Option<ModelParams>,
}

/// A federated training strategy: who trains, how much, and how the
/// results are combined.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;

    /// Schedules for the given round. `accuracies` holds the values reported
    /// at the end of the previous round and is `None` before the first one.
    fn schedules(
        &self,
        round: u32,
        accuracies: Option<&[f64]>,
        clients: &[ClientState],
        root_seed: u64,
    ) -> Result<Vec<TrainingSchedule>>;

    /// Local training of one selected client starting from `global`.
    fn client_update(
        &self,
        client: &ClientState,
        global: &ModelParams,
        schedule: &TrainingSchedule,
        round: u32,
    ) -> Result<ClientUpdate>;

    /// Combine one contribution per client (in client order) into the next
    /// global model.
    fn aggregate(&self, contributions: &[&ModelParams], clients: &[ClientState]) -> Result<ModelParams>;
}

impl fmt::Debug for dyn Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({})", self.name())
    }
}

/// Adaptive selection with the arithmetic-mean aggregate.
#[derive(Debug, Clone)]
pub struct Flad {
    hp: FlHyperParams,
}

impl Flad {
    pub fn new(hp: &FlHyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp: hp.clone() })
    }
}

impl Strategy for Flad {
    fn name(&self) -> &str {
        "flad"
    }

    fn schedules(
        &self,
        _round: u32,
        accuracies: Option<&[f64]>,
        clients: &[ClientState],
        _root_seed: u64,
    ) -> Result<Vec<TrainingSchedule>> {
        match accuracies {
            None => Ok(vec![TrainingSchedule::active(self.hp.e_max, self.hp.s_max); clients.len()]),
            Some(acc) => select_clients(acc, &self.hp),
        }
    }

    fn client_update(
        &self,
        client: &ClientState,
        global: &ModelParams,
        schedule: &TrainingSchedule,
        round: u32,
    ) -> Result<ClientUpdate> {
        let cfg = TrainConfig {
            learning_rate: self.hp.learning_rate,
            epochs: schedule.epochs,
            mbgd_steps: schedule.steps,
        };
        let d = &client.data.train;
        let model = mbgd_fit(global, &d.inputs, &d.labels, &cfg, client.round_seed(round))?;
        Ok(ClientUpdate { model, local_steps: 0, local_model: None })
    }

    fn aggregate(&self, contributions: &[&ModelParams], _clients: &[ClientState]) -> Result<ModelParams> {
        aggregate_mean(contributions)
    }
}

fn batches(len: usize, batch: usize) -> u32 {
    len.div_ceil(batch) as u32
}

fn fixed_schedules(hp: &FlHyperParams, round: u32, clients: &[ClientState], root_seed: u64) -> Vec<TrainingSchedule> {
    let mut out = vec![TrainingSchedule::IDLE; clients.len()];
    for i in sample_clients(clients.len(), hp.client_fraction, root_seed, round) {
        out[i] = TrainingSchedule::active(hp.fixed_epochs, batches(clients[i].train_len(), hp.batch_size));
    }
    out
}

fn fixed_update(hp: &FlHyperParams, client: &ClientState, start: &ModelParams, seed: u64) -> Result<ModelParams> {
    let d = &client.data.train;
    mbgd_fit_with_batch(start, &d.inputs, &d.labels, hp.learning_rate, hp.fixed_epochs, hp.batch_size, seed)
}

fn train_counts(clients: &[ClientState]) -> Vec<u64> {
    clients.iter().map(|c| c.train_len() as u64).collect()
}

/// Random client fraction, fixed epochs and batch size, sample-weighted
/// aggregate.
#[derive(Debug, Clone)]
pub struct FedAvg {
    hp: FlHyperParams,
}

impl FedAvg {
    pub fn new(hp: &FlHyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp: hp.clone() })
    }
}

impl Strategy for FedAvg {
    fn name(&self) -> &str {
        "fedavg"
    }

    fn schedules(
        &self,
        round: u32,
        _accuracies: Option<&[f64]>,
        clients: &[ClientState],
        root_seed: u64,
    ) -> Result<Vec<TrainingSchedule>> {
        Ok(fixed_schedules(&self.hp, round, clients, root_seed))
    }

    fn client_update(
        &self,
        client: &ClientState,
        global: &ModelParams,
        _schedule: &TrainingSchedule,
        round: u32,
    ) -> Result<ClientUpdate> {
        let model = fixed_update(&self.hp, client, global, client.round_seed(round))?;
        Ok(ClientUpdate { model, local_steps: 0, local_model: None })
    }

    fn aggregate(&self, contributions: &[&ModelParams], clients: &[ClientState]) -> Result<ModelParams> {
        aggregate_fedavg(contributions, &train_counts(clients))
    }
}

/// FedAvg where each client blends the updated global model with a model
/// trained only on its own data, weighted by the client's `gamma`.
#[derive(Debug, Clone)]
pub struct FlDdos {
    hp: FlHyperParams,
}

impl FlDdos {
    pub fn new(hp: &FlHyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp: hp.clone() })
    }
}

impl Strategy for FlDdos {
    fn name(&self) -> &str {
        "flddos"
    }

    fn schedules(
        &self,
        round: u32,
        _accuracies: Option<&[f64]>,
        clients: &[ClientState],
        root_seed: u64,
    ) -> Result<Vec<TrainingSchedule>> {
        Ok(fixed_schedules(&self.hp, round, clients, root_seed))
    }

    fn client_update(
        &self,
        client: &ClientState,
        global: &ModelParams,
        schedule: &TrainingSchedule,
        round: u32,
    ) -> Result<ClientUpdate> {
        let updated = fixed_update(&self.hp, client, global, client.round_seed(round))?;
        if client.gamma == 1.0 {
            return Ok(ClientUpdate { model: updated, local_steps: 0, local_model: None });
        }
        let start = client.local_model.as_ref().unwrap_or(global);
        let local = fixed_update(&self.hp, client, start, derive_seed!(client.round_seed(round), "local"))?;
        let model = flddos_personalize(&updated, &local, client.gamma)?;
        Ok(ClientUpdate { model, local_steps: schedule.budget(), local_model: Some(local) })
    }

    fn aggregate(&self, contributions: &[&ModelParams], clients: &[ClientState]) -> Result<ModelParams> {
        aggregate_fedavg(contributions, &train_counts(clients))
    }
}

type Factory = Box<dyn Fn(&FlHyperParams) -> Result<Box<dyn Strategy>> + Send + Sync>;

/// Strategies addressable by name.
pub struct StrategyRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// `flad`, `fedavg` and `flddos`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("flad", |hp| Ok(Box::new(Flad::new(hp)?)));
        r.register("fedavg", |hp| Ok(Box::new(FedAvg::new(hp)?)));
        r.register("flddos", |hp| Ok(Box::new(FlDdos::new(hp)?)));
        r
    }

    /// Adds or replaces a strategy.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&FlHyperParams) -> Result<Box<dyn Strategy>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_ascii_lowercase(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&name.to_ascii_lowercase())
    }

    pub fn build(&self, name: &str, hp: &FlHyperParams) -> Result<Box<dyn Strategy>> {
        let factory = self.factories.get(&name.to_ascii_lowercase()).ok_or_else(|| {
            Error::Config(format!(
                "unknown strategy {name:?}; available: {}",
                self.names().join(", ")
            ))
        })?;
        factory(hp)
    }
}
