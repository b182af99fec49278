use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::schedule::TrainingSchedule;
use crate::analysis::{confusion, f1_score, DEFAULT_THRESHOLD};
use crate::datagen::{to_matrix, DatasetSplit, FlowSample};
use crate::nn::{forward, Matrix, ModelParams};
use crate::{derive_seed, Error, Result};

/// One partition flattened for the model, with per-sample attack tags kept
/// for per-attack reporting.
#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub inputs: Matrix,
    pub labels: Vec<u8>,
    pub tags: Vec<Arc<str>>,
}

impl LabeledMatrix {
    pub fn from_samples(samples: &[FlowSample]) -> Self {
        let (inputs, labels) = to_matrix(samples);
        let tags = samples.iter().map(|s| s.tag_arc().clone()).collect();
        Self { inputs, labels, tags }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A client's local data. Shared read-only between runs.
#[derive(Debug)]
pub struct ClientData {
    pub train: LabeledMatrix,
    pub validation: LabeledMatrix,
    pub test: LabeledMatrix,
}

impl ClientData {
    pub fn from_split(split: &DatasetSplit) -> Self {
        Self {
            train: LabeledMatrix::from_samples(&split.train),
            validation: LabeledMatrix::from_samples(&split.validation),
            test: LabeledMatrix::from_samples(&split.test),
        }
    }
}

/// Simulated cost model: one MBGD step costs `step_seconds_per_sample`
/// times the client's training-set size, plus a fixed network time per round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub step_seconds_per_sample: f64,
    pub network_seconds: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self { step_seconds_per_sample: 1e-5, network_seconds: 1.0 }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_seconds_per_sample.is_finite() && self.step_seconds_per_sample > 0.0) {
            return Err(Error::Config(format!(
                "step_seconds_per_sample must be positive, got {}",
                self.step_seconds_per_sample
            )));
        }
        if !(self.network_seconds.is_finite() && self.network_seconds >= 0.0) {
            return Err(Error::Config(format!(
                "network_seconds must be non-negative, got {}",
                self.network_seconds
            )));
        }
        Ok(())
    }
}

/// A federation participant.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub id: String,
    pub data: Arc<ClientData>,
    /// The last model received from (or trained for) the server.
    pub current_model: Option<ModelParams>,
    /// FLDDoS only: model trained on local data alone.
    pub local_model: Option<ModelParams>,
    pub gamma: f64,
    pub schedule: TrainingSchedule,
    pub last_accuracy: f64,
    pub step_time: f64,
    pub network_time: f64,
    pub rng_seed: u64,
}

impl ClientState {
    pub fn new(id: impl Into<String>, data: Arc<ClientData>, timing: &TimingModel, root_seed: u64) -> Result<Self> {
        let id = id.into();
        if data.train.is_empty() {
            return Err(Error::EmptyDataset(format!("client {id} has no training samples")));
        }
        if data.validation.is_empty() {
            return Err(Error::EmptyDataset(format!("client {id} has no validation samples")));
        }
        timing.validate()?;
        let rng_seed = derive_seed!(root_seed, "client", id.as_str());
        Ok(Self {
            step_time: timing.step_seconds_per_sample * data.train.len() as f64,
            network_time: timing.network_seconds,
            data,
            current_model: None,
            local_model: None,
            gamma: 1.0,
            schedule: TrainingSchedule::IDLE,
            last_accuracy: 0.0,
            rng_seed,
            id,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidInput(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn train_len(&self) -> usize {
        self.data.train.len()
    }

    /// Seed of this client's local training in `round`; independent of the
    /// order in which clients are processed.
    pub fn round_seed(&self, round: u32) -> u64 {
        derive_seed!(self.rng_seed, round as u64)
    }

    /// Simulated seconds to run `schedule`: `T_n + c_e * c_s * T_s`.
    pub fn training_seconds(&self, schedule: &TrainingSchedule) -> f64 {
        self.network_time + schedule.budget() as f64 * self.step_time
    }
}

/// F1 score of `model` on the client's validation set.
pub fn evaluate_client(client: &ClientState, model: &ModelParams) -> Result<f64> {
    evaluate_on(&client.data.validation, model)
}

/// F1 score of `model` on one partition.
pub fn evaluate_on(data: &LabeledMatrix, model: &ModelParams) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("evaluation set is empty".into()));
    }
    let probs = forward(model, &data.inputs)?;
    Ok(f1_score(&confusion(&probs, &data.labels, DEFAULT_THRESHOLD)?))
}

/// Round duration: the slowest selected client.
pub fn simulated_round_time(selected: &[&ClientState], schedules: &[TrainingSchedule]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::InvalidInput("round time needs at least one selected client".into()));
    }
    if selected.len() != schedules.len() {
        return Err(Error::InvalidInput(format!(
            "{} clients but {} schedules",
            selected.len(),
            schedules.len()
        )));
    }
    Ok(selected
        .iter()
        .zip(schedules)
        .map(|(c, s)| c.training_seconds(s))
        .fold(f64::NEG_INFINITY, f64::max))
}
