use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::{derive_seed, seed, Error, Result};

/// Local work the server assigns to one client for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub epochs: u32,
    pub steps: u32,
    pub selected: bool,
}

impl TrainingSchedule {
    pub const IDLE: TrainingSchedule = TrainingSchedule { epochs: 0, steps: 0, selected: false };

    pub fn active(epochs: u32, steps: u32) -> Self {
        Self { epochs, steps, selected: true }
    }

    /// MBGD steps this schedule consumes (`c_e * c_s`).
    pub fn budget(&self) -> u64 {
        self.epochs as u64 * self.steps as u64
    }
}

/// Federation hyper-parameters shared by all strategies. The adaptive
/// bounds apply to FLAD; the fixed epochs, batch size and client fraction to
/// the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlHyperParams {
    pub patience: u32,
    pub e_min: u32,
    pub e_max: u32,
    pub s_min: u32,
    pub s_max: u32,
    pub learning_rate: f32,
    pub client_fraction: f64,
    pub fixed_epochs: u32,
    pub batch_size: usize,
    /// Hard cap on rounds; reaching it marks the last report as truncated.
    pub max_rounds: Option<u32>,
    /// When false the run ignores patience and stops only at `max_rounds`.
    pub early_stopping: bool,
}

impl Default for FlHyperParams {
    fn default() -> Self {
        Self {
            patience: 25,
            e_min: 1,
            e_max: 5,
            s_min: 10,
            s_max: 1000,
            learning_rate: 0.01,
            client_fraction: 0.8,
            fixed_epochs: 1,
            batch_size: 50,
            max_rounds: None,
            early_stopping: true,
        }
    }
}

impl FlHyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.patience < 1 {
            return bad("patience must be at least 1".into());
        }
        if self.e_min < 1 || self.e_min > self.e_max {
            return bad(format!("need 1 <= e_min <= e_max, got {}..{}", self.e_min, self.e_max));
        }
        if self.s_min < 1 || self.s_min > self.s_max {
            return bad(format!("need 1 <= s_min <= s_max, got {}..{}", self.s_min, self.s_max));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return bad(format!("client_fraction must be in (0, 1], got {}", self.client_fraction));
        }
        if self.fixed_epochs < 1 || self.batch_size < 1 {
            return bad("fixed_epochs and batch_size must be at least 1".into());
        }
        if self.max_rounds == Some(0) {
            return bad("max_rounds must be at least 1".into());
        }
        if !self.early_stopping && self.max_rounds.is_none() {
            return bad("max_rounds is required when early stopping is disabled".into());
        }
        Ok(())
    }
}

/// Arithmetic mean of client accuracies, compensated and kept inside
/// `[min, max]` so the lowest client always compares `<=` to it.
pub fn mean_accuracy(accuracies: &[f64]) -> f64 {
    if accuracies.is_empty() {
        return 0.0;
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &a in accuracies {
        let t = sum + a;
        comp += if sum.abs() >= a.abs() { (sum - t) + a } else { (a - t) + sum };
        sum = t;
    }
    let mean = (sum + comp) / accuracies.len() as f64;
    let lo = accuracies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mean.clamp(lo, hi)
}

/// Population standard deviation.
pub fn accuracy_std(accuracies: &[f64]) -> f64 {
    if accuracies.is_empty() {
        return 0.0;
    }
    let mu = mean_accuracy(accuracies);
    let var = accuracies.iter().map(|a| (a - mu) * (a - mu)).sum::<f64>() / accuracies.len() as f64;
    var.sqrt()
}

fn round_half_up(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}

/// Adaptive selection: clients at or below the mean accuracy train next
/// round, with epochs and steps scaled linearly from the maximum (worst
/// client) down to the minimum (best selected client).
pub fn select_clients(accuracies: &[f64], hp: &FlHyperParams) -> Result<Vec<TrainingSchedule>> {
    if accuracies.is_empty() {
        return Err(Error::InvalidInput("cannot select from an empty federation".into()));
    }
    if let Some(a) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidInput(format!("accuracy {a} outside [0, 1]")));
    }
    let mu = mean_accuracy(accuracies);
    let chosen: Vec<f64> = accuracies.iter().copied().filter(|&a| a <= mu).collect();
    let hi = chosen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = chosen.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(accuracies
        .iter()
        .map(|&a| {
            if a > mu {
                return TrainingSchedule::IDLE;
            }
            let sigma = if hi == lo { 1.0 } else { (hi - a) / (hi - lo) };
            let e = round_half_up(hp.e_min as f64 + (hp.e_max - hp.e_min) as f64 * sigma);
            let s = round_half_up(hp.s_min as f64 + (hp.s_max - hp.s_min) as f64 * sigma);
            TrainingSchedule::active(e.clamp(hp.e_min, hp.e_max), s.clamp(hp.s_min, hp.s_max))
        })
        .collect())
}

/// Number of clients the baselines train per round: `ceil(F * |C|)`.
pub fn baseline_quota(clients: usize, fraction: f64) -> usize {
    ((fraction * clients as f64).ceil() as usize).clamp(1, clients.max(1))
}

/// Indices (ascending) of the clients a baseline trains in `round`, drawn
/// without replacement from the server stream.
pub fn sample_clients(clients: usize, fraction: f64, root_seed: u64, round: u32) -> Vec<usize> {
    let k = baseline_quota(clients, fraction);
    let mut rng = seed::rng(derive_seed!(root_seed, "server", round as u64));
    let mut picked = sample(&mut rng, clients, k).into_vec();
    picked.sort_unstable();
    picked
}
