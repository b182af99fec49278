use crate::nn::ModelParams;
use crate::{Error, Result};

fn weighted_sum(models: &[&ModelParams], weights: &[f64], divisor: f64) -> Result<ModelParams> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to aggregate".into()))?;
    for m in &models[1..] {
        first.ensure_compatible(m)?;
    }
    let mut out = (*first).clone();
    let mut acc: Vec<f64> = Vec::new();
    for (t, dst) in out.tensors_mut().enumerate() {
        acc.clear();
        acc.resize(dst.len(), 0.0);
        for (m, &w) in models.iter().zip(weights) {
            let src = m.tensors().nth(t).expect("compatible models have equal tensor counts");
            for (a, &x) in acc.iter_mut().zip(src) {
                *a += w * x as f64;
            }
        }
        for (d, &a) in dst.iter_mut().zip(&acc) {
            *d = (a / divisor) as f32;
        }
    }
    Ok(out)
}

/// Element-wise arithmetic mean, accumulated in 64-bit floats in the order
/// given.
pub fn aggregate_mean(models: &[&ModelParams]) -> Result<ModelParams> {
    if models.is_empty() {
        return Err(Error::InvalidInput("nothing to aggregate".into()));
    }
    // Divide once at the end so identical inputs reproduce themselves exactly.
    weighted_sum(models, &vec![1.0; models.len()], models.len() as f64)
}

/// Aggregation weights `n_k / n`.
pub fn fedavg_weights(sample_counts: &[u64]) -> Result<Vec<f64>> {
    if sample_counts.is_empty() {
        return Err(Error::InvalidInput("no sample counts given".into()));
    }
    if sample_counts.contains(&0) {
        return Err(Error::InvalidInput("sample counts must be positive".into()));
    }
    let total: u64 = sample_counts.iter().sum();
    Ok(sample_counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Sample-count weighted average of client models.
pub fn aggregate_fedavg(models: &[&ModelParams], sample_counts: &[u64]) -> Result<ModelParams> {
    if models.len() != sample_counts.len() {
        return Err(Error::InvalidInput(format!(
            "{} models but {} sample counts",
            models.len(),
            sample_counts.len()
        )));
    }
    weighted_sum(models, &fedavg_weights(sample_counts)?, 1.0)
}

/// Personalised model `gamma * global + (1 - gamma) * local`.
pub fn flddos_personalize(global: &ModelParams, local: &ModelParams, gamma: f64) -> Result<ModelParams> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidInput(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    global.ensure_compatible(local)?;
    if gamma == 1.0 {
        return Ok(global.clone());
    }
    if gamma == 0.0 {
        return Ok(local.clone());
    }
    weighted_sum(&[global, local], &[gamma, 1.0 - gamma], 1.0)
}
