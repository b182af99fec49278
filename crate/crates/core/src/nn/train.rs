use rand::seq::SliceRandom;

use super::{Gradients, Matrix, ModelParams};
use crate::{seed, Error, Result};

/// Probabilities are kept inside `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f32 = 1e-7;

/// Inputs and binary labels (0 benign, 1 DDoS) of one mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Matrix,
    pub labels: Vec<u8>,
}

impl Batch {
    pub fn new(inputs: Matrix, labels: Vec<u8>) -> Result<Self> {
        check_labels(&inputs, &labels)?;
        if labels.is_empty() {
            return Err(Error::EmptyDataset("batch has no rows".into()));
        }
        Ok(Self { inputs, labels })
    }
}

/// Local training budget: learning rate, epochs (`c_e`) and MBGD steps per
/// epoch (`c_s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f32,
    pub epochs: u32,
    pub mbgd_steps: u32,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // A zero rate is accepted: it is the identity update.
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.mbgd_steps == 0 {
            return Err(Error::InvalidInput(format!(
                "epochs and steps must be at least 1, got {} and {}",
                self.epochs, self.mbgd_steps
            )));
        }
        Ok(())
    }
}

fn check_labels(inputs: &Matrix, labels: &[u8]) -> Result<()> {
    if inputs.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} input rows but {} labels",
            inputs.rows(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidInput(format!("label {bad} is not binary")));
    }
    Ok(())
}

fn check_input_width(params: &ModelParams, inputs: &Matrix) -> Result<()> {
    if inputs.rows() > 0 && inputs.cols() != params.input_width() {
        return Err(Error::Shape(format!(
            "inputs have {} columns, model expects {}",
            inputs.cols(),
            params.input_width()
        )));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

#[inline]
fn sigmoid(z: f32) -> f32 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Scratch buffers for per-row propagation.
struct Workspace {
    acts: Vec<Vec<f32>>,
    delta: Vec<f32>,
    delta_prev: Vec<f32>,
}

impl Workspace {
    fn new(params: &ModelParams) -> Self {
        let dims = params.layer_dims();
        let widest = *dims.iter().max().unwrap();
        Self {
            acts: dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
            delta: vec![0.0; widest],
            delta_prev: vec![0.0; widest],
        }
    }

    /// Returns the output logit; hidden activations are left in `acts`.
    fn forward_row(&mut self, params: &ModelParams, x: &[f32]) -> f32 {
        let layers = params.num_layers();
        for l in 0..layers {
            let (before, rest) = self.acts.split_at_mut(l);
            let input: &[f32] = if l == 0 { x } else { &before[l - 1] };
            let out = &mut rest[0];
            let fan_in = input.len();
            let w = params.weights(l);
            let b = params.biases(l);
            let hidden = l + 1 < layers;
            for (o, slot) in out.iter_mut().enumerate() {
                let z = b[o] + dot(&w[o * fan_in..(o + 1) * fan_in], input);
                *slot = if hidden { z.max(0.0) } else { z };
            }
        }
        self.acts[layers - 1][0]
    }

    /// Accumulates `scale * dLoss/dParams` for one row into `grad`.
    fn backward_row(
        &mut self,
        params: &ModelParams,
        x: &[f32],
        logit: f32,
        label: u8,
        scale: f32,
        grad: &mut Gradients,
    ) {
        let layers = params.num_layers();
        self.delta[0] = (sigmoid(logit) - label as f32) * scale;
        for l in (0..layers).rev() {
            let fan_out = params.layer_dims()[l + 1];
            let input: &[f32] = if l == 0 { x } else { &self.acts[l - 1] };
            let fan_in = input.len();
            {
                let gw = &mut grad.weights[l];
                for o in 0..fan_out {
                    let d = self.delta[o];
                    if d != 0.0 {
                        axpy(d, input, &mut gw[o * fan_in..(o + 1) * fan_in]);
                    }
                }
                let gb = &mut grad.biases[l];
                for (g, d) in gb.iter_mut().zip(&self.delta[..fan_out]) {
                    *g += d;
                }
            }
            if l > 0 {
                let w = params.weights(l);
                let prev = &mut self.delta_prev[..fan_in];
                prev.iter_mut().for_each(|v| *v = 0.0);
                for o in 0..fan_out {
                    let d = self.delta[o];
                    if d != 0.0 {
                        axpy(d, &w[o * fan_in..(o + 1) * fan_in], prev);
                    }
                }
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                std::mem::swap(&mut self.delta, &mut self.delta_prev);
            }
        }
    }
}

/// Probability of the positive (DDoS) class for each input row.
pub fn forward(params: &ModelParams, inputs: &Matrix) -> Result<Vec<f32>> {
    check_input_width(params, inputs)?;
    let mut ws = Workspace::new(params);
    Ok((0..inputs.rows())
        .map(|i| {
            let z = ws.forward_row(params, inputs.row(i));
            sigmoid(z).clamp(PROB_EPS, 1.0 - PROB_EPS)
        })
        .collect())
}

/// Mean binary cross-entropy.
pub fn bce_loss(probs: &[f32], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} probabilities but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::EmptyDataset("loss over zero samples".into()));
    }
    let eps = PROB_EPS as f64;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = (p as f64).clamp(eps, 1.0 - eps);
            let y = y as f64;
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok((total / probs.len() as f64).max(0.0))
}

/// Batch-averaged gradient of the loss with respect to every parameter.
pub fn backward(params: &ModelParams, batch: &Batch) -> Result<Gradients> {
    check_input_width(params, &batch.inputs)?;
    check_labels(&batch.inputs, &batch.labels)?;
    let mut grad = ModelParams::zeros(params.layer_dims())?;
    let mut ws = Workspace::new(params);
    let scale = 1.0 / batch.labels.len() as f32;
    for (i, &y) in batch.labels.iter().enumerate() {
        let x = batch.inputs.row(i);
        let z = ws.forward_row(params, x);
        ws.backward_row(params, x, z, y, scale, &mut grad);
    }
    Ok(grad)
}

/// Batch size that yields roughly `steps` updates per epoch, never below 1.
pub fn batch_size_for_steps(train_len: usize, steps: u32) -> usize {
    (train_len / steps.max(1) as usize).max(1)
}

/// Mini-batch gradient descent where the batch size is derived from the
/// requested number of steps per epoch.
pub fn mbgd_fit(
    params: &ModelParams,
    inputs: &Matrix,
    labels: &[u8],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<ModelParams> {
    cfg.validate()?;
    let batch = batch_size_for_steps(inputs.rows(), cfg.mbgd_steps);
    mbgd_fit_with_batch(params, inputs, labels, cfg.learning_rate, cfg.epochs, batch, seed)
}

/// Mini-batch gradient descent with an explicit batch size.
///
/// Rows are reshuffled (Fisher-Yates) at the start of every epoch from a stream
/// seeded with `seed`; each epoch visits `ceil(rows / batch_size)` batches.
pub fn mbgd_fit_with_batch(
    params: &ModelParams,
    inputs: &Matrix,
    labels: &[u8],
    learning_rate: f32,
    epochs: u32,
    batch_size: usize,
    seed: u64,
) -> Result<ModelParams> {
    if inputs.rows() == 0 {
        return Err(Error::EmptyDataset("training set is empty".into()));
    }
    check_input_width(params, inputs)?;
    check_labels(inputs, labels)?;
    if batch_size == 0 {
        return Err(Error::InvalidInput("batch size must be at least 1".into()));
    }
    let mut model = params.clone();
    if learning_rate == 0.0 {
        return Ok(model);
    }
    let mut rng = seed::rng(seed);
    let mut order: Vec<usize> = (0..inputs.rows()).collect();
    let mut grad = ModelParams::zeros(params.layer_dims())?;
    let mut ws = Workspace::new(params);
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            grad.fill_zero();
            let scale = 1.0 / chunk.len() as f32;
            for &i in chunk {
                let x = inputs.row(i);
                let z = ws.forward_row(&model, x);
                ws.backward_row(&model, x, z, labels[i], scale, &mut grad);
            }
            model.apply_step(&grad, learning_rate);
        }
        if !model.is_finite() {
            return Err(Error::InvalidInput(format!(
                "parameters became non-finite in epoch {epoch}; lower the learning rate"
            )));
        }
    }
    Ok(model)
}
