use rand::Rng;

use crate::{seed, Error, Result};

/// Weights and biases of a dense network.
///
/// `weights[i]` is stored row-major with shape `(layer_dims[i+1], layer_dims[i])`
/// and `biases[i]` has length `layer_dims[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layer_dims: Vec<usize>,
    pub(crate) weights: Vec<Vec<f32>>,
    pub(crate) biases: Vec<Vec<f32>>,
}

/// Gradient set with the same layout as [`ModelParams`].
pub type Gradients = ModelParams;

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 3 {
        return Err(Error::InvalidArchitecture(format!(
            "need input, at least one hidden layer and output, got {:?}",
            layer_dims
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::InvalidArchitecture(format!(
            "layer widths must be positive, got {:?}",
            layer_dims
        )));
    }
    if *layer_dims.last().unwrap() != 1 {
        return Err(Error::InvalidArchitecture(format!(
            "binary classifier needs a single output unit, got {:?}",
            layer_dims
        )));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
pub fn init_model(layer_dims: &[usize], seed: u64) -> Result<ModelParams> {
    check_dims(layer_dims)?;
    let mut rng = seed::rng(seed);
    let mut weights = Vec::with_capacity(layer_dims.len() - 1);
    let mut biases = Vec::with_capacity(layer_dims.len() - 1);
    for pair in layer_dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = (0..fan_in * fan_out)
            .map(|_| rng.gen_range(-limit..limit) as f32)
            .collect();
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(ModelParams {
        layer_dims: layer_dims.to_vec(),
        weights,
        biases,
    })
}

impl ModelParams {
    /// Build from explicit tensors, validating every shape.
    pub fn from_parts(
        layer_dims: Vec<usize>,
        weights: Vec<Vec<f32>>,
        biases: Vec<Vec<f32>>,
    ) -> Result<Self> {
        check_dims(&layer_dims)?;
        let layers = layer_dims.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::Shape(format!(
                "expected {layers} weight and bias tensors, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        for i in 0..layers {
            let (fan_in, fan_out) = (layer_dims[i], layer_dims[i + 1]);
            if weights[i].len() != fan_in * fan_out {
                return Err(Error::Shape(format!(
                    "layer {i} weights: expected {} values, got {}",
                    fan_in * fan_out,
                    weights[i].len()
                )));
            }
            if biases[i].len() != fan_out {
                return Err(Error::Shape(format!(
                    "layer {i} biases: expected {fan_out} values, got {}",
                    biases[i].len()
                )));
            }
        }
        Ok(Self {
            layer_dims,
            weights,
            biases,
        })
    }

    /// All-zero tensors for the given architecture.
    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        check_dims(layer_dims)?;
        let weights = layer_dims.windows(2).map(|p| vec![0.0; p[0] * p[1]]).collect();
        let biases = layer_dims.windows(2).map(|p| vec![0.0; p[1]]).collect();
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_width(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn weights(&self, layer: usize) -> &[f32] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[f32] {
        &self.biases[layer]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f32] {
        &mut self.weights[layer]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f32] {
        &mut self.biases[layer]
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_compatible(&self, other: &ModelParams) -> bool {
        self.layer_dims == other.layer_dims
    }

    pub fn ensure_compatible(&self, other: &ModelParams) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "layer dims {:?} vs {:?}",
                self.layer_dims, other.layer_dims
            )))
        }
    }

    /// Iterate every tensor in canonical order: weights then biases, per layer.
    pub fn tensors(&self) -> impl Iterator<Item = &[f32]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<f32>> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
    }

    /// Flattened copy in canonical order.
    pub fn to_flat(&self) -> Vec<f32> {
        self.tensors().flatten().copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().flatten().all(|v| v.is_finite())
    }

    /// Euclidean norm over every entry, accumulated in `f64`.
    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .flatten()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// `self -= rate * grad`, elementwise.
    pub(crate) fn apply_step(&mut self, grad: &Gradients, rate: f32) {
        for (p, g) in self.tensors_mut().zip(grad.tensors()) {
            for (pv, gv) in p.iter_mut().zip(g) {
                *pv -= rate * gv;
            }
        }
    }
}
