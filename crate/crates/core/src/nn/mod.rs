//! Dense binary classifier: ReLU hidden layers, sigmoid output, binary
//! cross-entropy loss, plain mini-batch gradient descent.

pub(crate) mod codec;
mod matrix;
mod params;
mod train;

pub use codec::{decode_params, encode_params, MODEL_MAGIC, MODEL_VERSION};
pub use matrix::Matrix;
pub use params::{init_model, Gradients, ModelParams};
pub use train::{
    backward, batch_size_for_steps, bce_loss, forward, mbgd_fit, mbgd_fit_with_batch, Batch,
    TrainConfig, PROB_EPS,
};
