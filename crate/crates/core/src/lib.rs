//! Simulation engine for adaptive federated training of a flow-based DDoS
//! detector.
//!
//! The crate is split along the lines of the pipeline:
//!
//! * [`nn`]: a small dense network trained with mini-batch gradient descent.
//! * [`federation`]: the server loop, client selection, aggregation and the
//!   pluggable orchestration strategies (`flad`, `fedavg`, `flddos`).
//! * [`datagen`]: flow samples, synthetic non-IID dataset generation and the
//!   on-disk dataset format.
//! * [`analysis`]: classification metrics and feature-distribution distances.
//! * [`harness`]: experiment configuration and the scenario drivers used by
//!   the `flad` command-line tool.

pub mod analysis;
pub mod datagen;
mod error;
pub mod federation;
pub mod harness;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
