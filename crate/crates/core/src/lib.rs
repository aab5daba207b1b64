//! Salience-affected neural network: a small feedforward classifier whose
//! nodes carry a salience scalar written by one-time tagging and read back
//! as a salience response during inference, together with the autoencoder
//! front-end, the silhouette dataset, and the experiment harness that
//! exercises the whole pipeline.

pub mod dataset;
pub mod encoder;
pub mod error;
pub mod experiments;
pub mod network;
pub mod numerics;
pub mod salience;

pub use error::{Error, Result};
pub use network::{ActivationMode, Network, Prediction, TrainConfig};
pub use salience::{SalienceConfig, SalienceResponse};
