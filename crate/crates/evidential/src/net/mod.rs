//! A small reverse-mode MLP, just enough machinery to train evidential and
//! Gaussian heads: batched forward/backward over `ndarray`, inverted
//! dropout, Adam, a deterministic seeded training loop with non-finite-loss
//! diagnostics, and JSON checkpoints that round-trip weights bit-exactly.

mod checkpoint;
mod mlp;
mod params;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mlp::{GaussianOutput, Mlp, HEAD_FLOOR};
pub use params::{AdamConfig, ParameterStore};
pub use train::{loss_and_grad, train, BatchLoss, TraceRow, TrainConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

/// Output head determining what the final linear layer parameterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Four NIG hyperparameters per target: `(gamma, nu, alpha, beta)` with
    /// softplus transforms keeping `nu, beta > 0` and `alpha > 1`.
    Evidential,
    /// Mean and softplus-positive variance per target.
    Gaussian,
    /// Bare point estimate per target.
    Point,
}

impl Head {
    /// Raw network outputs consumed per target.
    pub fn outputs_per_target(self) -> usize {
        match self {
            Head::Evidential => 4,
            Head::Gaussian => 2,
            Head::Point => 1,
        }
    }
}

/// Architecture of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    /// Hidden layer widths; empty means a single linear layer.
    pub hidden: Vec<usize>,
    /// Number of regression targets.
    pub targets: usize,
    pub head: Head,
    pub activation: Activation,
    /// Dropout probability on hidden activations; 0 disables dropout.
    pub dropout: f64,
}

impl MlpConfig {
    /// Evidential head, tanh activations, no dropout; the configuration used
    /// by the 1-D experiments.
    pub fn evidential(input_dim: usize, hidden: Vec<usize>) -> Self {
        Self {
            input_dim,
            hidden,
            targets: 1,
            head: Head::Evidential,
            activation: Activation::Tanh,
            dropout: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be >= 1".into()));
        }
        if self.targets == 0 {
            return Err(Error::Config("targets must be >= 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be >= 1".into()));
        }
        if !(self.dropout >= 0.0 && self.dropout < 1.0) {
            return Err(Error::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Width of the raw output layer.
    pub fn output_dim(&self) -> usize {
        self.targets * self.head.outputs_per_target()
    }
}
