//! Flat parameter storage with Adam optimizer state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    /// Standard moment decays with the given learning rate.
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid Adam hyperparameters: {self:?}")))
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// All trainable parameters as one flat vector, with gradient accumulators
/// and Adam first/second moments of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore {
    values: Vec<f64>,
    grads: Vec<f64>,
    adam_m: Vec<f64>,
    adam_v: Vec<f64>,
    step: u64,
}

impl ParameterStore {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            grads: vec![0.0; len],
            adam_m: vec![0.0; len],
            adam_v: vec![0.0; len],
            step: 0,
        }
    }

    /// Wraps existing parameter values (checkpoint restore); optimizer state
    /// starts fresh.
    pub fn from_values(values: Vec<f64>) -> Self {
        let len = values.len();
        Self {
            values,
            grads: vec![0.0; len],
            adam_m: vec![0.0; len],
            adam_v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of optimizer steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn grads(&self) -> &[f64] {
        &self.grads
    }

    pub fn grads_mut(&mut self) -> &mut [f64] {
        &mut self.grads
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    /// One Adam update from the accumulated gradients, with bias-corrected
    /// moment estimates; clears the gradients afterwards.
    pub fn adam_step(&mut self, config: &AdamConfig) -> Result<()> {
        config.validate()?;
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - config.beta1.powi(t);
        let bias2 = 1.0 - config.beta2.powi(t);
        for i in 0..self.values.len() {
            let g = self.grads[i];
            self.adam_m[i] = config.beta1 * self.adam_m[i] + (1.0 - config.beta1) * g;
            self.adam_v[i] = config.beta2 * self.adam_v[i] + (1.0 - config.beta2) * g * g;
            let m_hat = self.adam_m[i] / bias1;
            let v_hat = self.adam_v[i] / bias2;
            self.values[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
        self.zero_grads();
        Ok(())
    }
}
