//! The MLP itself: batched forward/backward passes and the output heads.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Activation, Head, MlpConfig};
use crate::error::{Error, Result};
use crate::losses::ParamGrad;
use crate::nig::EvidentialParams;
use crate::seed::derive_seed;
use crate::special::{sigmoid, softplus};

use super::params::ParameterStore;

/// Floor applied to softplus head outputs. Keeps `nu`, `beta`, and
/// `alpha - 1` strictly positive for *any* weights, including pathological
/// ones that drive the raw outputs to -inf, so head outputs always satisfy
/// the NIG domain constraints. Far above float underflow, far below any
/// value reachable in normal training.
pub const HEAD_FLOOR: f64 = 1e-6;

/// Mean/variance pair produced by the Gaussian head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOutput {
    pub mean: f64,
    pub var: f64,
}

/// Offsets of one linear layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy)]
struct LayerShape {
    in_dim: usize,
    out_dim: usize,
    weight_offset: usize,
    bias_offset: usize,
}

/// Multilayer perceptron over a flat [`ParameterStore`].
#[derive(Debug, Clone)]
pub struct Mlp {
    config: MlpConfig,
    layers: Vec<LayerShape>,
    store: ParameterStore,
}

/// Cached intermediate state of one forward pass, consumed by `backward`.
pub(super) struct ForwardCache {
    /// Input plus post-dropout activation of every hidden layer.
    inputs: Vec<Array2<f64>>,
    /// Pre-dropout activations of hidden layers (for the derivative).
    activations: Vec<Array2<f64>>,
    /// Inverted-dropout factors (0 or 1/(1-p)) per hidden layer, if any.
    masks: Vec<Option<Array2<f64>>>,
    /// Raw linear outputs of the final layer.
    pub outputs: Array2<f64>,
}

impl Mlp {
    /// Builds a network with seeded uniform fan-in initialization
    /// (`U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`) and zero biases.
    pub fn new(config: MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut dims = vec![config.input_dim];
        dims.extend_from_slice(&config.hidden);
        dims.push(config.output_dim());

        let mut layers = Vec::with_capacity(dims.len() - 1);
        let mut offset = 0;
        for w in dims.windows(2) {
            let (in_dim, out_dim) = (w[0], w[1]);
            layers.push(LayerShape {
                in_dim,
                out_dim,
                weight_offset: offset,
                bias_offset: offset + in_dim * out_dim,
            });
            offset += in_dim * out_dim + out_dim;
        }

        let mut store = ParameterStore::zeros(offset);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        for layer in &layers {
            let limit = (6.0 / layer.in_dim as f64).sqrt();
            let weights = &mut store.values_mut()
                [layer.weight_offset..layer.weight_offset + layer.in_dim * layer.out_dim];
            for w in weights {
                *w = rng.random_range(-limit..limit);
            }
            // Biases stay zero.
        }

        Ok(Self {
            config,
            layers,
            store,
        })
    }

    /// Rebuilds a network around existing parameter values (checkpoints).
    pub fn from_parameters(config: MlpConfig, values: Vec<f64>) -> Result<Self> {
        let template = Self::new(config, 0)?;
        if values.len() != template.store.len() {
            return Err(Error::Shape {
                context: "checkpoint parameter count",
                expected: template.store.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            store: ParameterStore::from_values(values),
            ..template
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn parameters(&self) -> &ParameterStore {
        &self.store
    }

    pub fn parameters_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn weights(&self, layer: &LayerShape) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape(
            (layer.out_dim, layer.in_dim),
            &self.store.values()[layer.weight_offset..layer.bias_offset],
        )
        .expect("layer weight slice matches its shape")
    }

    fn biases(&self, layer: &LayerShape) -> ArrayView1<'_, f64> {
        ArrayView1::from(
            &self.store.values()[layer.bias_offset..layer.bias_offset + layer.out_dim],
        )
    }

    fn check_input_width(&self, got: usize) -> Result<()> {
        if got == self.config.input_dim {
            Ok(())
        } else {
            Err(Error::Shape {
                context: "network input width",
                expected: self.config.input_dim,
                got,
            })
        }
    }

    /// Forward pass keeping every intermediate needed for backprop.
    /// `dropout_rng` enables inverted dropout on hidden activations.
    pub(super) fn forward_cached(
        &self,
        x: ArrayView2<'_, f64>,
        mut dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<ForwardCache> {
        self.check_input_width(x.ncols())?;
        let n = x.nrows();
        let hidden_count = self.layers.len() - 1;

        let mut inputs = Vec::with_capacity(hidden_count + 1);
        let mut activations = Vec::with_capacity(hidden_count);
        let mut masks = Vec::with_capacity(hidden_count);
        inputs.push(x.to_owned());

        for (li, layer) in self.layers.iter().enumerate() {
            let current = inputs.last().expect("at least the input is present");
            let mut z = current.dot(&self.weights(layer).t());
            z += &self.biases(layer);
            if li == hidden_count {
                // Output layer stays linear; heads transform it later.
                return Ok(ForwardCache {
                    inputs,
                    activations,
                    masks,
                    outputs: z,
                });
            }
            let a = match self.config.activation {
                Activation::Relu => z.mapv(|v| v.max(0.0)),
                Activation::Tanh => z.mapv(f64::tanh),
            };
            let p = self.config.dropout;
            let (mask, dropped) = match dropout_rng.as_deref_mut() {
                Some(rng) if p > 0.0 => {
                    let keep_scale = 1.0 / (1.0 - p);
                    let mask = Array2::from_shape_simple_fn((n, layer.out_dim), || {
                        if rng.random::<f64>() < p {
                            0.0
                        } else {
                            keep_scale
                        }
                    });
                    let dropped = &a * &mask;
                    (Some(mask), dropped)
                }
                _ => (None, a.clone()),
            };
            activations.push(a);
            masks.push(mask);
            inputs.push(dropped);
        }
        unreachable!("loop returns at the output layer");
    }

    /// Raw (head-untransformed) outputs in evaluation mode, dropout off.
    pub fn forward_raw(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x, None)?.outputs)
    }

    /// Backpropagates `d_outputs` (gradient of the objective with respect to
    /// the raw outputs) through the cached pass, accumulating parameter
    /// gradients into the store.
    pub(super) fn backward(&mut self, cache: &ForwardCache, d_outputs: Array2<f64>) {
        let mut d_z = d_outputs;
        for li in (0..self.layers.len()).rev() {
            let layer = self.layers[li];
            // Parameter gradients for this layer.
            let d_w = d_z.t().dot(&cache.inputs[li]);
            let d_b = d_z.sum_axis(ndarray::Axis(0));
            {
                let grads = self.store.grads_mut();
                let w_grads = &mut grads
                    [layer.weight_offset..layer.weight_offset + layer.in_dim * layer.out_dim];
                for (g, &d) in w_grads.iter_mut().zip(d_w.iter()) {
                    *g += d;
                }
                let b_grads =
                    &mut grads[layer.bias_offset..layer.bias_offset + layer.out_dim];
                for (g, &d) in b_grads.iter_mut().zip(d_b.iter()) {
                    *g += d;
                }
            }
            if li == 0 {
                break;
            }
            // Gradient into the previous layer's post-dropout activation.
            let mut d_h = d_z.dot(&self.weights(&layer));
            let prev = li - 1;
            if let Some(mask) = &cache.masks[prev] {
                d_h *= mask;
            }
            // Through the activation, using the cached pre-dropout value.
            let a = &cache.activations[prev];
            match self.config.activation {
                Activation::Relu => {
                    ndarray::Zip::from(&mut d_h).and(a).for_each(|d, &av| {
                        if av <= 0.0 {
                            *d = 0.0;
                        }
                    });
                }
                Activation::Tanh => {
                    ndarray::Zip::from(&mut d_h).and(a).for_each(|d, &av| {
                        *d *= 1.0 - av * av;
                    });
                }
            }
            d_z = d_h;
        }
    }

    /// Applies the evidential head to one raw output row.
    pub fn raw_to_evidential(raw: ArrayView1<'_, f64>) -> Vec<EvidentialParams<f64>> {
        raw.exact_chunks(4)
            .into_iter()
            .map(|chunk| EvidentialParams {
                gamma: chunk[0],
                nu: softplus(chunk[1]).max(HEAD_FLOOR),
                alpha: 1.0 + softplus(chunk[2]).max(HEAD_FLOOR),
                beta: softplus(chunk[3]).max(HEAD_FLOOR),
            })
            .collect()
    }

    /// Chain rule through the evidential head: converts a gradient in NIG
    /// parameter space into a gradient on the four raw outputs.
    pub(super) fn evidential_head_grad(raw: &[f64], grad: &ParamGrad<f64>) -> [f64; 4] {
        let gate = |raw_v: f64| {
            // Zero slope in the floored region, softplus slope elsewhere.
            if softplus(raw_v) > HEAD_FLOOR {
                sigmoid(raw_v)
            } else {
                0.0
            }
        };
        [
            grad.gamma,
            grad.nu * gate(raw[1]),
            grad.alpha * gate(raw[2]),
            grad.beta * gate(raw[3]),
        ]
    }

    /// Applies the Gaussian head to one raw output row.
    pub fn raw_to_gaussian(raw: ArrayView1<'_, f64>) -> Vec<GaussianOutput> {
        raw.exact_chunks(2)
            .into_iter()
            .map(|chunk| GaussianOutput {
                mean: chunk[0],
                var: softplus(chunk[1]).max(HEAD_FLOOR),
            })
            .collect()
    }

    pub(super) fn gaussian_head_grad(raw: &[f64], d_mean: f64, d_var: f64) -> [f64; 2] {
        let gate = if softplus(raw[1]) > HEAD_FLOOR {
            sigmoid(raw[1])
        } else {
            0.0
        };
        [d_mean, d_var * gate]
    }

    /// Evidential predictions for a batch, one parameter set per target.
    pub fn predict_evidential(
        &self,
        x: ArrayView2<'_, f64>,
    ) -> Result<Vec<Vec<EvidentialParams<f64>>>> {
        if self.config.head != Head::Evidential {
            return Err(Error::Config(
                "predict_evidential requires an evidential head".into(),
            ));
        }
        let raw = self.forward_raw(x)?;
        Ok(raw
            .rows()
            .into_iter()
            .map(|row| Self::raw_to_evidential(row))
            .collect())
    }

    /// Gaussian predictions for a batch.
    pub fn predict_gaussian(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Vec<GaussianOutput>>> {
        if self.config.head != Head::Gaussian {
            return Err(Error::Config(
                "predict_gaussian requires a gaussian head".into(),
            ));
        }
        let raw = self.forward_raw(x)?;
        Ok(raw
            .rows()
            .into_iter()
            .map(|row| Self::raw_to_gaussian(row))
            .collect())
    }

    /// Point predictions for a batch.
    pub fn predict_point(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if self.config.head != Head::Point {
            return Err(Error::Config("predict_point requires a point head".into()));
        }
        self.forward_raw(x)
    }

    /// `n` stochastic forward passes with dropout masks kept on, yielding
    /// one Gaussian output set per pass. The seed pins the mask sequence.
    pub fn mc_dropout_forward(
        &self,
        x: ArrayView2<'_, f64>,
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<Vec<GaussianOutput>>>> {
        if self.config.head != Head::Gaussian {
            return Err(Error::Config(
                "mc_dropout_forward requires a gaussian head".into(),
            ));
        }
        if self.config.dropout <= 0.0 {
            return Err(Error::Config(
                "mc_dropout_forward requires dropout > 0 in the network config".into(),
            ));
        }
        if n == 0 {
            return Err(Error::Config("mc_dropout_forward needs n >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let cache = self.forward_cached(x, Some(&mut rng))?;
                Ok(cache
                    .outputs
                    .rows()
                    .into_iter()
                    .map(|row| Self::raw_to_gaussian(row))
                    .collect())
            })
            .collect()
    }
}
