//! The seeded training loop.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mlp::Mlp;
use super::params::AdamConfig;
use super::Head;
use crate::error::{Error, Result};
use crate::losses::{gaussian_nll, total_loss, LossConfig};
use crate::seed::derive_seed;

/// Everything the training loop needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Evidential loss settings; ignored by gaussian/point heads.
    pub loss: LossConfig<f64>,
    pub adam: AdamConfig,
    /// Number of optimizer steps (not epochs).
    pub iterations: usize,
    pub batch_size: usize,
    /// Master seed for shuffling and dropout; weight init is seeded
    /// separately when the network is built.
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.adam.validate()?;
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            adam: AdamConfig::default(),
            iterations: 5000,
            batch_size: 128,
            seed: 0,
        }
    }
}

/// Per-iteration training record: batch means of the loss and its parts.
/// For gaussian and point heads the regularizer share is zero and the NLL
/// column carries the full objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub mean_loss: f64,
    pub mean_nll: f64,
    pub mean_reg: f64,
}

/// Decomposed mean objective of one batch, from [`loss_and_grad`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchLoss {
    pub mean_loss: f64,
    pub mean_nll: f64,
    pub mean_reg: f64,
    /// Batch-local indices of rows whose loss could not be computed or came
    /// out non-finite. When non-empty, the means above are meaningless and
    /// no gradient was written.
    pub bad_rows: Vec<usize>,
}

/// Scores a batch under the network's head and writes the gradient of the
/// mean objective into the parameter store, replacing any previous gradient.
///
/// The objective is the mean over all `rows x targets` terms: the evidential
/// loss for [`Head::Evidential`], the Gaussian NLL for [`Head::Gaussian`],
/// and squared error / 2 for [`Head::Point`]. Pass `dropout_rng` to sample
/// dropout masks (training mode); `None` runs the deterministic evaluation
/// pass. This is the building block [`train`] applies once per iteration;
/// it is public so that custom training loops and gradient checks can reuse
/// the exact objective.
pub fn loss_and_grad(
    mlp: &mut Mlp,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    loss: &LossConfig<f64>,
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<BatchLoss> {
    loss.validate()?;
    if x.nrows() == 0 {
        return Err(Error::Empty("batch"));
    }
    if x.nrows() != y.nrows() {
        return Err(Error::Shape {
            context: "batch target rows",
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    if y.ncols() != mlp.config().targets {
        return Err(Error::Shape {
            context: "batch target width",
            expected: mlp.config().targets,
            got: y.ncols(),
        });
    }

    let cache = mlp.forward_cached(x, dropout_rng)?;

    // Per-sample losses and raw-output gradients, head-specific.
    let outputs = &cache.outputs;
    let mut d_raw = Array2::<f64>::zeros(outputs.dim());
    let count = (x.nrows() * mlp.config().targets) as f64;
    let scale = 1.0 / count;
    let mut sum_loss = 0.0;
    let mut sum_nll = 0.0;
    let mut sum_reg = 0.0;
    let mut bad_rows: Vec<usize> = Vec::new();

    match mlp.config().head {
        Head::Evidential => {
            for (bi, (raw_row, y_row)) in
                outputs.rows().into_iter().zip(y.rows()).enumerate()
            {
                let params = Mlp::raw_to_evidential(raw_row);
                let mut row_ok = true;
                for (ti, p) in params.iter().enumerate() {
                    // An error here means a head output or the target went
                    // non-finite — the row cannot be scored.
                    let b = match total_loss(y_row[ti], p, loss) {
                        Ok(b) => b,
                        Err(Error::InvalidParams(_)) | Err(Error::Domain(_)) => {
                            row_ok = false;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    if !b.total.is_finite() {
                        row_ok = false;
                        continue;
                    }
                    sum_loss += b.total;
                    sum_nll += b.nll;
                    sum_reg += b.regularizer;
                    // Copy out: the row view's layout depends on how the
                    // matmul chose to store its result.
                    let raw = [
                        raw_row[ti * 4],
                        raw_row[ti * 4 + 1],
                        raw_row[ti * 4 + 2],
                        raw_row[ti * 4 + 3],
                    ];
                    let g = Mlp::evidential_head_grad(&raw, &b.grad);
                    for k in 0..4 {
                        d_raw[(bi, ti * 4 + k)] = g[k] * scale;
                    }
                }
                if !row_ok {
                    bad_rows.push(bi);
                }
            }
        }
        Head::Gaussian => {
            for (bi, (raw_row, y_row)) in
                outputs.rows().into_iter().zip(y.rows()).enumerate()
            {
                let preds = Mlp::raw_to_gaussian(raw_row);
                let mut row_ok = true;
                for (ti, g) in preds.iter().enumerate() {
                    let loss_term = match gaussian_nll(y_row[ti], g.mean, g.var) {
                        Ok(l) => l,
                        Err(Error::Domain(_)) => {
                            row_ok = false;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    if !loss_term.nll.is_finite() {
                        row_ok = false;
                        continue;
                    }
                    sum_loss += loss_term.nll;
                    sum_nll += loss_term.nll;
                    let raw = [raw_row[ti * 2], raw_row[ti * 2 + 1]];
                    let g2 =
                        Mlp::gaussian_head_grad(&raw, loss_term.d_mean, loss_term.d_var);
                    d_raw[(bi, ti * 2)] = g2[0] * scale;
                    d_raw[(bi, ti * 2 + 1)] = g2[1] * scale;
                }
                if !row_ok {
                    bad_rows.push(bi);
                }
            }
        }
        Head::Point => {
            for (bi, (raw_row, y_row)) in
                outputs.rows().into_iter().zip(y.rows()).enumerate()
            {
                let mut row_ok = true;
                for ti in 0..mlp.config().targets {
                    let err = raw_row[ti] - y_row[ti];
                    let loss_term = 0.5 * err * err;
                    if !loss_term.is_finite() {
                        row_ok = false;
                        continue;
                    }
                    sum_loss += loss_term;
                    sum_nll += loss_term;
                    d_raw[(bi, ti)] = err * scale;
                }
                if !row_ok {
                    bad_rows.push(bi);
                }
            }
        }
    }

    mlp.parameters_mut().zero_grads();
    if bad_rows.is_empty() && sum_loss.is_finite() {
        mlp.backward(&cache, d_raw);
    }
    Ok(BatchLoss {
        mean_loss: sum_loss / count,
        mean_nll: sum_nll / count,
        mean_reg: sum_reg / count,
        bad_rows,
    })
}

/// Trains the network in place by minibatch Adam, returning the loss trace.
///
/// Deterministic for a fixed `(network seed, config seed, data)` triple:
/// shuffling and dropout draw from dedicated ChaCha streams. If any
/// per-sample loss turns non-finite the run aborts with the iteration index
/// and the offending dataset rows instead of training on garbage.
pub fn train(
    mlp: &mut Mlp,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    config: &TrainConfig,
) -> Result<Vec<TraceRow>> {
    config.validate()?;
    if x.nrows() == 0 {
        return Err(Error::Empty("training set"));
    }
    if x.nrows() != y.nrows() {
        return Err(Error::Shape {
            context: "training target rows",
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    if y.ncols() != mlp.config().targets {
        return Err(Error::Shape {
            context: "training target width",
            expected: mlp.config().targets,
            got: y.ncols(),
        });
    }

    // Reject non-finite data upfront so any later non-finite loss can only
    // mean the optimization itself diverged.
    for (i, row) in x.outer_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite feature value in dataset row {i}"
            )));
        }
    }
    for (i, row) in y.outer_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite target value in dataset row {i}"
            )));
        }
    }

    let n = x.nrows();
    let batch = config.batch_size.min(n);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2));
    let use_dropout = mlp.config().dropout > 0.0;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut shuffle_rng);
    let mut cursor = 0;

    let mut trace = Vec::with_capacity(config.iterations);
    for iteration in 0..config.iterations {
        if cursor + batch > n {
            order.shuffle(&mut shuffle_rng);
            cursor = 0;
        }
        let rows = &order[cursor..cursor + batch];
        cursor += batch;

        let xb = x.select(Axis(0), rows);
        let yb = y.select(Axis(0), rows);

        let batch_loss = loss_and_grad(
            mlp,
            xb.view(),
            yb.view(),
            &config.loss,
            if use_dropout { Some(&mut dropout_rng) } else { None },
        )?;

        if !batch_loss.bad_rows.is_empty() || !batch_loss.mean_loss.is_finite() {
            // Map batch-local indices back to dataset rows. Data was checked
            // finite upfront, so this can only be optimizer divergence.
            let mut bad: Vec<usize> =
                batch_loss.bad_rows.iter().map(|&bi| rows[bi]).collect();
            bad.sort_unstable();
            return Err(Error::NonFiniteLoss {
                iteration,
                rows: bad,
            });
        }

        mlp.parameters_mut().adam_step(&config.adam)?;

        trace.push(TraceRow {
            iteration,
            mean_loss: batch_loss.mean_loss,
            mean_nll: batch_loss.mean_nll,
            mean_reg: batch_loss.mean_reg,
        });
    }
    Ok(trace)
}
