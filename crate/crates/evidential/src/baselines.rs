//! Uncertainty baselines built from Gaussian-head networks: maximum
//! likelihood (aleatoric noise only), deep ensembles, and MC dropout.
//!
//! All three produce [`GaussianPrediction`] values so downstream evaluation
//! treats them uniformly. Ensembles and MC dropout add an epistemic variance
//! on top of the network's learned noise:
//!
//! - an ensemble spreads over `M` independently initialized and trained
//!   members; its epistemic term is the population variance of the member
//!   means (divisor `M`), which makes `aleatoric + epistemic` exactly the
//!   variance of the uniform mixture over members;
//! - MC dropout keeps masks on at prediction time and treats the passes as
//!   i.i.d. draws from the mask distribution, so it uses the unbiased sample
//!   variance (divisor `n - 1`) of the pass means.

use std::f64::consts::PI;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::{train, GaussianOutput, Head, Mlp, MlpConfig, TraceRow, TrainConfig};
use crate::seed::derive_seed;

/// Seed stream offset for ensemble members; streams 0-2 are used inside a
/// single training run (init, shuffle, dropout).
const MEMBER_STREAM_BASE: u64 = 3;

/// A Gaussian predictive distribution with its variance split into noise
/// (aleatoric) and model-uncertainty (epistemic) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrediction {
    pub mean: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
}

impl GaussianPrediction {
    pub fn total_variance(&self) -> f64 {
        self.aleatoric + self.epistemic
    }

    /// Differential entropy of the moment-matched Gaussian
    /// `N(mean, aleatoric + epistemic)`.
    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * PI * self.total_variance()).ln() + 0.5
    }
}

fn require_gaussian_head(config: &MlpConfig, what: &str) -> Result<()> {
    if config.head != Head::Gaussian {
        return Err(Error::Config(format!("{what} requires a gaussian head")));
    }
    Ok(())
}

/// A single Gaussian maximum-likelihood network. Its variance output is the
/// learned observation noise; it has no epistemic term.
#[derive(Debug, Clone)]
pub struct GaussianMle {
    pub mlp: Mlp,
    pub trace: Vec<TraceRow>,
}

/// Trains one Gaussian-head network by NLL minimization.
pub fn train_gaussian_mle(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    config: &MlpConfig,
    train_config: &TrainConfig,
) -> Result<GaussianMle> {
    require_gaussian_head(config, "train_gaussian_mle")?;
    let mut mlp = Mlp::new(config.clone(), train_config.seed)?;
    let trace = train(&mut mlp, x, y, train_config)?;
    Ok(GaussianMle { mlp, trace })
}

impl GaussianMle {
    /// Predictions with `epistemic = 0`, shaped `rows x targets`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Vec<GaussianPrediction>>> {
        let outputs = self.mlp.predict_gaussian(x)?;
        Ok(outputs
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|g| GaussianPrediction {
                        mean: g.mean,
                        aleatoric: g.var,
                        epistemic: 0.0,
                    })
                    .collect()
            })
            .collect())
    }
}

/// A deep ensemble of independently seeded Gaussian-head networks.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<Mlp>,
    pub traces: Vec<Vec<TraceRow>>,
}

/// Trains `members` networks in parallel, each with its own derived seed
/// controlling initialization, shuffling, and dropout. Member order (and
/// therefore every prediction) is deterministic in `train_config.seed`.
pub fn train_ensemble(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    config: &MlpConfig,
    train_config: &TrainConfig,
    members: usize,
) -> Result<Ensemble> {
    require_gaussian_head(config, "train_ensemble")?;
    if members < 2 {
        return Err(Error::Config(format!(
            "an ensemble needs at least 2 members, got {members}"
        )));
    }
    let trained: Vec<(Mlp, Vec<TraceRow>)> = (0..members)
        .into_par_iter()
        .map(|m| {
            let seed = derive_seed(train_config.seed, MEMBER_STREAM_BASE + m as u64);
            let mut mlp = Mlp::new(config.clone(), seed)?;
            let member_config = TrainConfig {
                seed,
                ..train_config.clone()
            };
            let trace = train(&mut mlp, x, y, &member_config)?;
            Ok((mlp, trace))
        })
        .collect::<Result<_>>()?;
    let (members, traces) = trained.into_iter().unzip();
    Ok(Ensemble { members, traces })
}

impl Ensemble {
    /// Combined predictions, shaped `rows x targets`: mean of member means,
    /// mean of member variances as aleatoric, population variance of member
    /// means as epistemic.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Vec<GaussianPrediction>>> {
        let per_member: Vec<Vec<Vec<GaussianOutput>>> = self
            .members
            .iter()
            .map(|m| m.predict_gaussian(x))
            .collect::<Result<_>>()?;
        Ok(combine(&per_member, false))
    }
}

/// One Gaussian-head network trained with dropout, queried stochastically.
#[derive(Debug, Clone)]
pub struct McDropout {
    pub mlp: Mlp,
    pub trace: Vec<TraceRow>,
    /// Stochastic forward passes per prediction.
    pub passes: usize,
}

/// Trains a dropout network for MC-dropout prediction. The config must have
/// `dropout > 0` (otherwise all passes would be identical) and `passes >= 2`
/// so the sample variance over passes is defined.
pub fn train_mc_dropout(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    config: &MlpConfig,
    train_config: &TrainConfig,
    passes: usize,
) -> Result<McDropout> {
    require_gaussian_head(config, "train_mc_dropout")?;
    if config.dropout <= 0.0 {
        return Err(Error::Config(
            "train_mc_dropout requires dropout > 0 in the network config".into(),
        ));
    }
    if passes < 2 {
        return Err(Error::Config(format!(
            "MC dropout needs at least 2 passes, got {passes}"
        )));
    }
    let mut mlp = Mlp::new(config.clone(), train_config.seed)?;
    let trace = train(&mut mlp, x, y, train_config)?;
    Ok(McDropout { mlp, trace, passes })
}

impl McDropout {
    /// Predictions from `passes` mask draws, shaped `rows x targets`. The
    /// seed pins the mask sequence, so results are reproducible.
    pub fn predict(
        &self,
        x: ArrayView2<'_, f64>,
        seed: u64,
    ) -> Result<Vec<Vec<GaussianPrediction>>> {
        let per_pass = self.mlp.mc_dropout_forward(x, self.passes, seed)?;
        Ok(combine(&per_pass, true))
    }
}

/// Reduces `k` stacked Gaussian output grids (`k x rows x targets`) to one
/// prediction grid. `unbiased` selects the `k - 1` divisor for the spread of
/// the means; `false` selects the population divisor `k`.
fn combine(stacks: &[Vec<Vec<GaussianOutput>>], unbiased: bool) -> Vec<Vec<GaussianPrediction>> {
    let k = stacks.len();
    debug_assert!(k >= 2);
    let rows = stacks[0].len();
    let targets = if rows == 0 { 0 } else { stacks[0][0].len() };
    let divisor = if unbiased { (k - 1) as f64 } else { k as f64 };

    (0..rows)
        .map(|i| {
            (0..targets)
                .map(|t| {
                    let mean = stacks.iter().map(|s| s[i][t].mean).sum::<f64>() / k as f64;
                    let aleatoric = stacks.iter().map(|s| s[i][t].var).sum::<f64>() / k as f64;
                    let epistemic = stacks
                        .iter()
                        .map(|s| (s[i][t].mean - mean).powi(2))
                        .sum::<f64>()
                        / divisor;
                    GaussianPrediction {
                        mean,
                        aleatoric,
                        epistemic,
                    }
                })
                .collect()
        })
        .collect()
}
