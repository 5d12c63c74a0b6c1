//! Evaluation of probabilistic regressors: accuracy, likelihood,
//! calibration, error-retention curves, OOD detection, and timing.
//!
//! Every model family is wrapped in a [`Predictive`] so the metrics treat
//! them uniformly: evidential heads yield Student-t predictives, Gaussian
//! baselines a normal with an aleatoric/epistemic split, and ensembles an
//! explicit mixture (scored exactly via log-sum-exp; intervals and entropy
//! use its moment-matched Gaussian).

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::GaussianPrediction;
use crate::dist::{normal_central_interval, normal_entropy, normal_ln_pdf};
use crate::error::{Error, Result};
use crate::net::GaussianOutput;
use crate::nig::EvidentialParams;
use crate::special::log_sum_exp;

/// One scalar predictive distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictive {
    /// A full NIG belief; scoring uses its Student-t marginal.
    Evidential(EvidentialParams<f64>),
    /// A Gaussian with its variance already split into parts.
    Gaussian {
        mean: f64,
        aleatoric: f64,
        epistemic: f64,
    },
    /// A uniform mixture of `(mean, variance)` Gaussian components, e.g.
    /// one per ensemble member.
    Mixture(Vec<(f64, f64)>),
}

impl From<EvidentialParams<f64>> for Predictive {
    fn from(p: EvidentialParams<f64>) -> Self {
        Predictive::Evidential(p)
    }
}

impl From<GaussianPrediction> for Predictive {
    fn from(p: GaussianPrediction) -> Self {
        Predictive::Gaussian {
            mean: p.mean,
            aleatoric: p.aleatoric,
            epistemic: p.epistemic,
        }
    }
}

impl Predictive {
    /// Builds a mixture from one Gaussian output per ensemble member.
    pub fn from_components(components: &[GaussianOutput]) -> Self {
        Predictive::Mixture(components.iter().map(|g| (g.mean, g.var)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Predictive::Evidential(p) => p.validate(),
            Predictive::Gaussian {
                mean,
                aleatoric,
                epistemic,
            } => {
                if !mean.is_finite()
                    || !aleatoric.is_finite()
                    || !epistemic.is_finite()
                    || *aleatoric < 0.0
                    || *epistemic < 0.0
                    || aleatoric + epistemic <= 0.0
                {
                    return Err(Error::Domain(format!(
                        "invalid gaussian predictive: mean {mean}, aleatoric \
                         {aleatoric}, epistemic {epistemic}"
                    )));
                }
                Ok(())
            }
            Predictive::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::Empty("mixture components"));
                }
                for &(m, v) in parts {
                    if !m.is_finite() || !v.is_finite() || v <= 0.0 {
                        return Err(Error::Domain(format!(
                            "invalid mixture component: mean {m}, variance {v}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Point prediction: the predictive mean.
    pub fn mean(&self) -> f64 {
        match self {
            Predictive::Evidential(p) => p.gamma,
            Predictive::Gaussian { mean, .. } => *mean,
            Predictive::Mixture(parts) => {
                parts.iter().map(|&(m, _)| m).sum::<f64>() / parts.len() as f64
            }
        }
    }

    /// Expected observation noise.
    pub fn aleatoric(&self) -> f64 {
        match self {
            Predictive::Evidential(p) => p.beta / (p.alpha - 1.0),
            Predictive::Gaussian { aleatoric, .. } => *aleatoric,
            Predictive::Mixture(parts) => {
                parts.iter().map(|&(_, v)| v).sum::<f64>() / parts.len() as f64
            }
        }
    }

    /// Model uncertainty about the mean. For a mixture this is the
    /// population variance of the component means, matching the ensemble
    /// decomposition.
    pub fn epistemic(&self) -> f64 {
        match self {
            Predictive::Evidential(p) => p.beta / (p.nu * (p.alpha - 1.0)),
            Predictive::Gaussian { epistemic, .. } => *epistemic,
            Predictive::Mixture(parts) => {
                let k = parts.len() as f64;
                let mean = parts.iter().map(|&(m, _)| m).sum::<f64>() / k;
                parts.iter().map(|&(m, _)| (m - mean).powi(2)).sum::<f64>() / k
            }
        }
    }

    pub fn total_variance(&self) -> f64 {
        self.aleatoric() + self.epistemic()
    }

    /// Differential entropy of the predictive. Evidential predictives use
    /// the exact Student-t entropy; Gaussians the exact normal entropy; a
    /// mixture uses its moment-matched Gaussian.
    pub fn entropy(&self) -> Result<f64> {
        self.validate()?;
        match self {
            Predictive::Evidential(p) => p.predictive_entropy(),
            _ => Ok(normal_entropy(self.total_variance())),
        }
    }

    /// Negative log predictive density of `y`. Exact for every variant; a
    /// mixture is scored by log-sum-exp over its components.
    pub fn nll(&self, y: f64) -> Result<f64> {
        self.validate()?;
        if !y.is_finite() {
            return Err(Error::Domain(format!("nll needs a finite target, got {y}")));
        }
        match self {
            Predictive::Evidential(p) => Ok(-p.ln_evidence(y)?),
            Predictive::Gaussian { mean, .. } => {
                Ok(-normal_ln_pdf(y, *mean, self.total_variance()))
            }
            Predictive::Mixture(parts) => {
                let logs: Vec<f64> = parts
                    .iter()
                    .map(|&(m, v)| normal_ln_pdf(y, m, v))
                    .collect();
                Ok(-(log_sum_exp(&logs) - (parts.len() as f64).ln()))
            }
        }
    }

    /// Central interval containing `level` predictive mass. Exact for
    /// evidential (Student-t) and Gaussian variants; a mixture uses its
    /// moment-matched Gaussian.
    pub fn central_interval(&self, level: f64) -> Result<(f64, f64)> {
        self.validate()?;
        match self {
            Predictive::Evidential(p) => p.predictive()?.central_interval(level),
            _ => normal_central_interval(level, self.mean(), self.total_variance()),
        }
    }
}

fn check_inputs(preds: &[Predictive], y: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    if preds.len() != y.len() {
        return Err(Error::Shape {
            context: "evaluation targets",
            expected: preds.len(),
            got: y.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite evaluation target at row {i}"
        )));
    }
    for (i, p) in preds.iter().enumerate() {
        p.validate()
            .map_err(|e| Error::Domain(format!("prediction {i}: {e}")))?;
    }
    Ok(())
}

/// Root-mean-squared error of the predictive means.
pub fn rmse(preds: &[Predictive], y: &[f64]) -> Result<f64> {
    check_inputs(preds, y)?;
    let mse = preds
        .iter()
        .zip(y)
        .map(|(p, &t)| (p.mean() - t).powi(2))
        .sum::<f64>()
        / y.len() as f64;
    Ok(mse.sqrt())
}

/// Mean negative log predictive density.
pub fn predictive_nll(preds: &[Predictive], y: &[f64]) -> Result<f64> {
    check_inputs(preds, y)?;
    let mut sum = 0.0;
    for (p, &t) in preds.iter().zip(y) {
        sum += p.nll(t)?;
    }
    Ok(sum / y.len() as f64)
}

/// Observed-versus-nominal coverage of central predictive intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationReport {
    /// Nominal central-interval masses.
    pub levels: Vec<f64>,
    /// Fraction of targets inside the corresponding interval.
    pub observed: Vec<f64>,
    /// Mean absolute nominal-observed gap: the calibration error.
    pub mean_abs_error: f64,
}

impl CalibrationReport {
    /// Two-column CSV (`level,observed`) for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,observed\n");
        for (l, o) in self.levels.iter().zip(&self.observed) {
            out.push_str(&format!("{l},{o}\n"));
        }
        out
    }
}

/// The default nominal levels: 0.05, 0.10, ..., 0.95.
pub fn default_calibration_levels() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Measures coverage of central intervals at the given nominal levels.
pub fn calibration_curve(
    preds: &[Predictive],
    y: &[f64],
    levels: &[f64],
) -> Result<CalibrationReport> {
    check_inputs(preds, y)?;
    if levels.is_empty() {
        return Err(Error::Empty("calibration levels"));
    }
    if levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::Config(
            "calibration levels must lie strictly between 0 and 1".into(),
        ));
    }
    let mut observed = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut inside = 0usize;
        for (p, &t) in preds.iter().zip(y) {
            let (lo, hi) = p.central_interval(level)?;
            if t >= lo && t <= hi {
                inside += 1;
            }
        }
        observed.push(inside as f64 / y.len() as f64);
    }
    let mean_abs_error = levels
        .iter()
        .zip(&observed)
        .map(|(l, o)| (l - o).abs())
        .sum::<f64>()
        / levels.len() as f64;
    Ok(CalibrationReport {
        levels: levels.to_vec(),
        observed,
        mean_abs_error,
    })
}

/// RMSE over the most-confident predictions as the least-confident are
/// progressively dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffCurve {
    /// Percentage of the least-confident predictions removed.
    pub percentiles: Vec<f64>,
    /// How many predictions remained.
    pub kept: Vec<usize>,
    /// RMSE over the kept predictions.
    pub rmse: Vec<f64>,
}

impl CutoffCurve {
    /// Three-column CSV (`cutoff,kept,rmse`) for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cutoff,kept,rmse\n");
        for ((p, k), r) in self.percentiles.iter().zip(&self.kept).zip(&self.rmse) {
            out.push_str(&format!("{p},{k},{r}\n"));
        }
        out
    }
}

/// The default cutoff grid: 0%, 5%, ..., 95% removed.
pub fn default_cutoff_percentiles() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 5.0).collect()
}

/// Error-retention curve: predictions are ranked by epistemic uncertainty
/// (ties broken by position, so the curve is deterministic) and for each
/// percentile `p` the `ceil(n * (100 - p) / 100)` most confident are kept,
/// never fewer than one.
pub fn cutoff_curve(preds: &[Predictive], y: &[f64], percentiles: &[f64]) -> Result<CutoffCurve> {
    check_inputs(preds, y)?;
    if percentiles.is_empty() {
        return Err(Error::Empty("cutoff percentiles"));
    }
    if percentiles.iter().any(|&p| !(0.0..100.0).contains(&p)) {
        return Err(Error::Config(
            "cutoff percentiles must lie in [0, 100)".into(),
        ));
    }
    let n = preds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        preds[a]
            .epistemic()
            .partial_cmp(&preds[b].epistemic())
            .expect("validated epistemic values compare")
            .then(a.cmp(&b))
    });

    let mut kept_counts = Vec::with_capacity(percentiles.len());
    let mut rmses = Vec::with_capacity(percentiles.len());
    for &p in percentiles {
        let keep = ((n as f64) * (100.0 - p) / 100.0).ceil() as usize;
        let keep = keep.clamp(1, n);
        let mse = order[..keep]
            .iter()
            .map(|&i| (preds[i].mean() - y[i]).powi(2))
            .sum::<f64>()
            / keep as f64;
        kept_counts.push(keep);
        rmses.push(mse.sqrt());
    }
    Ok(CutoffCurve {
        percentiles: percentiles.to_vec(),
        kept: kept_counts,
        rmse: rmses,
    })
}

/// Area under the ROC curve for separating out-of-distribution from
/// in-distribution points by an uncertainty score (higher = more likely
/// OOD), computed as the Mann-Whitney statistic with midranks for ties.
pub fn ood_auc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    if id_scores.is_empty() {
        return Err(Error::Empty("in-distribution scores"));
    }
    if ood_scores.is_empty() {
        return Err(Error::Empty("out-of-distribution scores"));
    }
    if id_scores.iter().chain(ood_scores).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN uncertainty score".into()));
    }

    let mut all: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, false))
        .chain(ood_scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN scores"));

    let mut rank_sum_ood = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Average of the 1-based ranks i+1 ..= j.
        let midrank = (i + 1 + j) as f64 / 2.0;
        for item in &all[i..j] {
            if item.1 {
                rank_sum_ood += midrank;
            }
        }
        i = j;
    }
    let n_ood = ood_scores.len() as f64;
    let n_id = id_scores.len() as f64;
    Ok((rank_sum_ood - n_ood * (n_ood + 1.0) / 2.0) / (n_id * n_ood))
}

/// Median wall time of `repeats` calls to `f`, after one untimed warm-up
/// call. For an even count the upper median is returned.
pub fn time_inference<F: FnMut()>(mut f: F, repeats: usize) -> Result<Duration> {
    if repeats == 0 {
        return Err(Error::Config("timing needs at least one repeat".into()));
    }
    f();
    let mut times: Vec<Duration> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .collect();
    times.sort();
    Ok(times[times.len() / 2])
}

/// Which model family produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Evidential,
    Gaussian,
    Ensemble,
    Dropout,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelKind::Evidential => "evidential",
            ModelKind::Gaussian => "gaussian",
            ModelKind::Ensemble => "ensemble",
            ModelKind::Dropout => "dropout",
        };
        f.write_str(name)
    }
}

/// Everything the evaluation suite measures about one model on one test
/// set. Contains no wall-clock values, so two runs with the same seed
/// serialize byte-identically; timing is reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub schema_version: u32,
    pub model: ModelKind,
    pub rmse: f64,
    pub nll: f64,
    pub calibration: CalibrationReport,
    pub cutoff_curve: CutoffCurve,
    /// Present when an OOD set was evaluated.
    pub ood_auc: Option<f64>,
}

/// Current [`EvalReport::schema_version`].
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Runs the full metric suite over one test set.
pub fn evaluate(
    model: ModelKind,
    preds: &[Predictive],
    y: &[f64],
    ood_auc_value: Option<f64>,
) -> Result<EvalReport> {
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model,
        rmse: rmse(preds, y)?,
        nll: predictive_nll(preds, y)?,
        calibration: calibration_curve(preds, y, &default_calibration_levels())?,
        cutoff_curve: cutoff_curve(preds, y, &default_cutoff_percentiles())?,
        ood_auc: ood_auc_value,
    })
}
