//! Datasets: synthetic generators with retained ground truth, CSV ingest,
//! train-statistics normalization, and repeated benchmark splits.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::baselines::GaussianPrediction;
use crate::error::{Error, Result};
use crate::nig::EvidentialParams;
use crate::seed::derive_seed;

/// A regression dataset. Synthetic generators also keep the noiseless
/// targets and the true per-row noise variance for diagnostics.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub targets: Array2<f64>,
    /// Noiseless target values, when known.
    pub truth: Option<Array2<f64>>,
    /// True observation-noise variance per row, when known.
    pub noise_variance: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if features.nrows() != targets.nrows() {
            return Err(Error::Shape {
                context: "dataset target rows",
                expected: features.nrows(),
                got: targets.nrows(),
            });
        }
        Ok(Self {
            features,
            targets,
            truth: None,
            noise_variance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.targets.ncols()
    }

    /// The given rows as a new dataset, carrying truth columns along.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::Shape {
                context: "dataset row selection",
                expected: self.len(),
                got: bad,
            });
        }
        Ok(Self {
            features: self.features.select(Axis(0), rows),
            targets: self.targets.select(Axis(0), rows),
            truth: self.truth.as_ref().map(|t| t.select(Axis(0), rows)),
            noise_variance: self
                .noise_variance
                .as_ref()
                .map(|v| rows.iter().map(|&r| v[r]).collect()),
        })
    }
}

/// How a scalar noise magnitude is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseInterpretation {
    /// The magnitude is the noise variance sigma^2.
    Variance,
    /// The magnitude is the standard deviation sigma.
    StdDev,
}

impl NoiseInterpretation {
    fn to_variance(self, magnitude: f64) -> f64 {
        match self {
            NoiseInterpretation::Variance => magnitude,
            NoiseInterpretation::StdDev => magnitude * magnitude,
        }
    }
}

/// The cubic toy problem: `y = x^3 + eps` with training inputs drawn
/// uniformly from `|x| <= train_range` and a test grid spanning the wider
/// `[-test_range, test_range]`, so the grid's flanks are out of
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub train_range: f64,
    pub test_range: f64,
    /// Noise magnitude, read per `interpretation` (default: variance 3).
    pub noise: f64,
    pub interpretation: NoiseInterpretation,
    pub seed: u64,
}

impl Default for CubicConfig {
    fn default() -> Self {
        Self {
            n_train: 1024,
            n_test: 600,
            train_range: 4.0,
            test_range: 6.0,
            noise: 3.0,
            interpretation: NoiseInterpretation::Variance,
            seed: 0,
        }
    }
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!("{what} must be positive, got {value}")));
    }
    Ok(())
}

/// Generates `(train, test)` cubic datasets. Both parts carry noisy targets
/// (so test NLL is meaningful) plus the noiseless truth.
pub fn gen_cubic(config: &CubicConfig) -> Result<(Dataset, Dataset)> {
    if config.n_train == 0 || config.n_test < 2 {
        return Err(Error::Config(
            "cubic data needs n_train >= 1 and n_test >= 2".into(),
        ));
    }
    check_positive(config.train_range, "train_range")?;
    check_positive(config.test_range, "test_range")?;
    if config.test_range < config.train_range {
        return Err(Error::Config(format!(
            "test_range {} must cover train_range {}",
            config.test_range, config.train_range
        )));
    }
    check_positive(config.noise, "noise")?;
    let variance = config.interpretation.to_variance(config.noise);
    let noise = Normal::new(0.0, variance.sqrt()).expect("finite positive sd");

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 8));
    let r = config.train_range;
    let train_x: Vec<f64> = (0..config.n_train)
        .map(|_| rng.random_range(-r..r))
        .collect();
    let test_x: Vec<f64> = (0..config.n_test)
        .map(|i| {
            let t = i as f64 / (config.n_test - 1) as f64;
            -config.test_range + 2.0 * config.test_range * t
        })
        .collect();

    let build = |xs: &[f64], rng: &mut ChaCha8Rng| {
        let n = xs.len();
        let features = Array2::from_shape_vec((n, 1), xs.to_vec()).expect("n x 1");
        let clean: Vec<f64> = xs.iter().map(|&x| x * x * x).collect();
        let noisy: Vec<f64> = clean.iter().map(|&c| c + noise.sample(rng)).collect();
        Dataset {
            features,
            targets: Array2::from_shape_vec((n, 1), noisy).expect("n x 1"),
            truth: Some(Array2::from_shape_vec((n, 1), clean).expect("n x 1")),
            noise_variance: Some(vec![variance; n]),
        }
    };
    let train = build(&train_x, &mut rng);
    let test = build(&test_x, &mut rng);
    Ok((train, test))
}

/// Rows of a cubic test set lying outside the training input range.
pub fn cubic_ood_mask(test: &Dataset, train_range: f64) -> Vec<bool> {
    test.features
        .column(0)
        .iter()
        .map(|&x| x.abs() > train_range)
        .collect()
}

/// A zero-mean heteroscedastic problem: `y ~ N(0, sd(x)^2)` with
/// `sd(x) = 1 + 8 exp(-x^2 / 2)`, the noise peaking sharply at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroscedasticConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub range: f64,
    pub seed: u64,
}

impl Default for HeteroscedasticConfig {
    fn default() -> Self {
        Self {
            n_train: 2048,
            n_test: 400,
            range: 4.0,
            seed: 0,
        }
    }
}

/// The true noise standard deviation of the heteroscedastic problem.
pub fn heteroscedastic_sd(x: f64) -> f64 {
    1.0 + 8.0 * (-x * x / 2.0).exp()
}

/// Generates `(train, test)` heteroscedastic datasets; train inputs are
/// uniform in `[-range, range]`, test inputs an even grid over the same.
pub fn gen_heteroscedastic(config: &HeteroscedasticConfig) -> Result<(Dataset, Dataset)> {
    if config.n_train == 0 || config.n_test < 2 {
        return Err(Error::Config(
            "heteroscedastic data needs n_train >= 1 and n_test >= 2".into(),
        ));
    }
    check_positive(config.range, "range")?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 9));
    let r = config.range;
    let train_x: Vec<f64> = (0..config.n_train)
        .map(|_| rng.random_range(-r..r))
        .collect();
    let test_x: Vec<f64> = (0..config.n_test)
        .map(|i| -r + 2.0 * r * (i as f64 / (config.n_test - 1) as f64))
        .collect();

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let build = |xs: &[f64], rng: &mut ChaCha8Rng| {
        let n = xs.len();
        let variances: Vec<f64> = xs.iter().map(|&x| heteroscedastic_sd(x).powi(2)).collect();
        let noisy: Vec<f64> = variances
            .iter()
            .map(|&v| v.sqrt() * unit.sample(rng))
            .collect();
        Dataset {
            features: Array2::from_shape_vec((n, 1), xs.to_vec()).expect("n x 1"),
            targets: Array2::from_shape_vec((n, 1), noisy).expect("n x 1"),
            truth: Some(Array2::zeros((n, 1))),
            noise_variance: Some(variances),
        }
    };
    let train = build(&train_x, &mut rng);
    let test = build(&test_x, &mut rng);
    Ok((train, test))
}

/// Loads a numeric CSV where the last column is the regression target and
/// every other column is a feature. A header row is detected by its first
/// line failing to parse as numbers. Errors name the file, 1-based line,
/// and 1-based column.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (index, record) in reader.records().enumerate() {
        let line = index + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            row: line,
            column: 0,
            message: e.to_string(),
        })?;
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let mut values = Vec::with_capacity(record.len());
        let mut failed_at = None;
        for (ci, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    failed_at = Some(ci + 1);
                    break;
                }
            }
        }
        if let Some(column) = failed_at {
            // The first line may be a header; anything later is bad data.
            if index == 0 {
                continue;
            }
            return Err(Error::Parse {
                path: path.display().to_string(),
                row: line,
                column,
                message: format!(
                    "field {:?} is not a finite number",
                    &record[column - 1]
                ),
            });
        }
        if rows.is_empty() {
            width = values.len();
        } else if values.len() != width {
            return Err(Error::Parse {
                path: path.display().to_string(),
                row: line,
                column: 0,
                message: format!("expected {width} fields, found {}", values.len()),
            });
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Empty("CSV data rows"));
    }
    if width < 2 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            row: 1,
            column: 1,
            message: "need at least one feature column and one target column".into(),
        });
    }

    let n = rows.len();
    let mut features = Array2::zeros((n, width - 1));
    let mut targets = Array2::zeros((n, 1));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row[..width - 1].iter().enumerate() {
            features[(i, j)] = v;
        }
        targets[(i, 0)] = row[width - 1];
    }
    Dataset::new(features, targets)
}

/// Per-column location/scale fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    /// Population standard deviation; exactly 1 for (near-)constant columns,
    /// which are therefore only centered.
    pub sd: Vec<f64>,
}

impl ColumnStats {
    fn fit(data: &Array2<f64>) -> Self {
        let n = data.nrows() as f64;
        let mut mean = Vec::with_capacity(data.ncols());
        let mut sd = Vec::with_capacity(data.ncols());
        for col in data.columns() {
            let m = col.sum() / n;
            let var = col.iter().map(|&v| (v - m).powi(2)).sum::<f64>() / n;
            mean.push(m);
            sd.push(if var > 1e-24 { var.sqrt() } else { 1.0 });
        }
        Self { mean, sd }
    }

    fn transform(&self, data: &Array2<f64>) -> Array2<f64> {
        let mut out = data.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.sd[j]);
        }
        out
    }
}

/// Feature/target z-scoring fitted on the training split only. Models train
/// and predict in normalized units; predictions are mapped back to raw
/// units with the `denormalize_*` methods, whose variance scaling makes
/// raw-unit NLL pick up the `ln sd` change-of-variable term automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub features: ColumnStats,
    pub targets: ColumnStats,
}

impl Normalizer {
    pub fn fit(train: &Dataset) -> Self {
        Self {
            features: ColumnStats::fit(&train.features),
            targets: ColumnStats::fit(&train.targets),
        }
    }

    /// Returns the dataset in normalized units (truth columns dropped:
    /// they are raw-unit quantities).
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.feature_dim() != self.features.mean.len() {
            return Err(Error::Shape {
                context: "normalizer feature width",
                expected: self.features.mean.len(),
                got: data.feature_dim(),
            });
        }
        if data.target_dim() != self.targets.mean.len() {
            return Err(Error::Shape {
                context: "normalizer target width",
                expected: self.targets.mean.len(),
                got: data.target_dim(),
            });
        }
        Dataset::new(
            self.features.transform(&data.features),
            self.targets.transform(&data.targets),
        )
    }

    /// Maps a normalized-unit target back to raw units.
    pub fn denormalize_target(&self, y: f64, target: usize) -> f64 {
        y * self.targets.sd[target] + self.targets.mean[target]
    }

    /// Maps normalized-unit NIG parameters back to raw units: the location
    /// shifts and scales, the scale parameter picks up `sd^2`, and the shape
    /// parameters (pseudo-counts) are unit-free.
    pub fn denormalize_evidential(
        &self,
        p: &EvidentialParams<f64>,
        target: usize,
    ) -> EvidentialParams<f64> {
        let s = self.targets.sd[target];
        let m = self.targets.mean[target];
        EvidentialParams {
            gamma: p.gamma * s + m,
            nu: p.nu,
            alpha: p.alpha,
            beta: p.beta * s * s,
        }
    }

    /// Maps a normalized-unit Gaussian prediction back to raw units.
    pub fn denormalize_gaussian(
        &self,
        p: &GaussianPrediction,
        target: usize,
    ) -> GaussianPrediction {
        let s = self.targets.sd[target];
        let m = self.targets.mean[target];
        GaussianPrediction {
            mean: p.mean * s + m,
            aleatoric: p.aleatoric * s * s,
            epistemic: p.epistemic * s * s,
        }
    }
}

/// One train/test index split.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random train/test splits for repeated benchmark trials, one derived
/// seed per trial.
pub fn benchmark_splits(
    n: usize,
    trials: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<Split>> {
    if n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Config("need at least 1 trial".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    Ok((0..trials)
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000 + t as u64));
            let mut order: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
            let (test, train) = order.split_at(n_test);
            let mut test = test.to_vec();
            let mut train = train.to_vec();
            test.sort_unstable();
            train.sort_unstable();
            Split { train, test }
        })
        .collect())
}
