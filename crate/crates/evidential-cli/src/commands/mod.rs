//! The six subcommands plus the data-preparation and model-dispatch
//! machinery they share.

pub mod ablate;
pub mod benchmark;
pub mod compare;
pub mod eval;
pub mod generate;
pub mod train;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array2, ArrayView2};

use evidential::baselines::{
    train_ensemble, train_gaussian_mle, train_mc_dropout, Ensemble, GaussianMle,
    GaussianPrediction, McDropout,
};
use evidential::data::{
    benchmark_splits, cubic_ood_mask, gen_cubic, gen_heteroscedastic, load_csv, CubicConfig,
    Dataset, HeteroscedasticConfig, Normalizer, Split,
};
use evidential::eval::{ModelKind, Predictive};
use evidential::net::{train, GaussianOutput, Head, Mlp};
use evidential::nig::EvidentialParams;
use evidential::seed::derive_seed;

use crate::outputs::{MeanStderr, ReferenceEntry};
use crate::settings::{DatasetKind, Method, Settings, Source};

/// Seed-stream offsets for the per-method training seeds used by the
/// `benchmark` and `compare` commands. Keeping them in one table guarantees
/// distinct streams.
pub const METHOD_STREAMS: [(Method, u64); 4] = [
    (Method::Evidential, 100),
    (Method::Gaussian, 101),
    (Method::Ensemble, 102),
    (Method::Dropout, 103),
];

/// Stream for the mask draws of MC-dropout prediction.
pub const DROPOUT_PREDICT_STREAM: u64 = 104;

/// Stream base for per-trial model seeds in the benchmark command.
pub const TRIAL_STREAM_BASE: u64 = 2000;

/// Training seed for `method` derived from a base seed.
pub fn method_seed(base: u64, method: Method) -> u64 {
    let stream = METHOD_STREAMS
        .iter()
        .find(|(m, _)| *m == method)
        .map(|(_, s)| *s)
        .expect("every method has a stream");
    derive_seed(base, stream)
}

/// A dataset made ready for training: model-unit train/test features and
/// train targets, raw-unit test targets, and the transform connecting the
/// two. Generated sources pass through untransformed.
pub struct Prepared {
    pub label: String,
    pub train_x: Array2<f64>,
    pub train_y: Array2<f64>,
    pub test_x: Array2<f64>,
    /// Test targets in raw units (evaluation happens in raw units).
    pub test_y: Vec<f64>,
    pub normalizer: Option<Normalizer>,
    /// Which test rows lie outside the training support, when the source
    /// defines that (the cubic generator does).
    pub ood: Option<Vec<bool>>,
}

impl Prepared {
    pub fn input_dim(&self) -> usize {
        self.train_x.ncols()
    }
}

/// Builds train/test data for the configured source. CSV sources use one
/// seeded random split and z-score normalization fitted on the train part;
/// the model sees normalized units, evaluation sees raw units.
pub fn prepare(settings: &Settings) -> Result<Prepared> {
    match &settings.source {
        Source::Generator(kind) => prepare_generated(settings, *kind, settings.seed),
        Source::Csv(path) => {
            let data = load_csv(path)?;
            let split = benchmark_splits(data.len(), 1, settings.test_fraction, settings.seed)?
                .pop()
                .expect("one trial requested");
            let mut prepared = split_csv(&data, &split)?;
            prepared.label = settings.source.label();
            Ok(prepared)
        }
    }
}

/// Generates a synthetic train/test pair with the given seed (kept separate
/// from `settings.seed` so benchmark trials can vary it).
pub fn prepare_generated(settings: &Settings, kind: DatasetKind, seed: u64) -> Result<Prepared> {
    match kind {
        DatasetKind::Cubic => {
            let config = CubicConfig {
                n_train: settings.n_train,
                n_test: settings.n_test,
                noise: settings.noise,
                interpretation: settings.noise_interpretation,
                seed,
                ..CubicConfig::default()
            };
            let (train, test) = gen_cubic(&config)?;
            let ood = cubic_ood_mask(&test, config.train_range);
            Ok(Prepared {
                label: "cubic".into(),
                test_y: test.targets.column(0).to_vec(),
                train_x: train.features,
                train_y: train.targets,
                test_x: test.features,
                normalizer: None,
                ood: Some(ood),
            })
        }
        DatasetKind::Heteroscedastic => {
            let config = HeteroscedasticConfig {
                n_train: settings.n_train,
                n_test: settings.n_test,
                seed,
                ..HeteroscedasticConfig::default()
            };
            let (train, test) = gen_heteroscedastic(&config)?;
            Ok(Prepared {
                label: "heteroscedastic".into(),
                test_y: test.targets.column(0).to_vec(),
                train_x: train.features,
                train_y: train.targets,
                test_x: test.features,
                normalizer: None,
                ood: None,
            })
        }
    }
}

/// Applies one train/test split to a CSV dataset and fits the normalizer on
/// the train part.
pub fn split_csv(data: &Dataset, split: &Split) -> Result<Prepared> {
    if data.target_dim() != 1 {
        bail!("expected a single target column, got {}", data.target_dim());
    }
    let train = data.select(&split.train)?;
    let test = data.select(&split.test)?;
    let normalizer = Normalizer::fit(&train);
    let train_n = normalizer.transform(&train)?;
    let test_n = normalizer.transform(&test)?;
    Ok(Prepared {
        label: String::new(),
        train_x: train_n.features,
        train_y: train_n.targets,
        test_x: test_n.features,
        test_y: test.targets.column(0).to_vec(),
        normalizer: Some(normalizer),
        ood: None,
    })
}

/// Evidential-head predictions mapped to raw units.
pub fn evidential_predictives(
    mlp: &Mlp,
    x: ArrayView2<'_, f64>,
    normalizer: Option<&Normalizer>,
) -> Result<Vec<Predictive>> {
    let rows = mlp.predict_evidential(x)?;
    Ok(rows
        .into_iter()
        .map(|row| {
            let p: EvidentialParams<f64> = row[0];
            let p = match normalizer {
                Some(n) => n.denormalize_evidential(&p, 0),
                None => p,
            };
            Predictive::Evidential(p)
        })
        .collect())
}

/// Single-network Gaussian predictions mapped to raw units.
pub fn gaussian_predictives(
    rows: Vec<Vec<GaussianPrediction>>,
    normalizer: Option<&Normalizer>,
) -> Vec<Predictive> {
    rows.into_iter()
        .map(|row| {
            let p = match normalizer {
                Some(n) => n.denormalize_gaussian(&row[0], 0),
                None => row[0],
            };
            Predictive::Gaussian {
                mean: p.mean,
                aleatoric: p.aleatoric,
                epistemic: p.epistemic,
            }
        })
        .collect()
}

/// Equal-weight Gaussian mixture over component (mean, var) pairs, mapped
/// to raw units. Used for ensembles (one component per member) and
/// MC dropout (one per pass); the mixture likelihood is scored exactly.
pub fn mixture_predictives(
    per_component: &[Vec<Vec<GaussianOutput>>],
    normalizer: Option<&Normalizer>,
) -> Vec<Predictive> {
    let rows = per_component[0].len();
    (0..rows)
        .map(|i| {
            let components: Vec<GaussianOutput> = per_component
                .iter()
                .map(|stack| {
                    let c = stack[i][0];
                    match normalizer {
                        Some(n) => GaussianOutput {
                            mean: c.mean * n.targets.sd[0] + n.targets.mean[0],
                            var: c.var * n.targets.sd[0] * n.targets.sd[0],
                        },
                        None => c,
                    }
                })
                .collect();
            Predictive::from_components(&components)
        })
        .collect()
}

/// One trained model of any supported family.
pub enum Trained {
    Evidential(Mlp),
    Gaussian(GaussianMle),
    Ensemble(Ensemble),
    Dropout(McDropout),
}

impl Trained {
    pub fn kind(&self) -> ModelKind {
        match self {
            Trained::Evidential(_) => ModelKind::Evidential,
            Trained::Gaussian(_) => ModelKind::Gaussian,
            Trained::Ensemble(_) => ModelKind::Ensemble,
            Trained::Dropout(_) => ModelKind::Dropout,
        }
    }
}

/// Trains one model family on prepared data. `seed` drives initialization,
/// shuffling, and dropout; member/pass streams derive from it.
pub fn train_method(
    method: Method,
    settings: &Settings,
    prepared: &Prepared,
    seed: u64,
) -> Result<Trained> {
    let train_config = settings.train_config(seed)?;
    let x = prepared.train_x.view();
    let y = prepared.train_y.view();
    let context = || format!("training the {method} model");
    match method {
        Method::Evidential => {
            let config = settings.mlp_config(prepared.input_dim(), Head::Evidential, 0.0);
            let mut mlp = Mlp::new(config, seed)?;
            train(&mut mlp, x, y, &train_config).with_context(context)?;
            Ok(Trained::Evidential(mlp))
        }
        Method::Gaussian => {
            let config = settings.mlp_config(prepared.input_dim(), Head::Gaussian, 0.0);
            let model =
                train_gaussian_mle(x, y, &config, &train_config).with_context(context)?;
            Ok(Trained::Gaussian(model))
        }
        Method::Ensemble => {
            let config = settings.mlp_config(prepared.input_dim(), Head::Gaussian, 0.0);
            let model = train_ensemble(x, y, &config, &train_config, settings.members)
                .with_context(context)?;
            Ok(Trained::Ensemble(model))
        }
        Method::Dropout => {
            let config = settings.mlp_config(
                prepared.input_dim(),
                Head::Gaussian,
                settings.dropout_rate_for_mc(),
            );
            let model = train_mc_dropout(x, y, &config, &train_config, settings.passes)
                .with_context(context)?;
            Ok(Trained::Dropout(model))
        }
    }
}

/// Raw-unit predictive distributions from a trained model. `predict_seed`
/// pins the MC-dropout mask draws; the other families ignore it.
pub fn predict_method(
    trained: &Trained,
    x: ArrayView2<'_, f64>,
    normalizer: Option<&Normalizer>,
    predict_seed: u64,
) -> Result<Vec<Predictive>> {
    match trained {
        Trained::Evidential(mlp) => evidential_predictives(mlp, x, normalizer),
        Trained::Gaussian(model) => Ok(gaussian_predictives(model.predict(x)?, normalizer)),
        Trained::Ensemble(model) => {
            let per_member: Vec<Vec<Vec<GaussianOutput>>> = model
                .members
                .iter()
                .map(|m| m.predict_gaussian(x))
                .collect::<evidential::Result<_>>()?;
            Ok(mixture_predictives(&per_member, normalizer))
        }
        Trained::Dropout(model) => {
            let per_pass = model.mlp.mc_dropout_forward(x, model.passes, predict_seed)?;
            Ok(mixture_predictives(&per_pass, normalizer))
        }
    }
}

/// Entropy of each predictive, the ranking score used for OOD detection.
pub fn entropies(preds: &[Predictive]) -> Result<Vec<f64>> {
    preds
        .iter()
        .map(|p| p.entropy().map_err(anyhow::Error::from))
        .collect()
}

/// Splits per-row values by an OOD mask into (in-distribution,
/// out-of-distribution) halves.
pub fn partition_by_mask(values: &[f64], mask: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let mut id = Vec::new();
    let mut ood = Vec::new();
    for (v, &is_ood) in values.iter().zip(mask) {
        if is_ood {
            ood.push(*v);
        } else {
            id.push(*v);
        }
    }
    (id, ood)
}

/// Entropy-ranked OOD AUC when the prepared data defines an OOD region.
pub fn ood_auc_if_available(
    preds: &[Predictive],
    prepared: &Prepared,
) -> Result<Option<f64>> {
    let Some(mask) = &prepared.ood else {
        return Ok(None);
    };
    let scores = entropies(preds)?;
    let (id, ood) = partition_by_mask(&scores, mask);
    if id.is_empty() || ood.is_empty() {
        return Ok(None);
    }
    Ok(Some(evidential::eval::ood_auc(&id, &ood)?))
}

/// Published results for the named benchmark dataset (evidential model;
/// RMSE and NLL as mean ± standard error over 20 splits).
pub fn reference_for(name: &str) -> Result<ReferenceEntry> {
    const TABLE: [(&str, [f64; 4]); 9] = [
        ("boston", [3.06, 0.16, 2.35, 0.06]),
        ("concrete", [5.85, 0.15, 3.01, 0.02]),
        ("energy", [2.06, 0.10, 1.39, 0.06]),
        ("kin8nm", [0.09, 0.00, -1.24, 0.01]),
        ("naval", [0.00, 0.00, -5.73, 0.07]),
        ("power", [4.23, 0.09, 2.81, 0.07]),
        ("protein", [4.64, 0.03, 2.63, 0.00]),
        ("wine", [0.61, 0.02, 0.89, 0.05]),
        ("yacht", [1.57, 0.56, 1.03, 0.19]),
    ];
    let key = name.to_ascii_lowercase();
    TABLE
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, [rm, rs, nm, ns])| ReferenceEntry {
            rmse: MeanStderr {
                mean: *rm,
                stderr: *rs,
            },
            nll: MeanStderr {
                mean: *nm,
                stderr: *ns,
            },
        })
        .ok_or_else(|| {
            let names: Vec<&str> = TABLE.iter().map(|(n, _)| *n).collect();
            anyhow!(
                "unknown reference dataset {name:?}; known: {}",
                names.join(", ")
            )
        })
}
