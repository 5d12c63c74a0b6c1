//! Run configuration: command-line flags, optional TOML config file, and
//! named presets, merged in that precedence order into one [`Settings`]
//! value that the commands consume.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use evidential::data::NoiseInterpretation;
use evidential::losses::{LossConfig, Regularizer};
use evidential::net::{Activation, AdamConfig, Head, MlpConfig, TrainConfig};
use serde::Deserialize;

/// Built-in synthetic dataset generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// `y = x^3 + noise` on `|x| <= 4`, test grid extending to `|x| = 6`.
    Cubic,
    /// Zero-mean targets whose noise sd peaks at the origin.
    Heteroscedastic,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetKind::Cubic => f.write_str("cubic"),
            DatasetKind::Heteroscedastic => f.write_str("heteroscedastic"),
        }
    }
}

/// Output head of the trained network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadArg {
    Evidential,
    Gaussian,
    Point,
}

impl From<HeadArg> for Head {
    fn from(value: HeadArg) -> Self {
        match value {
            HeadArg::Evidential => Head::Evidential,
            HeadArg::Gaussian => Head::Gaussian,
            HeadArg::Point => Head::Point,
        }
    }
}

/// Evidence regularizer family (the `eps` of `soft-kl` comes from
/// `--soft-kl-eps`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegKind {
    AbsError,
    StandardScore,
    SoftKl,
}

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationArg {
    Relu,
    Tanh,
}

impl From<ActivationArg> for Activation {
    fn from(value: ActivationArg) -> Self {
        match value {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
        }
    }
}

/// Whether `--noise` is a variance or a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseInterpArg {
    Variance,
    Stddev,
}

impl From<NoiseInterpArg> for NoiseInterpretation {
    fn from(value: NoiseInterpArg) -> Self {
        match value {
            NoiseInterpArg::Variance => NoiseInterpretation::Variance,
            NoiseInterpArg::Stddev => NoiseInterpretation::StdDev,
        }
    }
}

/// Named defaults bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 1-D cubic experiment: 3x100 hidden units, lambda 0.01, Adam 5e-3,
    /// 5000 iterations, batch 128.
    Toy,
    /// Repeated-split tabular benchmark: 1x50 hidden units, 20 trials,
    /// 10% test fraction.
    Benchmark,
}

/// Model families the `benchmark` and `compare` commands can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Evidential,
    Gaussian,
    Ensemble,
    Dropout,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Evidential => f.write_str("evidential"),
            Method::Gaussian => f.write_str("gaussian"),
            Method::Ensemble => f.write_str("ensemble"),
            Method::Dropout => f.write_str("dropout"),
        }
    }
}

/// Flags shared by every command. All value flags are optional; gaps are
/// filled from `--config`, then `--preset`, then hard defaults.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Synthetic dataset generator (mutually exclusive with --csv)
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetKind>,

    /// CSV dataset: numeric columns, last column is the target, optional
    /// header line (mutually exclusive with --dataset)
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// TOML config file supplying any of the value flags
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Named defaults bundle applied below flags and config file
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Output head of the network
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,

    /// Evidence-regularizer weight (0 disables regularization)
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Evidence-regularizer family
    #[arg(long, value_enum)]
    pub reg_kind: Option<RegKind>,

    /// Prior pseudo-count for the soft-kl regularizer
    #[arg(long)]
    pub soft_kl_eps: Option<f64>,

    /// Hidden layer widths, e.g. 100,100,100
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,

    /// Hidden-layer activation
    #[arg(long, value_enum)]
    pub activation: Option<ActivationArg>,

    /// Dropout probability on hidden activations
    #[arg(long)]
    pub dropout: Option<f64>,

    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,

    /// Optimizer steps
    #[arg(long)]
    pub iters: Option<usize>,

    /// Minibatch size
    #[arg(long)]
    pub batch: Option<usize>,

    /// Master seed; every derived stream (init, shuffling, dropout, splits)
    /// is a deterministic function of it
    #[arg(long)]
    pub seed: Option<u64>,

    /// Observation-noise level for generated datasets
    #[arg(long)]
    pub noise: Option<f64>,

    /// Whether --noise is a variance or a standard deviation
    #[arg(long, value_enum)]
    pub noise_interpretation: Option<NoiseInterpArg>,

    /// Training rows for generated datasets
    #[arg(long)]
    pub n_train: Option<usize>,

    /// Test rows for generated datasets
    #[arg(long)]
    pub n_test: Option<usize>,

    /// Ensemble size
    #[arg(long)]
    pub members: Option<usize>,

    /// Stochastic forward passes for MC-dropout prediction
    #[arg(long)]
    pub passes: Option<usize>,

    /// Train/test splits for the benchmark command
    #[arg(long)]
    pub trials: Option<usize>,

    /// Worker threads for benchmark trials and ensemble members
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Held-out fraction for CSV datasets
    #[arg(long)]
    pub test_fraction: Option<f64>,

    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

/// One layer of partially-specified settings. The TOML config file
/// deserializes into this; flag values are converted into it; presets are
/// written as it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSettings {
    pub dataset: Option<DatasetKind>,
    pub csv: Option<PathBuf>,
    pub head: Option<HeadArg>,
    pub lambda: Option<f64>,
    pub reg_kind: Option<RegKind>,
    pub soft_kl_eps: Option<f64>,
    pub hidden: Option<Vec<usize>>,
    pub activation: Option<ActivationArg>,
    pub dropout: Option<f64>,
    pub lr: Option<f64>,
    pub iters: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub noise_interpretation: Option<NoiseInterpArg>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub members: Option<usize>,
    pub passes: Option<usize>,
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
    pub test_fraction: Option<f64>,
}

impl PartialSettings {
    /// Values present in `self` win over values from `lower`.
    fn over(self, lower: PartialSettings) -> PartialSettings {
        macro_rules! pick {
            ($($field:ident),* $(,)?) => {
                PartialSettings { $($field: self.$field.or(lower.$field)),* }
            };
        }
        pick!(
            dataset,
            csv,
            head,
            lambda,
            reg_kind,
            soft_kl_eps,
            hidden,
            activation,
            dropout,
            lr,
            iters,
            batch,
            seed,
            noise,
            noise_interpretation,
            n_train,
            n_test,
            members,
            passes,
            trials,
            jobs,
            test_fraction,
        )
    }

    fn from_preset(preset: Preset) -> PartialSettings {
        match preset {
            Preset::Toy => PartialSettings {
                dataset: Some(DatasetKind::Cubic),
                head: Some(HeadArg::Evidential),
                lambda: Some(0.01),
                hidden: Some(vec![100, 100, 100]),
                lr: Some(5e-3),
                iters: Some(5000),
                batch: Some(128),
                n_train: Some(1000),
                n_test: Some(600),
                ..PartialSettings::default()
            },
            Preset::Benchmark => PartialSettings {
                head: Some(HeadArg::Evidential),
                lambda: Some(0.01),
                hidden: Some(vec![50]),
                // steep small-tabular targets (e.g. hull resistance) need the
                // larger steps and extra epochs; 5e-3/5000 underfits them
                lr: Some(1e-2),
                iters: Some(10_000),
                batch: Some(32),
                trials: Some(20),
                test_fraction: Some(0.1),
                ..PartialSettings::default()
            },
        }
    }

    /// The dataset source named by this layer, if any. A single layer naming
    /// both a generator and a CSV file is ambiguous and rejected; across
    /// layers the higher-precedence one simply wins.
    fn source(&self) -> Result<Option<Source>> {
        match (self.dataset, &self.csv) {
            (Some(_), Some(_)) => {
                bail!("--dataset and --csv are mutually exclusive; pass exactly one")
            }
            (Some(kind), None) => Ok(Some(Source::Generator(kind))),
            (None, Some(path)) => Ok(Some(Source::Csv(path.clone()))),
            (None, None) => Ok(None),
        }
    }
}

impl From<&CommonArgs> for PartialSettings {
    fn from(args: &CommonArgs) -> Self {
        PartialSettings {
            dataset: args.dataset,
            csv: args.csv.clone(),
            head: args.head,
            lambda: args.lambda,
            reg_kind: args.reg_kind,
            soft_kl_eps: args.soft_kl_eps,
            hidden: args.hidden.clone(),
            activation: args.activation,
            dropout: args.dropout,
            lr: args.lr,
            iters: args.iters,
            batch: args.batch,
            seed: args.seed,
            noise: args.noise,
            noise_interpretation: args.noise_interpretation,
            n_train: args.n_train,
            n_test: args.n_test,
            members: args.members,
            passes: args.passes,
            trials: args.trials,
            jobs: args.jobs,
            test_fraction: args.test_fraction,
        }
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Generator(DatasetKind),
    Csv(PathBuf),
}

impl Source {
    /// Short name used in stdout summaries.
    pub fn label(&self) -> String {
        match self {
            Source::Generator(kind) => kind.to_string(),
            Source::Csv(path) => path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

/// Fully-resolved run configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub source: Source,
    pub head: Head,
    pub lambda: f64,
    pub reg_kind: RegKind,
    pub soft_kl_eps: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub dropout: f64,
    pub lr: f64,
    pub iters: usize,
    pub batch: usize,
    pub seed: u64,
    pub noise: f64,
    pub noise_interpretation: NoiseInterpretation,
    pub n_train: usize,
    pub n_test: usize,
    pub members: usize,
    pub passes: usize,
    pub trials: usize,
    pub jobs: usize,
    pub test_fraction: f64,
    pub out: PathBuf,
}

impl Settings {
    /// Merges flags over the config file over the preset over hard
    /// defaults, then validates the combination.
    pub fn resolve(args: &CommonArgs) -> Result<Settings> {
        let flags = PartialSettings::from(args);
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                toml::from_str::<PartialSettings>(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => PartialSettings::default(),
        };
        let preset = args
            .preset
            .map(PartialSettings::from_preset)
            .unwrap_or_default();

        let source = flags
            .source()?
            .or(file.source().context("in config file")?)
            .or(preset.source().expect("presets name at most one source"))
            .unwrap_or(Source::Generator(DatasetKind::Cubic));
        let merged = flags.over(file).over(preset);

        let settings = Settings {
            source,
            head: merged.head.unwrap_or(HeadArg::Evidential).into(),
            lambda: merged.lambda.unwrap_or(0.01),
            reg_kind: merged.reg_kind.unwrap_or(RegKind::AbsError),
            soft_kl_eps: merged.soft_kl_eps.unwrap_or(0.01),
            hidden: merged.hidden.unwrap_or_else(|| vec![100, 100, 100]),
            activation: merged.activation.unwrap_or(ActivationArg::Relu).into(),
            dropout: merged.dropout.unwrap_or(0.0),
            lr: merged.lr.unwrap_or(5e-3),
            iters: merged.iters.unwrap_or(5000),
            batch: merged.batch.unwrap_or(128),
            seed: merged.seed.unwrap_or(0),
            noise: merged.noise.unwrap_or(3.0),
            noise_interpretation: merged
                .noise_interpretation
                .unwrap_or(NoiseInterpArg::Variance)
                .into(),
            n_train: merged.n_train.unwrap_or(1000),
            n_test: merged.n_test.unwrap_or(600),
            members: merged.members.unwrap_or(5),
            passes: merged.passes.unwrap_or(32),
            trials: merged.trials.unwrap_or(20),
            jobs: merged.jobs.unwrap_or(1),
            test_fraction: merged.test_fraction.unwrap_or(0.1),
            out: args.out.clone(),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            bail!("--jobs must be >= 1");
        }
        // Everything else is validated by the library types it feeds into;
        // surface those errors early so they point at flags, not internals.
        self.loss_config().context("invalid loss settings")?;
        self.train_config(self.seed)
            .context("invalid training settings")?;
        Ok(())
    }

    pub fn regularizer(&self) -> Regularizer<f64> {
        match self.reg_kind {
            RegKind::AbsError => Regularizer::AbsError,
            RegKind::StandardScore => Regularizer::StandardScore,
            RegKind::SoftKl => Regularizer::SoftKl {
                eps: self.soft_kl_eps,
            },
        }
    }

    pub fn loss_config(&self) -> Result<LossConfig<f64>> {
        Ok(LossConfig::new(self.lambda, self.regularizer())?)
    }

    /// Training loop configuration with an explicit seed so callers can
    /// derive per-trial or per-method streams from the master seed.
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let config = TrainConfig {
            loss: self.loss_config()?,
            adam: AdamConfig::with_learning_rate(self.lr),
            iterations: self.iters,
            batch_size: self.batch,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Network architecture for the given head/dropout combination;
    /// `input_dim` comes from the prepared data.
    pub fn mlp_config(&self, input_dim: usize, head: Head, dropout: f64) -> MlpConfig {
        MlpConfig {
            input_dim,
            hidden: self.hidden.clone(),
            targets: 1,
            head,
            activation: self.activation,
            dropout,
        }
    }

    /// Dropout rate used by the MC-dropout baseline: the configured rate,
    /// or 0.1 when dropout is disabled (the baseline is meaningless at 0).
    pub fn dropout_rate_for_mc(&self) -> f64 {
        if self.dropout > 0.0 {
            self.dropout
        } else {
            0.1
        }
    }
}
