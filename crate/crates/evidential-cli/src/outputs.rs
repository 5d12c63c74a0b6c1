//! Report structs and file writers. Every JSON report here is free of
//! wall-clock values so reruns with identical seeds produce byte-identical
//! files; timing always goes to a separate `timing.json`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use evidential::net::TraceRow;
use serde::{Deserialize, Serialize};

/// Creates the output directory (and parents) if missing.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Training-trace CSV: `iteration,mean_loss,mean_nll,mean_reg`.
pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut text = String::from("iteration,mean_loss,mean_nll,mean_reg\n");
    for row in trace {
        writeln!(
            text,
            "{},{},{},{}",
            row.iteration, row.mean_loss, row.mean_nll, row.mean_reg
        )
        .expect("writing to a String cannot fail");
    }
    write_text(path, &text)
}

/// Empirical CDF of a score sample as `value,cumulative` rows, one curve per
/// file. Values are sorted ascending; `cumulative` is the fraction of the
/// sample at or below each value.
pub fn cdf_csv(header_value_name: &str, values: &[f64]) -> String {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut text = format!("{header_value_name},cumulative\n");
    for (i, v) in sorted.iter().enumerate() {
        writeln!(text, "{},{}", v, (i + 1) as f64 / n as f64)
            .expect("writing to a String cannot fail");
    }
    text
}

/// Wall-clock measurements for one run, kept apart from the deterministic
/// reports.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TimingReport {
    /// Milliseconds per labeled phase or model, insertion-ordered.
    pub entries: Vec<TimingEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingEntry {
    pub label: String,
    pub milliseconds: f64,
}

impl TimingReport {
    pub fn push(&mut self, label: impl Into<String>, elapsed: Duration) {
        self.entries.push(TimingEntry {
            label: label.into(),
            milliseconds: elapsed.as_secs_f64() * 1e3,
        });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("timing.json"), self)
    }
}

/// Summary statistics over benchmark trials: mean and standard error
/// (sample standard deviation over the square root of the trial count).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    pub fn from_samples(samples: &[f64]) -> MeanStderr {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stderr = if samples.len() < 2 {
            0.0
        } else {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        MeanStderr { mean, stderr }
    }
}

impl std::fmt::Display for MeanStderr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} \u{b1} {:.2}", self.mean, self.stderr)
    }
}

/// Per-trial metrics for one method in a benchmark run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial: usize,
    pub rmse: f64,
    pub nll: f64,
}

/// Published numbers for one dataset/method pair, shown next to fresh
/// results for orientation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub rmse: MeanStderr,
    pub nll: MeanStderr,
}

/// One method's aggregated benchmark results.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSummary {
    pub method: String,
    pub rmse: MeanStderr,
    pub nll: MeanStderr,
    pub trials: Vec<TrialRecord>,
    /// Published evidential results for the named reference dataset, when
    /// one was requested and this is the evidential method.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<ReferenceEntry>,
}

/// Complete benchmark report (`benchmark.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub dataset: String,
    pub rows: usize,
    pub features: usize,
    pub trials: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

pub const BENCHMARK_SCHEMA_VERSION: u32 = 1;

impl BenchmarkReport {
    /// Flat CSV companion: one row per method.
    pub fn to_csv(&self) -> String {
        let mut text =
            String::from("method,rmse_mean,rmse_stderr,nll_mean,nll_stderr\n");
        for m in &self.methods {
            writeln!(
                text,
                "{},{},{},{},{}",
                m.method, m.rmse.mean, m.rmse.stderr, m.nll.mean, m.nll.stderr
            )
            .expect("writing to a String cannot fail");
        }
        text
    }
}

/// Epistemic-uncertainty summary for one regularizer weight in a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRecord {
    pub lambda: f64,
    /// Mean epistemic variance over in-distribution test points.
    pub id_epistemic: f64,
    /// Mean epistemic variance over out-of-distribution test points.
    pub ood_epistemic: f64,
    /// `ood_epistemic / id_epistemic`.
    pub ratio: f64,
    pub id_mean_entropy: f64,
    pub ood_mean_entropy: f64,
    /// File holding this setting's in-distribution entropy CDF.
    pub id_entropy_cdf: String,
    /// File holding this setting's out-of-distribution entropy CDF.
    pub ood_entropy_cdf: String,
}

/// Complete regularizer-sweep report (`ablation.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationReport {
    pub schema_version: u32,
    pub dataset: String,
    pub seed: u64,
    pub lambdas: Vec<LambdaRecord>,
}

pub const ABLATION_SCHEMA_VERSION: u32 = 1;

impl AblationReport {
    pub fn to_csv(&self) -> String {
        let mut text =
            String::from("lambda,id_epistemic,ood_epistemic,ratio,id_mean_entropy,ood_mean_entropy\n");
        for r in &self.lambdas {
            writeln!(
                text,
                "{},{},{},{},{},{}",
                r.lambda,
                r.id_epistemic,
                r.ood_epistemic,
                r.ratio,
                r.id_mean_entropy,
                r.ood_mean_entropy
            )
            .expect("writing to a String cannot fail");
        }
        text
    }
}
