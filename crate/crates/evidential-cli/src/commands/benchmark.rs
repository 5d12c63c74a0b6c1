//! `benchmark`: repeated random train/test splits, a selectable set of
//! model families, and mean ± standard-error summaries, optionally shown
//! next to published reference results.

use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;

use evidential::data::{benchmark_splits, load_csv};
use evidential::eval::{predictive_nll, rmse, time_inference};
use evidential::seed::derive_seed;

use super::{
    method_seed, predict_method, prepare_generated, reference_for, split_csv, train_method,
    Prepared, DROPOUT_PREDICT_STREAM, TRIAL_STREAM_BASE,
};
use crate::outputs::{
    ensure_dir, write_json, write_text, BenchmarkReport, MeanStderr, MethodSummary,
    TimingReport, TrialRecord, BENCHMARK_SCHEMA_VERSION,
};
use crate::settings::{CommonArgs, Method, Settings, Source};

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Model families to benchmark
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [Method::Evidential, Method::Ensemble, Method::Dropout]
    )]
    pub methods: Vec<Method>,

    /// Show published results for this dataset (boston, concrete, energy,
    /// kin8nm, naval, power, protein, wine, yacht) next to the evidential row
    #[arg(long)]
    pub reference: Option<String>,
}

struct TrialOutcome {
    rmse: f64,
    nll: f64,
    inference_ms: f64,
}

/// One trial: build that trial's data, then train and score every method.
fn run_trial(
    settings: &Settings,
    methods: &[Method],
    prepared: &Prepared,
    trial: usize,
) -> Result<Vec<TrialOutcome>> {
    let trial_seed = derive_seed(settings.seed, TRIAL_STREAM_BASE + trial as u64);
    methods
        .iter()
        .map(|&method| {
            let trained = train_method(method, settings, prepared, method_seed(trial_seed, method))
                .with_context(|| format!("trial {trial}"))?;
            let predict_seed = derive_seed(trial_seed, DROPOUT_PREDICT_STREAM);
            let preds = predict_method(
                &trained,
                prepared.test_x.view(),
                prepared.normalizer.as_ref(),
                predict_seed,
            )?;
            let inference = time_inference(
                || {
                    let _ = predict_method(
                        &trained,
                        prepared.test_x.view(),
                        prepared.normalizer.as_ref(),
                        predict_seed,
                    );
                },
                5,
            )?;
            Ok(TrialOutcome {
                rmse: rmse(&preds, &prepared.test_y)?,
                nll: predictive_nll(&preds, &prepared.test_y)?,
                inference_ms: inference.as_secs_f64() * 1e3,
            })
        })
        .collect()
}

pub fn run(args: &BenchmarkArgs) -> Result<()> {
    let settings = Settings::resolve(&args.common)?;
    ensure_dir(&settings.out)?;
    let methods = &args.methods;
    anyhow::ensure!(!methods.is_empty(), "--methods must name at least one model family");
    let reference = args
        .reference
        .as_deref()
        .map(reference_for)
        .transpose()?;

    // Per-trial datasets: fixed splits of one CSV file, or fresh draws of a
    // generator with per-trial seeds.
    let started = Instant::now();
    let (label, rows, features, trials_data) = match &settings.source {
        Source::Csv(path) => {
            let data = load_csv(path)?;
            let splits =
                benchmark_splits(data.len(), settings.trials, settings.test_fraction, settings.seed)?;
            let prepared: Vec<Prepared> = splits
                .iter()
                .map(|split| split_csv(&data, split))
                .collect::<Result<_>>()?;
            (
                settings.source.label(),
                data.len(),
                data.feature_dim(),
                prepared,
            )
        }
        Source::Generator(kind) => {
            let prepared: Vec<Prepared> = (0..settings.trials)
                .map(|t| {
                    prepare_generated(
                        &settings,
                        *kind,
                        derive_seed(settings.seed, TRIAL_STREAM_BASE + t as u64),
                    )
                })
                .collect::<Result<_>>()?;
            let features = prepared[0].input_dim();
            (kind.to_string(), settings.n_train + settings.n_test, features, prepared)
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .context("building the worker pool")?;
    let outcomes: Vec<Vec<TrialOutcome>> = pool.install(|| {
        trials_data
            .par_iter()
            .enumerate()
            .map(|(t, prepared)| run_trial(&settings, methods, prepared, t))
            .collect::<Result<_>>()
    })?;

    let mut summaries = Vec::new();
    let mut timing = TimingReport::default();
    for (mi, &method) in methods.iter().enumerate() {
        let rmses: Vec<f64> = outcomes.iter().map(|t| t[mi].rmse).collect();
        let nlls: Vec<f64> = outcomes.iter().map(|t| t[mi].nll).collect();
        let ms: Vec<f64> = outcomes.iter().map(|t| t[mi].inference_ms).collect();
        timing.push(
            format!("{method} inference, mean over trials"),
            std::time::Duration::from_secs_f64(ms.iter().sum::<f64>() / ms.len() as f64 / 1e3),
        );
        summaries.push(MethodSummary {
            method: method.to_string(),
            rmse: MeanStderr::from_samples(&rmses),
            nll: MeanStderr::from_samples(&nlls),
            trials: outcomes
                .iter()
                .enumerate()
                .map(|(t, o)| TrialRecord {
                    trial: t,
                    rmse: o[mi].rmse,
                    nll: o[mi].nll,
                })
                .collect(),
            reference: if method == Method::Evidential {
                reference
            } else {
                None
            },
        });
    }
    timing.push("total", started.elapsed());

    let report = BenchmarkReport {
        schema_version: BENCHMARK_SCHEMA_VERSION,
        dataset: label.clone(),
        rows,
        features,
        trials: settings.trials,
        test_fraction: settings.test_fraction,
        seed: settings.seed,
        methods: summaries,
    };
    write_json(&settings.out.join("benchmark.json"), &report)?;
    write_text(&settings.out.join("benchmark.csv"), &report.to_csv())?;
    timing.write(&settings.out)?;

    println!(
        "benchmark: {label} — {rows} rows, {features} features, {} trials, seed {}",
        settings.trials, settings.seed
    );
    println!("{:<12} {:>16} {:>16} {:>14}", "method", "rmse", "nll", "inference ms");
    for (summary, entry) in report.methods.iter().zip(&timing.entries) {
        println!(
            "{:<12} {:>16} {:>16} {:>14.2}",
            summary.method,
            summary.rmse.to_string(),
            summary.nll.to_string(),
            entry.milliseconds
        );
        if let Some(reference) = &summary.reference {
            println!(
                "{:<12} {:>16} {:>16} {:>14}",
                "  published",
                reference.rmse.to_string(),
                reference.nll.to_string(),
                "-"
            );
        }
    }
    println!("outputs in {}", settings.out.display());
    Ok(())
}
