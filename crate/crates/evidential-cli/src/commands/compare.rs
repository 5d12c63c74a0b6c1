//! `compare`: train several model families on the same data and write each
//! one's full evaluation report plus calibration, cutoff, and entropy-CDF
//! curves for side-by-side inspection.

use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;

use evidential::eval::{evaluate, time_inference, EvalReport};
use evidential::seed::derive_seed;

use super::{
    entropies, method_seed, ood_auc_if_available, partition_by_mask, predict_method, prepare,
    train_method, DROPOUT_PREDICT_STREAM,
};
use crate::outputs::{cdf_csv, ensure_dir, write_json, write_text, TimingReport};
use crate::settings::{CommonArgs, Method, Settings};

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Model families to compare (at least two)
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [
            Method::Evidential,
            Method::Gaussian,
            Method::Ensemble,
            Method::Dropout,
        ]
    )]
    pub methods: Vec<Method>,
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let settings = Settings::resolve(&args.common)?;
    let mut methods = args.methods.clone();
    methods.dedup();
    anyhow::ensure!(
        methods.len() >= 2,
        "compare needs at least two distinct model families"
    );
    ensure_dir(&settings.out)?;

    let prepared = prepare(&settings)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .context("building the worker pool")?;

    let mut timing = TimingReport::default();
    let mut reports: Vec<EvalReport> = Vec::new();
    for &method in &methods {
        let train_started = Instant::now();
        let trained = pool.install(|| {
            train_method(method, &settings, &prepared, method_seed(settings.seed, method))
        })?;
        timing.push(format!("{method} training"), train_started.elapsed());

        let predict_seed = derive_seed(settings.seed, DROPOUT_PREDICT_STREAM);
        let norm = prepared.normalizer.as_ref();
        let preds = predict_method(&trained, prepared.test_x.view(), norm, predict_seed)?;
        let inference = time_inference(
            || {
                let _ = predict_method(&trained, prepared.test_x.view(), norm, predict_seed);
            },
            20,
        )?;
        timing.push(format!("{method} inference, median of 20"), inference);

        let auc = ood_auc_if_available(&preds, &prepared)?;
        let report = evaluate(trained.kind(), &preds, &prepared.test_y, auc)?;
        write_json(&settings.out.join(format!("report_{method}.json")), &report)?;
        write_text(
            &settings.out.join(format!("calibration_{method}.csv")),
            &report.calibration.to_csv(),
        )?;
        write_text(
            &settings.out.join(format!("cutoff_{method}.csv")),
            &report.cutoff_curve.to_csv(),
        )?;

        let entropy = entropies(&preds)?;
        match &prepared.ood {
            Some(mask) => {
                let (id, ood) = partition_by_mask(&entropy, mask);
                write_text(
                    &settings.out.join(format!("entropy_cdf_{method}_id.csv")),
                    &cdf_csv("entropy", &id),
                )?;
                write_text(
                    &settings.out.join(format!("entropy_cdf_{method}_ood.csv")),
                    &cdf_csv("entropy", &ood),
                )?;
            }
            None => write_text(
                &settings.out.join(format!("entropy_cdf_{method}.csv")),
                &cdf_csv("entropy", &entropy),
            )?,
        }
        reports.push(report);
    }
    timing.write(&settings.out)?;

    println!(
        "compare on {} — {} train rows, {} test rows, seed {}",
        prepared.label,
        prepared.train_x.nrows(),
        prepared.test_x.nrows(),
        settings.seed
    );
    println!(
        "{:<12} {:>10} {:>10} {:>9} {:>12}",
        "method", "rmse", "nll", "ood auc", "inference ms"
    );
    for (method, report) in methods.iter().zip(&reports) {
        let auc = report
            .ood_auc
            .map(|a| format!("{a:.3}"))
            .unwrap_or_else(|| "-".into());
        let inference_ms = timing
            .entries
            .iter()
            .find(|e| e.label == format!("{method} inference, median of 20"))
            .map(|e| format!("{:.2}", e.milliseconds))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<12} {:>10.4} {:>10.4} {:>9} {:>12}",
            method.to_string(),
            report.rmse,
            report.nll,
            auc,
            inference_ms
        );
    }
    println!("outputs in {}", settings.out.display());
    Ok(())
}
