//! `ablate-lambda`: sweep the evidence-regularizer weight on the cubic
//! dataset and report how in- and out-of-distribution epistemic uncertainty
//! respond.

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use super::{entropies, predict_method, prepare, train_method};
use crate::outputs::{
    cdf_csv, ensure_dir, write_json, write_text, AblationReport, LambdaRecord,
    ABLATION_SCHEMA_VERSION,
};
use crate::settings::{CommonArgs, DatasetKind, Method, Settings, Source};

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Regularizer weights to sweep
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [0.0, 1e-4, 1e-2, 1e-1, 1.0]
    )]
    pub lambdas: Vec<f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn run(args: &AblateArgs) -> Result<()> {
    let settings = Settings::resolve(&args.common)?;
    if settings.source != Source::Generator(DatasetKind::Cubic) {
        bail!("ablate-lambda needs the cubic generator (--dataset cubic): the sweep compares uncertainty inside and outside a known training range");
    }
    anyhow::ensure!(!args.lambdas.is_empty(), "--lambdas must name at least one weight");
    ensure_dir(&settings.out)?;

    // One shared dataset; every sweep setting trains from the same
    // initialization and shuffling seed, so the weight is the only thing
    // that varies.
    let prepared = prepare(&settings)?;
    let xs: Vec<f64> = prepared.test_x.column(0).to_vec();
    // Margins of half a unit on either side of the training boundary keep
    // boundary points out of both bands.
    let id_band: Vec<usize> = (0..xs.len()).filter(|&i| xs[i].abs() <= 3.5).collect();
    let ood_band: Vec<usize> = (0..xs.len()).filter(|&i| xs[i].abs() >= 4.5).collect();
    if id_band.is_empty() || ood_band.is_empty() {
        bail!("the test grid leaves one of the ID/OOD bands empty; increase --n-test");
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .context("building the worker pool")?;
    let records: Vec<LambdaRecord> = pool.install(|| {
        args.lambdas
            .par_iter()
            .map(|&lambda| {
                let mut sweep = settings.clone();
                sweep.lambda = lambda;
                let trained =
                    train_method(Method::Evidential, &sweep, &prepared, sweep.seed)
                        .with_context(|| format!("lambda = {lambda}"))?;
                let preds =
                    predict_method(&trained, prepared.test_x.view(), None, sweep.seed)?;
                let epistemic: Vec<f64> = preds.iter().map(|p| p.epistemic()).collect();
                let entropy = entropies(&preds)?;

                let pick = |idx: &[usize], v: &[f64]| -> Vec<f64> {
                    idx.iter().map(|&i| v[i]).collect()
                };
                let id_epi = mean(&pick(&id_band, &epistemic));
                let ood_epi = mean(&pick(&ood_band, &epistemic));
                let id_entropy = pick(&id_band, &entropy);
                let ood_entropy = pick(&ood_band, &entropy);

                let id_cdf = format!("entropy_cdf_id_lambda_{lambda}.csv");
                let ood_cdf = format!("entropy_cdf_ood_lambda_{lambda}.csv");
                write_text(&settings.out.join(&id_cdf), &cdf_csv("entropy", &id_entropy))?;
                write_text(&settings.out.join(&ood_cdf), &cdf_csv("entropy", &ood_entropy))?;

                Ok(LambdaRecord {
                    lambda,
                    id_epistemic: id_epi,
                    ood_epistemic: ood_epi,
                    ratio: ood_epi / id_epi,
                    id_mean_entropy: mean(&id_entropy),
                    ood_mean_entropy: mean(&ood_entropy),
                    id_entropy_cdf: id_cdf,
                    ood_entropy_cdf: ood_cdf,
                })
            })
            .collect::<Result<_>>()
    })?;

    let report = AblationReport {
        schema_version: ABLATION_SCHEMA_VERSION,
        dataset: prepared.label.clone(),
        seed: settings.seed,
        lambdas: records,
    };
    write_json(&settings.out.join("ablation.json"), &report)?;
    write_text(&settings.out.join("ablation.csv"), &report.to_csv())?;

    println!(
        "lambda sweep on {} — {} train rows, seed {}",
        prepared.label,
        prepared.train_x.nrows(),
        settings.seed
    );
    println!(
        "{:>8} {:>14} {:>14} {:>8}",
        "lambda", "id epistemic", "ood epistemic", "ratio"
    );
    for r in &report.lambdas {
        println!(
            "{:>8} {:>14.5} {:>14.5} {:>8.2}",
            r.lambda, r.id_epistemic, r.ood_epistemic, r.ratio
        );
    }
    println!("outputs in {}", settings.out.display());
    Ok(())
}
