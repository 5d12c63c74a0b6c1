//! `train`: fit one network and write its checkpoint, per-iteration loss
//! trace, and a held-out evaluation report.

use anyhow::{Context, Result};
use ndarray::ArrayView2;

use evidential::data::Normalizer;
use evidential::eval::{evaluate, ModelKind, Predictive};
use evidential::net::{save_checkpoint, train, Head, Mlp};

use super::{evidential_predictives, gaussian_predictives, ood_auc_if_available, prepare, Prepared};
use crate::outputs::{ensure_dir, write_json, write_trace_csv};
use crate::settings::{CommonArgs, Settings};

/// Point-head networks report a homoscedastic Gaussian predictive whose
/// variance is the mean squared training residual (the maximum-likelihood
/// noise estimate under squared-error training), floored away from zero.
fn point_predictives(
    mlp: &Mlp,
    train_x: ArrayView2<'_, f64>,
    train_y: ArrayView2<'_, f64>,
    test_x: ArrayView2<'_, f64>,
    normalizer: Option<&Normalizer>,
) -> Result<Vec<Predictive>> {
    let fitted = mlp.predict_point(train_x)?;
    let n = (fitted.nrows() * fitted.ncols()) as f64;
    let residual_var = (&fitted - &train_y)
        .iter()
        .map(|r| r * r)
        .sum::<f64>()
        .max(1e-12 * n)
        / n;

    let preds = mlp.predict_point(test_x)?;
    Ok(preds
        .column(0)
        .iter()
        .map(|&mean| {
            let (mean, var) = match normalizer {
                Some(norm) => {
                    let s = norm.targets.sd[0];
                    (
                        mean * s + norm.targets.mean[0],
                        residual_var * s * s,
                    )
                }
                None => (mean, residual_var),
            };
            Predictive::Gaussian {
                mean,
                aleatoric: var,
                epistemic: 0.0,
            }
        })
        .collect())
}

/// Held-out predictive distributions for whichever head was trained.
pub fn head_predictives(mlp: &Mlp, prepared: &Prepared) -> Result<Vec<Predictive>> {
    let norm = prepared.normalizer.as_ref();
    match mlp.config().head {
        Head::Evidential => evidential_predictives(mlp, prepared.test_x.view(), norm),
        Head::Gaussian => {
            let rows = mlp
                .predict_gaussian(prepared.test_x.view())?
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|g| evidential::baselines::GaussianPrediction {
                            mean: g.mean,
                            aleatoric: g.var,
                            epistemic: 0.0,
                        })
                        .collect()
                })
                .collect();
            Ok(gaussian_predictives(rows, norm))
        }
        Head::Point => point_predictives(
            mlp,
            prepared.train_x.view(),
            prepared.train_y.view(),
            prepared.test_x.view(),
            norm,
        ),
    }
}

pub fn report_kind(head: Head) -> ModelKind {
    match head {
        Head::Evidential => ModelKind::Evidential,
        // Gaussian and point heads both evaluate as a single Gaussian
        // predictive per row.
        Head::Gaussian | Head::Point => ModelKind::Gaussian,
    }
}

pub fn run(args: &CommonArgs) -> Result<()> {
    let settings = Settings::resolve(args)?;
    ensure_dir(&settings.out)?;
    let prepared = prepare(&settings)?;

    let config = settings.mlp_config(prepared.input_dim(), settings.head, settings.dropout);
    let mut mlp = Mlp::new(config, settings.seed)?;
    let train_config = settings.train_config(settings.seed)?;
    let trace = train(
        &mut mlp,
        prepared.train_x.view(),
        prepared.train_y.view(),
        &train_config,
    )
    .context("training aborted")?;

    save_checkpoint(&mlp, &settings.out.join("checkpoint.json"))?;
    write_trace_csv(&settings.out.join("loss_trace.csv"), &trace)?;
    if let Some(normalizer) = &prepared.normalizer {
        write_json(&settings.out.join("normalizer.json"), normalizer)?;
    }

    let preds = head_predictives(&mlp, &prepared)?;
    let auc = ood_auc_if_available(&preds, &prepared)?;
    let report = evaluate(report_kind(settings.head), &preds, &prepared.test_y, auc)?;
    write_json(&settings.out.join("report.json"), &report)?;

    let last = trace.last().expect("at least one iteration");
    println!(
        "trained on {} ({} rows): final mean loss {:.4}",
        prepared.label,
        prepared.train_x.nrows(),
        last.mean_loss
    );
    match report.ood_auc {
        Some(auc) => println!(
            "held-out rmse {:.4}, nll {:.4}, ood auc {:.3}",
            report.rmse, report.nll, auc
        ),
        None => println!("held-out rmse {:.4}, nll {:.4}", report.rmse, report.nll),
    }
    println!("outputs in {}", settings.out.display());
    Ok(())
}
