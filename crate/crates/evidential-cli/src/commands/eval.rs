//! `eval`: score a saved checkpoint on a dataset and write the evaluation
//! report.
//!
//! The dataset is rebuilt from the same flags the training run used
//! (`--seed`, `--test-fraction`, generator settings), so evaluating with
//! the training configuration reproduces the training run's held-out split
//! and normalizer exactly.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use evidential::eval::evaluate;
use evidential::net::load_checkpoint;

use super::train::{head_predictives, report_kind};
use super::{ood_auc_if_available, prepare};
use crate::outputs::{ensure_dir, write_json};
use crate::settings::{CommonArgs, Settings};

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Checkpoint written by the train command
    #[arg(long)]
    pub checkpoint: PathBuf,
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let settings = Settings::resolve(&args.common)?;
    ensure_dir(&settings.out)?;

    let mlp = load_checkpoint(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let prepared = prepare(&settings)?;
    if mlp.config().input_dim != prepared.input_dim() {
        bail!(
            "checkpoint expects {} input features but the dataset has {}",
            mlp.config().input_dim,
            prepared.input_dim()
        );
    }

    let preds = head_predictives(&mlp, &prepared)?;
    let auc = ood_auc_if_available(&preds, &prepared)?;
    let report = evaluate(report_kind(mlp.config().head), &preds, &prepared.test_y, auc)?;
    write_json(&settings.out.join("report.json"), &report)?;

    match report.ood_auc {
        Some(auc) => println!(
            "{} on {}: rmse {:.4}, nll {:.4}, ood auc {:.3}",
            report.model, prepared.label, report.rmse, report.nll, auc
        ),
        None => println!(
            "{} on {}: rmse {:.4}, nll {:.4}",
            report.model, prepared.label, report.rmse, report.nll
        ),
    }
    println!("report in {}", settings.out.display());
    Ok(())
}
