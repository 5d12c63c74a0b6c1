//! `generate`: write a synthetic dataset to CSV files that the other
//! commands (and `load_csv`) can read back.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use ndarray::ArrayView2;

use evidential::data::{gen_cubic, gen_heteroscedastic, CubicConfig, Dataset, HeteroscedasticConfig};

use crate::outputs::{ensure_dir, write_text};
use crate::settings::{CommonArgs, DatasetKind, Settings, Source};

/// Feature columns plus the target, with an `x1,...,y` header.
fn dataset_csv(data: &Dataset) -> String {
    let d = data.feature_dim();
    let mut text = String::new();
    for j in 0..d {
        write!(text, "x{},", j + 1).expect("writing to a String cannot fail");
    }
    text.push_str("y\n");
    for i in 0..data.len() {
        for j in 0..d {
            write!(text, "{},", data.features[[i, j]]).expect("writing to a String cannot fail");
        }
        writeln!(text, "{}", data.targets[[i, 0]]).expect("writing to a String cannot fail");
    }
    text
}

/// Side table with the noise-free mean and noise variance per test row.
fn truth_csv(features: ArrayView2<'_, f64>, truth: ArrayView2<'_, f64>, noise_var: &[f64]) -> String {
    let d = features.ncols();
    let mut text = String::new();
    for j in 0..d {
        write!(text, "x{},", j + 1).expect("writing to a String cannot fail");
    }
    text.push_str("truth,noise_variance\n");
    for i in 0..features.nrows() {
        for j in 0..d {
            write!(text, "{},", features[[i, j]]).expect("writing to a String cannot fail");
        }
        writeln!(text, "{},{}", truth[[i, 0]], noise_var[i])
            .expect("writing to a String cannot fail");
    }
    text
}

fn write_pair(dir: &Path, train: &Dataset, test: &Dataset) -> Result<()> {
    write_text(&dir.join("train.csv"), &dataset_csv(train))?;
    write_text(&dir.join("test.csv"), &dataset_csv(test))?;
    if let (Some(truth), Some(noise)) = (&test.truth, &test.noise_variance) {
        write_text(
            &dir.join("truth.csv"),
            &truth_csv(test.features.view(), truth.view(), noise),
        )?;
    }
    Ok(())
}

pub fn run(args: &CommonArgs) -> Result<()> {
    let settings = Settings::resolve(args)?;
    let kind = match settings.source {
        Source::Generator(kind) => kind,
        Source::Csv(_) => bail!("generate writes synthetic data; pass --dataset, not --csv"),
    };
    ensure_dir(&settings.out)?;

    let (train, test) = match kind {
        DatasetKind::Cubic => gen_cubic(&CubicConfig {
            n_train: settings.n_train,
            n_test: settings.n_test,
            noise: settings.noise,
            interpretation: settings.noise_interpretation,
            seed: settings.seed,
            ..CubicConfig::default()
        })?,
        DatasetKind::Heteroscedastic => gen_heteroscedastic(&HeteroscedasticConfig {
            n_train: settings.n_train,
            n_test: settings.n_test,
            seed: settings.seed,
            ..HeteroscedasticConfig::default()
        })?,
    };
    write_pair(&settings.out, &train, &test)?;

    println!(
        "wrote {} dataset: {} train rows, {} test rows to {}",
        kind,
        train.len(),
        test.len(),
        settings.out.display()
    );
    Ok(())
}
