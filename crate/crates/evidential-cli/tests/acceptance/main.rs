//! Acceptance gate: the ten release-blocking checks, one test per
//! criterion, each printing a single `[acceptance] criterion N (...)` line
//! with PASS/FAIL/SKIP and the measured numbers (run with `--nocapture` to
//! see the lines for passing criteria).
//!
//! Oracles are self-contained: quadrature, Monte-Carlo sampling, finite
//! differences, and brute-force pair counting live in `oracles.rs` and never
//! call the library's closed forms.

mod oracles;

#[path = "../common/mod.rs"]
mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use evidential::data::{cubic_ood_mask, gen_cubic, CubicConfig, NoiseInterpretation};
use evidential::eval::{
    calibration_curve, default_calibration_levels, ood_auc, time_inference, Predictive,
};
use evidential::losses::{LossConfig, Regularizer};
use evidential::net::{
    loss_and_grad, train, Activation, AdamConfig, Head, Mlp, MlpConfig, TrainConfig,
};
use evidential::nig::{nig_kl, EvidentialParams};
use ndarray::Array2;
use oracles::*;
use rand::Rng;
use rand_distr::Distribution;
use tempfile::TempDir;

/// Prints the per-criterion verdict line, then enforces it.
fn criterion(n: u32, title: &str, pass: bool, details: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {n} ({title}): {status} — {details}");
    assert!(pass, "[acceptance] criterion {n} ({title}): FAIL — {details}");
}

// --- criterion 1 -----------------------------------------------------------

#[test]
fn criterion_1_analytic_evidence_matches_quadrature() {
    let started = Instant::now();
    // Four corner settings pin the swept ranges; the rest sample them
    // (nu log-uniform so small-evidence settings are covered).
    let mut settings: Vec<EvidentialParams<f64>> = vec![
        EvidentialParams { gamma: 0.0, nu: 0.1, alpha: 1.05, beta: 0.1 },
        EvidentialParams { gamma: 1.0, nu: 50.0, alpha: 30.0, beta: 20.0 },
        EvidentialParams { gamma: -2.0, nu: 0.1, alpha: 30.0, beta: 20.0 },
        EvidentialParams { gamma: 2.0, nu: 50.0, alpha: 1.05, beta: 0.1 },
    ];
    let mut r = rng(101);
    while settings.len() < 20 {
        settings.push(EvidentialParams {
            gamma: r.random_range(-3.0..3.0),
            nu: (r.random_range(0.1f64.ln()..50.0f64.ln())).exp(),
            alpha: r.random_range(1.05..30.0),
            beta: r.random_range(0.1..20.0),
        });
    }

    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for p in &settings {
        let spread = p.predictive_summary().unwrap().total_variance().sqrt();
        for i in 0..10 {
            let k = -3.0 + 6.0 * i as f64 / 9.0;
            let y = p.gamma + k * spread;
            let closed = p.model_evidence(y).unwrap();
            let integrated = evidence_quadrature(p, y, 800, 180);
            let rel = (closed - integrated).abs() / integrated;
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    criterion(
        1,
        "analytic evidence vs 2-D quadrature",
        worst < 1e-6 && elapsed < Duration::from_secs(60),
        &format!(
            "{checked} points over {} settings, worst rel {worst:.2e} (< 1e-6), {:.1}s (< 60s)",
            settings.len(),
            elapsed.as_secs_f64()
        ),
    );
}

// --- criterion 2 -----------------------------------------------------------

#[test]
fn criterion_2_moments_match_monte_carlo() {
    let started = Instant::now();
    // alpha >= 3 keeps the MC estimators of both moments finite-variance so
    // "within 3 standard errors" is a meaningful bound.
    let mut r = rng(202);
    let mut worst_sigma = 0.0f64;
    let mut worst_mu = 0.0f64;
    for i in 0..10 {
        let p = EvidentialParams {
            gamma: r.random_range(-3.0..3.0),
            nu: r.random_range(0.3..10.0),
            alpha: r.random_range(3.0..12.0),
            beta: r.random_range(0.5..10.0),
        };
        let summary = p.predictive_summary().unwrap();
        let draws = sample_nig(&p, 1_000_000, 2100 + i);

        let sigma2s: Vec<f64> = draws.iter().map(|d| d.1).collect();
        let (s2_mean, s2_se) = mean_and_se(&sigma2s);
        worst_sigma = worst_sigma.max((s2_mean - summary.aleatoric).abs() / s2_se);

        let mus: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let (mu_var, var_se) = variance_and_se(&mus);
        worst_mu = worst_mu.max((mu_var - summary.epistemic).abs() / var_se);
    }
    let elapsed = started.elapsed();
    criterion(
        2,
        "NIG moments vs Monte-Carlo",
        worst_sigma <= 3.0 && worst_mu <= 3.0 && elapsed < Duration::from_secs(60),
        &format!(
            "10 settings x 1e6 draws: E[sigma2] worst {worst_sigma:.2} SE, Var[mu] worst {worst_mu:.2} SE (<= 3), {:.1}s (< 60s)",
            elapsed.as_secs_f64()
        ),
    );
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_composed_gradients_match_finite_differences() {
    let regs = [
        Regularizer::AbsError,
        Regularizer::StandardScore,
        Regularizer::SoftKl { eps: 1e-2 },
    ];
    let mut worst = 0.0f64;
    let mut params_checked = 0usize;
    for s in 0..10usize {
        let config = MlpConfig {
            input_dim: 1 + s % 3,
            hidden: match s % 3 {
                0 => vec![8],
                1 => vec![8, 6],
                _ => vec![6, 6, 4],
            },
            targets: 1 + s % 2,
            head: Head::Evidential,
            activation: Activation::Tanh,
            dropout: 0.0,
        };
        let lambda = if s % 2 == 0 { 0.05 } else { 0.0 };
        let loss = LossConfig::new(lambda, regs[s % 3]).unwrap();
        let mut mlp = Mlp::new(config.clone(), 3000 + s as u64).unwrap();
        let mut r = rng(3100 + s as u64);

        for _point in 0..10 {
            let x = Array2::from_shape_simple_fn((1, config.input_dim), || {
                r.random_range(-2.0..2.0)
            });
            let y = Array2::from_shape_simple_fn((1, config.targets), || {
                r.random_range(-3.0..3.0)
            });
            let base = loss_and_grad(&mut mlp, x.view(), y.view(), &loss, None).unwrap();
            assert!(base.bad_rows.is_empty() && base.mean_loss.is_finite());
            let analytic = mlp.parameters().grads().to_vec();

            let h = 1e-5;
            for (i, &a) in analytic.iter().enumerate() {
                let saved = mlp.parameters().values()[i];
                mlp.parameters_mut().values_mut()[i] = saved + h;
                let plus = loss_and_grad(&mut mlp, x.view(), y.view(), &loss, None)
                    .unwrap()
                    .mean_loss;
                mlp.parameters_mut().values_mut()[i] = saved - h;
                let minus = loss_and_grad(&mut mlp, x.view(), y.view(), &loss, None)
                    .unwrap()
                    .mean_loss;
                mlp.parameters_mut().values_mut()[i] = saved;
                let fd = (plus - minus) / (2.0 * h);
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                worst = worst.max(rel);
                params_checked += 1;
            }
        }
    }
    criterion(
        3,
        "composed loss gradient vs central differences",
        worst < 1e-3,
        &format!(
            "10 nets x 10 points, {params_checked} parameter derivatives, worst rel {worst:.2e} (< 1e-3)"
        ),
    );
}

// --- criterion 4 -----------------------------------------------------------

#[test]
fn criterion_4_kl_identity_monte_carlo_and_soft_prior_consistency() {
    // (a) KL(p, p) = 0 to round-off.
    let mut r = rng(404);
    let mut worst_self = 0.0f64;
    let random_params = |r: &mut rand_chacha::ChaCha8Rng| EvidentialParams {
        gamma: r.random_range(-4.0..4.0),
        nu: r.random_range(0.1..20.0),
        alpha: r.random_range(1.1..15.0),
        beta: r.random_range(0.1..10.0),
    };
    for _ in 0..30 {
        let p = random_params(&mut r);
        let self_kl: f64 = nig_kl(&p, &p).unwrap();
        worst_self = worst_self.max(self_kl.abs());
    }

    // (b) KL(p, q) = E_p[ln p - ln q] with criterion 2's sampler and the
    // spelled-out density, one million draws, 3 standard errors.
    let pairs = [
        (
            EvidentialParams { gamma: 0.0, nu: 1.0, alpha: 3.0, beta: 1.0 },
            EvidentialParams { gamma: 0.5, nu: 2.0, alpha: 4.0, beta: 2.0 },
        ),
        (
            EvidentialParams { gamma: -1.0, nu: 4.0, alpha: 5.0, beta: 3.0 },
            EvidentialParams { gamma: -1.2, nu: 1.5, alpha: 2.5, beta: 2.5 },
        ),
        (
            EvidentialParams { gamma: 2.0, nu: 0.8, alpha: 6.0, beta: 5.0 },
            EvidentialParams { gamma: 1.0, nu: 0.5, alpha: 7.0, beta: 4.0 },
        ),
    ];
    let mut worst_mc = 0.0f64;
    for (i, (p, q)) in pairs.iter().enumerate() {
        let draws = sample_nig(p, 1_000_000, 4400 + i as u64);
        let ratios: Vec<f64> = draws
            .iter()
            .map(|&(mu, s2)| (nig_pdf_direct(p, mu, s2) / nig_pdf_direct(q, mu, s2)).ln())
            .collect();
        let (mc, se) = mean_and_se(&ratios);
        worst_mc = worst_mc.max((nig_kl(p, q).unwrap() - mc).abs() / se);
    }

    // (c) The evidence-prior shortcut equals the general KL evaluated at the
    // matched prior (same location and scale, near-zero evidence).
    let mut worst_soft = 0.0f64;
    for _ in 0..10 {
        let p = random_params(&mut r);
        for eps in [1e-3, 1e-2, 0.1] {
            let prior = EvidentialParams {
                gamma: p.gamma,
                nu: eps,
                alpha: 1.0 + eps,
                beta: p.beta,
            };
            let shortcut = p.soft_prior_kl(eps).unwrap();
            let general: f64 = nig_kl(&p, &prior).unwrap();
            worst_soft = worst_soft.max((shortcut - general).abs() / general.abs().max(1.0));
        }
    }

    criterion(
        4,
        "KL identity, Monte-Carlo, and prior-shortcut consistency",
        worst_self < 1e-12 && worst_mc <= 3.0 && worst_soft < 1e-10,
        &format!(
            "KL(p,p) worst {worst_self:.1e} (< 1e-12), MC worst {worst_mc:.2} SE (<= 3), shortcut worst rel {worst_soft:.1e} (< 1e-10)"
        ),
    );
}

// --- criteria 5 and 7: shared trained toy models ----------------------------

struct ToyRun {
    xs: Vec<f64>,
    ood: Vec<bool>,
    epistemic: Vec<f64>,
    entropy: Vec<f64>,
    train_seconds: f64,
}

/// The 1-D cubic experiment at its published settings: 1000 noisy training
/// points on |x| <= 4, a test grid to |x| = 6, a 3x100 network trained for
/// 5000 Adam steps at learning rate 5e-3 with batches of 128. Seed 5 is the
/// frozen evaluation seed.
fn train_toy(lambda: f64) -> ToyRun {
    let config = CubicConfig {
        n_train: 1000,
        n_test: 600,
        noise: 3.0,
        interpretation: NoiseInterpretation::Variance,
        seed: 5,
        ..CubicConfig::default()
    };
    let (train_data, test_data) = gen_cubic(&config).unwrap();
    let ood = cubic_ood_mask(&test_data, config.train_range);

    let mlp_config = MlpConfig {
        input_dim: 1,
        hidden: vec![100, 100, 100],
        targets: 1,
        head: Head::Evidential,
        activation: Activation::Relu,
        dropout: 0.0,
    };
    let train_config = TrainConfig {
        loss: LossConfig::new(lambda, Regularizer::AbsError).unwrap(),
        adam: AdamConfig::with_learning_rate(5e-3),
        iterations: 5000,
        batch_size: 128,
        seed: 5,
    };
    let started = Instant::now();
    let mut mlp = Mlp::new(mlp_config, 5).unwrap();
    train(
        &mut mlp,
        train_data.features.view(),
        train_data.targets.view(),
        &train_config,
    )
    .unwrap();
    let train_seconds = started.elapsed().as_secs_f64();

    let preds = mlp.predict_evidential(test_data.features.view()).unwrap();
    let mut epistemic = Vec::new();
    let mut entropy = Vec::new();
    for row in &preds {
        let summary = row[0].predictive_summary().unwrap();
        epistemic.push(summary.epistemic);
        entropy.push(row[0].predictive_entropy().unwrap());
    }
    ToyRun {
        xs: test_data.features.column(0).to_vec(),
        ood,
        epistemic,
        entropy,
        train_seconds,
    }
}

/// (regularized lambda = 0.01, unregularized lambda = 0)
fn toy_runs() -> &'static (ToyRun, ToyRun) {
    static TOYS: OnceLock<(ToyRun, ToyRun)> = OnceLock::new();
    TOYS.get_or_init(|| (train_toy(0.01), train_toy(0.0)))
}

fn band_mean(run: &ToyRun, f: impl Fn(f64) -> bool) -> f64 {
    let vals: Vec<f64> = run
        .xs
        .iter()
        .zip(&run.epistemic)
        .filter(|(x, _)| f(x.abs()))
        .map(|(_, e)| *e)
        .collect();
    assert!(!vals.is_empty(), "empty evaluation band");
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn criterion_5_toy_epistemic_grows_out_of_distribution() {
    let (reg, unreg) = toy_runs();
    let ratio = |run: &ToyRun| {
        band_mean(run, |x| (4.5..=6.0).contains(&x)) / band_mean(run, |x| x <= 3.5)
    };
    let ratio_reg = ratio(reg);
    let ratio_unreg = ratio(unreg);
    let time_ok = reg.train_seconds < 300.0 && unreg.train_seconds < 300.0;
    criterion(
        5,
        "toy OOD epistemic separation and regularizer direction",
        ratio_reg >= 2.0 && ratio_unreg < ratio_reg && time_ok,
        &format!(
            "OOD/ID epistemic ratio {ratio_reg:.2} at lambda 0.01 (>= 2), {ratio_unreg:.2} at lambda 0 (strictly smaller), training {:.0}s + {:.0}s (< 300s each)",
            reg.train_seconds, unreg.train_seconds
        ),
    );
}

// --- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_calibration_is_self_consistent() {
    // Targets drawn from each prediction's own distribution must be covered
    // at the nominal rates. Gaussian and evidential predictives both have
    // exact central intervals, so any miss is a calibration-code defect.
    let n = 100_000;
    let mut r = rng(606);
    let mut preds = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        if i % 2 == 0 {
            let mean: f64 = r.random_range(-5.0..5.0);
            let aleatoric: f64 = r.random_range(0.1..4.0);
            let epistemic: f64 = r.random_range(0.0..2.0);
            let y = mean
                + (aleatoric + epistemic).sqrt()
                    * r.sample::<f64, _>(rand_distr::StandardNormal);
            preds.push(Predictive::Gaussian {
                mean,
                aleatoric,
                epistemic,
            });
            ys.push(y);
        } else {
            let p: EvidentialParams<f64> = EvidentialParams {
                gamma: r.random_range(-5.0..5.0),
                nu: r.random_range(0.5..5.0),
                alpha: r.random_range(2.0..8.0),
                beta: r.random_range(0.5..5.0),
            };
            // Predictive is Student-t: scale sqrt(beta (1 + nu) / (nu alpha)),
            // 2 alpha degrees of freedom.
            let scale = (p.beta * (1.0 + p.nu) / (p.nu * p.alpha)).sqrt();
            let t = rand_distr::StudentT::new(2.0 * p.alpha).unwrap().sample(&mut r);
            ys.push(p.gamma + scale * t);
            preds.push(Predictive::Evidential(p));
        }
    }
    let report = calibration_curve(&preds, &ys, &default_calibration_levels()).unwrap();
    criterion(
        6,
        "calibration self-consistency",
        report.mean_abs_error < 0.01,
        &format!(
            "n = 1e5 self-sampled targets: calibration error {:.4} (< 0.01)",
            report.mean_abs_error
        ),
    );
}

// --- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_ood_auc_threshold_and_pair_count_oracle() {
    // Rank statistic exactness: midrank AUC equals literal pair counting on
    // tie-heavy small vectors.
    let mut r = rng(707);
    let mut worst_gap = 0.0f64;
    for _ in 0..20 {
        let len_id = r.random_range(1..=20);
        let len_ood = r.random_range(1..=20);
        // Quantized scores force ties within and across the two samples.
        let id: Vec<f64> = (0..len_id).map(|_| r.random_range(0..6) as f64 / 2.0).collect();
        let ood: Vec<f64> = (0..len_ood).map(|_| r.random_range(0..6) as f64 / 2.0).collect();
        let fast = ood_auc(&id, &ood).unwrap();
        let slow = auc_by_pair_counting(&id, &ood);
        worst_gap = worst_gap.max((fast - slow).abs());
    }

    // Behavior: the trained toy model's predictive entropy separates the
    // unseen region from the training support.
    let (reg, _) = toy_runs();
    let mut id_scores = Vec::new();
    let mut ood_scores = Vec::new();
    for ((h, &is_ood), _x) in reg.entropy.iter().zip(&reg.ood).zip(&reg.xs) {
        if is_ood {
            ood_scores.push(*h);
        } else {
            id_scores.push(*h);
        }
    }
    let auc = ood_auc(&id_scores, &ood_scores).unwrap();

    criterion(
        7,
        "OOD entropy AUC and pair-count oracle",
        auc >= 0.85 && worst_gap < 1e-12,
        &format!(
            "toy entropy AUC {auc:.3} (>= 0.85); midrank vs pair-count worst gap {worst_gap:.1e} on 20 tie-heavy vectors (exact)"
        ),
    );
}

// --- criterion 8 -----------------------------------------------------------

#[test]
fn criterion_8_benchmark_harness_on_user_csv() {
    let Ok(csv) = std::env::var("EVIDENTIAL_BENCH_CSV") else {
        println!(
            "[acceptance] criterion 8 (20-trial benchmark on user CSV): SKIP — set EVIDENTIAL_BENCH_CSV=path/to/yacht.csv to run"
        );
        return;
    };
    let started = Instant::now();
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench");
    let output = common::run_bin_ok(&[
        "benchmark",
        "--csv",
        &csv,
        "--preset",
        "benchmark",
        "--methods",
        "evidential",
        "--hidden",
        "50",
        "--seed",
        "0",
        "--jobs",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    let report = common::load_json(&out.join("benchmark.json"));
    let evidential = &report["methods"][0];
    let rmse = evidential["rmse"]["mean"].as_f64().unwrap();
    let rmse_se = evidential["rmse"]["stderr"].as_f64().unwrap();
    let nll = evidential["nll"]["mean"].as_f64().unwrap();
    let nll_se = evidential["nll"]["stderr"].as_f64().unwrap();
    criterion(
        8,
        "20-trial benchmark on user CSV",
        rmse <= 4.0 && nll <= 2.0 && elapsed < Duration::from_secs(900),
        &format!(
            "rmse {rmse:.2} ± {rmse_se:.2} (<= 4.0), nll {nll:.2} ± {nll_se:.2} (<= 2.0), {:.0}s (< 900s); stdout:\n{}",
            elapsed.as_secs_f64(),
            common::stdout_of(&output)
        ),
    );
}

// --- criterion 9 -----------------------------------------------------------

#[test]
fn criterion_9_single_pass_inference_vs_five_pass_baselines() {
    // Small identical-architecture models; inference cost does not depend
    // on how well they fit.
    let config = CubicConfig {
        n_train: 256,
        n_test: 2,
        seed: 9,
        ..CubicConfig::default()
    };
    let (train_data, _) = gen_cubic(&config).unwrap();
    let hidden = vec![64, 64];
    let train_config = TrainConfig {
        loss: LossConfig::new(0.01, Regularizer::AbsError).unwrap(),
        adam: AdamConfig::with_learning_rate(5e-3),
        iterations: 50,
        batch_size: 128,
        seed: 9,
    };

    let mut evidential_model = Mlp::new(
        MlpConfig {
            input_dim: 1,
            hidden: hidden.clone(),
            targets: 1,
            head: Head::Evidential,
            activation: Activation::Relu,
            dropout: 0.0,
        },
        9,
    )
    .unwrap();
    train(
        &mut evidential_model,
        train_data.features.view(),
        train_data.targets.view(),
        &train_config,
    )
    .unwrap();

    let gaussian_config = MlpConfig {
        input_dim: 1,
        hidden,
        targets: 1,
        head: Head::Gaussian,
        activation: Activation::Relu,
        dropout: 0.1,
    };
    let ensemble = evidential::baselines::train_ensemble(
        train_data.features.view(),
        train_data.targets.view(),
        &gaussian_config,
        &train_config,
        5,
    )
    .unwrap();

    // Structural pass counts: the evidential model is one network evaluated
    // once per batch; the baselines evaluate five networks / five mask draws.
    let batch = Array2::from_shape_fn((10_000, 1), |(i, _)| -6.0 + 12.0 * i as f64 / 9999.0);
    let member_count = ensemble.members.len();
    let mc_stack = ensemble.members[0]
        .mc_dropout_forward(batch.view(), 5, 99)
        .unwrap();
    let structural_ok = member_count == 5 && mc_stack.len() == 5;

    // Wall-clock direction, warn-only: one forward pass should be at least
    // twice as fast as five.
    let single = time_inference(
        || {
            let _ = evidential_model.predict_evidential(batch.view());
        },
        10,
    )
    .unwrap();
    let five = time_inference(
        || {
            let _ = ensemble.predict(batch.view());
        },
        10,
    )
    .unwrap();
    let ratio = five.as_secs_f64() / single.as_secs_f64();
    if ratio < 2.0 {
        println!(
            "[acceptance] criterion 9 warning: wall-clock ratio {ratio:.2} below 2 — noisy machine; structural check still applies"
        );
    }

    criterion(
        9,
        "single-pass vs five-pass inference",
        structural_ok,
        &format!(
            "ensemble members {member_count} (== 5), dropout stack {} (== 5), 1e4-row batch wall-clock ratio {ratio:.2} ({:.2} ms vs {:.2} ms, soft >= 2)",
            mc_stack.len(),
            single.as_secs_f64() * 1e3,
            five.as_secs_f64() * 1e3
        ),
    );
}

// --- criterion 10 ----------------------------------------------------------

/// Runs one CLI invocation twice into fresh directories and byte-compares
/// every produced file except `timing.json`.
fn assert_rerun_identical(label: &str, args: &[&str]) {
    let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
    for dir in &dirs {
        let out = dir.path().join("out");
        let mut full: Vec<&str> = args.to_vec();
        let out_str = out.to_str().unwrap().to_owned();
        full.push("--out");
        let out_leaked: &str = Box::leak(out_str.into_boxed_str());
        full.push(out_leaked);
        common::run_bin_ok(&full);
    }
    let first = dirs[0].path().join("out");
    let second = dirs[1].path().join("out");
    let mut names: Vec<String> = std::fs::read_dir(&first)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(!names.is_empty(), "{label}: no outputs written");
    for name in names {
        if name == "timing.json" {
            continue;
        }
        let a = std::fs::read(first.join(&name)).unwrap();
        let b = std::fs::read(second.join(&name)).unwrap();
        assert_eq!(a, b, "{label}: {name} differs between identical runs");
    }
}

#[test]
fn criterion_10_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data_out = dir.path().join("data");
    common::run_bin_ok(&[
        "generate", "--dataset", "cubic", "--n-train", "80", "--n-test", "20",
        "--seed", "10", "--out", data_out.to_str().unwrap(),
    ]);
    let csv = data_out.join("train.csv");
    let csv = csv.to_str().unwrap();

    let tiny = [
        "--hidden", "8,8", "--iters", "60", "--n-train", "80", "--n-test", "40",
        "--seed", "10",
    ];
    let mut train_args = vec!["train", "--dataset", "cubic"];
    train_args.extend_from_slice(&tiny);
    assert_rerun_identical("train", &train_args);

    let mut generate_args = vec!["generate", "--dataset", "heteroscedastic"];
    generate_args.extend_from_slice(&tiny);
    assert_rerun_identical("generate", &generate_args);

    let mut bench_args = vec![
        "benchmark", "--csv", csv, "--trials", "3", "--members", "2", "--passes", "4",
        "--jobs", "2",
    ];
    bench_args.extend_from_slice(&tiny[..6]);
    bench_args.extend_from_slice(&["--seed", "10"]);
    assert_rerun_identical("benchmark", &bench_args);

    let mut ablate_args = vec!["ablate-lambda", "--dataset", "cubic", "--lambdas", "0,0.01"];
    ablate_args.extend_from_slice(&tiny);
    assert_rerun_identical("ablate-lambda", &ablate_args);

    let mut compare_args = vec![
        "compare", "--dataset", "cubic", "--methods", "evidential,dropout",
        "--passes", "4",
    ];
    compare_args.extend_from_slice(&tiny);
    assert_rerun_identical("compare", &compare_args);

    // eval needs a checkpoint: train once, then score twice.
    let ckpt_dir = dir.path().join("ckpt");
    let mut once = vec!["train", "--dataset", "cubic"];
    once.extend_from_slice(&tiny);
    once.extend_from_slice(&["--out", ckpt_dir.to_str().unwrap()]);
    common::run_bin_ok(&once);
    let ckpt = ckpt_dir.join("checkpoint.json");
    let mut eval_args = vec!["eval", "--dataset", "cubic", "--checkpoint", ckpt.to_str().unwrap()];
    eval_args.extend_from_slice(&tiny);
    assert_rerun_identical("eval", &eval_args);

    criterion(
        10,
        "seeded reruns are byte-identical",
        true,
        "train, generate, benchmark (jobs 2), ablate-lambda, compare, eval: all non-timing outputs byte-identical across reruns",
    );
}
