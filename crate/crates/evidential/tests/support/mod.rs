//! Shared oracles for the integration tests: numerical quadrature, NIG
//! Monte-Carlo sampling, and finite-difference gradient checks. Everything
//! here is deliberately independent of the library's closed-form code paths
//! so the two sides can disagree.

#![allow(dead_code)]

use evidential::nig::EvidentialParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

/// Relative closeness assertion with a floor for near-zero comparisons.
pub fn assert_rel_close(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = expected.abs().max(actual.abs()).max(1e-12);
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{what}: got {actual}, expected {expected} (rel tol {tol})"
    );
}

/// Composite Simpson rule with `2 n` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Joint NIG density written directly from its definition (normalizing
/// constant and exponent spelled out), *not* through the library.
pub fn nig_pdf_direct(p: &EvidentialParams<f64>, mu: f64, sigma2: f64) -> f64 {
    let ln_gamma_a = statrs::function::gamma::ln_gamma(p.alpha);
    let ln = p.alpha * p.beta.ln() + 0.5 * p.nu.ln()
        - ln_gamma_a
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - (p.alpha + 1.5) * sigma2.ln()
        - (2.0 * p.beta + p.nu * (p.gamma - mu).powi(2)) / (2.0 * sigma2);
    ln.exp()
}

/// Gaussian likelihood `N(y; mu, sigma2)` spelled out.
pub fn gaussian_pdf_direct(y: f64, mu: f64, sigma2: f64) -> f64 {
    (-0.5 * (y - mu).powi(2) / sigma2).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt()
}

/// Marginal likelihood of `y` by brute-force 2-D quadrature of
/// `integral N(y; mu, sigma2) NIG(mu, sigma2) dmu dsigma2`.
///
/// The outer integral runs over `s = ln sigma2` (Jacobian `e^s`); the inner
/// integral over `mu` is clipped to +-12 standard deviations of the
/// Gaussian-product factor, whose precision in `mu` is `(1 + nu) / sigma2`.
/// Resolution is fixed and generous; `evidence_quadrature_converged` checks
/// self-consistency under refinement.
pub fn evidence_quadrature(p: &EvidentialParams<f64>, y: f64, n_outer: usize, n_inner: usize) -> f64 {
    // sigma2 below beta / 600 contributes e^{-600}; above the power-law tail
    // bound it contributes less than ~1e-13 of the total (see the derivation
    // in the acceptance suite). Both ends get extra slack.
    let s_lo = (p.beta / 600.0).ln() - 2.0;
    let s_hi = {
        // Tail of integral C * sigma2^-(alpha + 1/2 + 1) dsigma2 beyond U is
        // C U^-(alpha + 1/2) / (alpha + 1/2); pick U so that is < 1e-14 of a
        // conservative evidence floor of 1e-8.
        let c = p.beta.powf(p.alpha)
            / statrs::function::gamma::gamma(p.alpha)
            / (2.0 * std::f64::consts::PI * (1.0 + 1.0 / p.nu)).sqrt();
        let a_half = p.alpha + 0.5;
        let u = (c / (a_half * 1e-22)).powf(1.0 / a_half);
        u.max(100.0 * p.beta).ln()
    };
    let inner = |s: f64| {
        let sigma2 = s.exp();
        // Product of the two Gaussians in mu: precision (1 + nu) / sigma2,
        // mean weighted by the individual precisions.
        let mu_star = (y + p.nu * p.gamma) / (1.0 + p.nu);
        let sd = (sigma2 / (1.0 + p.nu)).sqrt();
        simpson(
            |mu| gaussian_pdf_direct(y, mu, sigma2) * nig_pdf_direct(p, mu, sigma2),
            mu_star - 12.0 * sd,
            mu_star + 12.0 * sd,
            n_inner,
        ) * sigma2 // Jacobian of sigma2 = e^s
    };
    simpson(inner, s_lo, s_hi, n_outer)
}

/// Samples `(mu, sigma2)` pairs from the NIG distribution:
/// `sigma2 ~ InvGamma(alpha, beta)` via the reciprocal of a Gamma draw,
/// `mu ~ Normal(gamma, sqrt(sigma2 / nu))`.
pub fn sample_nig(p: &EvidentialParams<f64>, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma_dist = Gamma::new(p.alpha, 1.0 / p.beta).expect("valid gamma params");
    (0..n)
        .map(|_| {
            let sigma2 = 1.0 / gamma_dist.sample(&mut rng);
            let mu = Normal::new(p.gamma, (sigma2 / p.nu).sqrt())
                .expect("valid normal params")
                .sample(&mut rng);
            (mu, sigma2)
        })
        .collect()
}

/// Mean and the Monte-Carlo standard error of that mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance together with its approximate standard error
/// (via the fourth central moment).
pub fn variance_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se2 = (m4 - var * var * (n - 3.0) / (n - 1.0)) / n;
    (var, se2.max(0.0).sqrt())
}

/// Central finite difference of a scalar function of one coordinate.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Seeded RNG for test data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
