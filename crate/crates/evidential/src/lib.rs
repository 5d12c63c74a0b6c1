//! Evidential regression: neural networks that output a full
//! Normal-Inverse-Gamma (NIG) distribution instead of a point estimate,
//! giving a prediction plus disentangled aleatoric and epistemic
//! uncertainty from a single deterministic forward pass.
//!
//! The crate contains:
//!
//! - [`nig`]: the NIG distribution (validation, predictive moments,
//!   marginal Student-t evidence, entropy, KL divergences);
//! - [`losses`]: the evidential NLL, evidence regularizers, and the
//!   Gaussian NLL, all with analytic gradients;
//! - [`net`]: a small reverse-mode MLP with evidential/Gaussian/point
//!   heads, Adam, seeded deterministic training, and JSON checkpoints;
//! - [`baselines`]: Gaussian maximum-likelihood, deep ensembles, and
//!   MC-dropout for comparison;
//! - [`eval`]: RMSE, predictive NLL, calibration curves, error-retention
//!   curves, OOD detection AUC, and inference timing;
//! - [`data`]: synthetic generators, CSV ingest, normalization, and
//!   benchmark splits.
//!
//! Distribution math is generic over the scalar type (`f32`/`f64`) through
//! [`real::Real`]; the training stack is `f64`.
//!
//! ```
//! use evidential::nig::EvidentialParams;
//!
//! // One head output: prediction 1.2, backed by nu = 2 virtual
//! // observations of the mean and an InvGamma(3, 2) belief over the noise.
//! let p = EvidentialParams::<f64>::new(1.2, 2.0, 3.0, 2.0).unwrap();
//! let s = p.predictive_summary().unwrap();
//! assert_eq!(s.prediction, 1.2);
//! assert!((s.aleatoric - 1.0).abs() < 1e-12);
//! assert!((s.epistemic - 0.5).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod data;
pub mod dist;
pub mod error;
pub mod eval;
pub mod losses;
pub mod net;
pub mod nig;
pub mod real;
pub mod seed;
pub mod special;

pub use error::{Error, Result};

/// NIG parameters in `f64`, the precision the training stack uses.
pub type EvidentialParams64 = nig::EvidentialParams<f64>;
/// NIG parameters in `f32`, for callers keeping weights in single precision.
pub type EvidentialParams32 = nig::EvidentialParams<f32>;
/// Loss configuration in `f64`.
pub type LossConfig64 = losses::LossConfig<f64>;
/// Loss configuration in `f32`.
pub type LossConfig32 = losses::LossConfig<f32>;
