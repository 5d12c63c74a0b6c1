//! Training losses: the evidential negative log-likelihood, evidence
//! regularizers, and the Gaussian NLL used by the baselines.
//!
//! Every loss returns analytic gradients with respect to the distribution
//! parameters; the network backward pass chains them through the output
//! heads. The gradients are verified against central finite differences in
//! the integration tests.

use crate::error::{Error, Result};
use crate::nig::EvidentialParams;
use crate::real::{from_f64, Real};
use crate::special::{digamma, ln_gamma, trigamma};

/// Gradient of a scalar loss with respect to the four NIG parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrad<T> {
    pub gamma: T,
    pub nu: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> ParamGrad<T> {
    pub fn zero() -> Self {
        Self {
            gamma: T::zero(),
            nu: T::zero(),
            alpha: T::zero(),
            beta: T::zero(),
        }
    }

    /// Gradient components in `(gamma, nu, alpha, beta)` order.
    pub fn to_array(self) -> [T; 4] {
        [self.gamma, self.nu, self.alpha, self.beta]
    }
}

/// Which evidence regularizer to apply on top of the NLL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer<T> {
    /// `|y - gamma| * (2 nu + alpha)`: raw error scaled by total evidence.
    AbsError,
    /// `|y - gamma| / sqrt(beta / (alpha - 1)) * (2 nu + alpha)`: the error
    /// standardized by the predicted aleatoric sd, making the penalty
    /// insensitive to the scale of the targets.
    StandardScore,
    /// KL divergence to the near-zero-evidence prior with the given `eps`;
    /// shrinks evidence everywhere rather than proportionally to error.
    SoftKl { eps: T },
}

/// Loss configuration: regularizer choice and its trade-off weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig<T> {
    /// Regularizer weight, `>= 0`.
    pub lambda: T,
    pub regularizer: Regularizer<T>,
}

impl<T: Real> LossConfig<T> {
    pub fn new(lambda: T, regularizer: Regularizer<T>) -> Result<Self> {
        let config = Self {
            lambda,
            regularizer,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= T::zero()) {
            return Err(Error::Config(format!(
                "regularizer weight lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let Regularizer::SoftKl { eps } = self.regularizer {
            if !(eps.is_finite() && eps > T::zero()) {
                return Err(Error::Config(format!(
                    "soft-KL regularizer needs eps > 0, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for LossConfig<T> {
    /// Absolute-error regularizer at weight 0.01.
    fn default() -> Self {
        Self {
            lambda: from_f64(0.01),
            regularizer: Regularizer::AbsError,
        }
    }
}

/// Value and parameter gradient of one per-sample loss term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown<T> {
    pub nll: T,
    pub regularizer: T,
    pub total: T,
    /// Gradient of `total` with respect to `(gamma, nu, alpha, beta)`.
    pub grad: ParamGrad<T>,
}

/// Floor for logarithm arguments in the NLL. With valid parameters the
/// quantities involved are strictly positive; the floor only matters in
/// pathological float underflow and never fires on the test corpus.
fn log_floor<T: Real>() -> T {
    from_f64(1e-300)
}

fn check_target<T: Real>(y: T) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("loss target must be finite, got {y}")))
    }
}

/// Evidential negative log-likelihood of `y`: the negative log of the
/// marginal Student-t density, written in terms of the NIG parameters with
/// `omega = 2 beta (1 + nu)`:
///
/// ```text
/// nll = ln(pi / nu) / 2 - alpha ln(omega)
///     + (alpha + 1/2) ln((y - gamma)^2 nu + omega)
///     + ln G(alpha) - ln G(alpha + 1/2)
/// ```
pub fn evidential_nll<T: Real>(y: T, p: &EvidentialParams<T>) -> Result<T> {
    Ok(evidential_nll_grad(y, p)?.0)
}

/// NLL value together with its gradient in `(gamma, nu, alpha, beta)`.
pub fn evidential_nll_grad<T: Real>(
    y: T,
    p: &EvidentialParams<T>,
) -> Result<(T, ParamGrad<T>)> {
    p.validate()?;
    check_target(y)?;
    let half = from_f64::<T>(0.5);
    let one = T::one();
    let two = from_f64::<T>(2.0);

    let err = y - p.gamma;
    let omega = (two * p.beta * (one + p.nu)).max(log_floor());
    let s = (err * err * p.nu + omega).max(log_floor());

    let value = half * (T::PI() / p.nu).ln() - p.alpha * omega.ln()
        + (p.alpha + half) * s.ln()
        + ln_gamma(p.alpha)
        - ln_gamma(p.alpha + half);

    let a_half = p.alpha + half;
    let grad = ParamGrad {
        gamma: -(two * p.alpha + one) * p.nu * err / s,
        nu: -half / p.nu - two * p.alpha * p.beta / omega
            + a_half * (err * err + two * p.beta) / s,
        alpha: -omega.ln() + s.ln() + digamma(p.alpha) - digamma(a_half),
        beta: two * (one + p.nu) * (a_half / s - p.alpha / omega),
    };
    Ok((value, grad))
}

/// Evidence regularizer value at `y`.
pub fn evidence_regularizer<T: Real>(
    y: T,
    p: &EvidentialParams<T>,
    regularizer: Regularizer<T>,
) -> Result<T> {
    Ok(evidence_regularizer_grad(y, p, regularizer)?.0)
}

/// Regularizer value together with its gradient.
///
/// The `|y - gamma|` terms are not differentiable at `y == gamma`; the
/// gradient there uses the subgradient 0 (the error factor vanishes, so the
/// evidence derivatives vanish with it for the error-scaled variants).
pub fn evidence_regularizer_grad<T: Real>(
    y: T,
    p: &EvidentialParams<T>,
    regularizer: Regularizer<T>,
) -> Result<(T, ParamGrad<T>)> {
    p.validate()?;
    check_target(y)?;
    let one = T::one();
    let two = from_f64::<T>(2.0);
    let half = from_f64::<T>(0.5);

    let err = y - p.gamma;
    let abs_err = err.abs();
    // sign with sign(0) = 0, the subgradient convention for |.| at the kink.
    let sign = if err > T::zero() {
        one
    } else if err < T::zero() {
        -one
    } else {
        T::zero()
    };
    let evidence = p.total_evidence();

    match regularizer {
        Regularizer::AbsError => {
            let value = abs_err * evidence;
            let grad = ParamGrad {
                gamma: -sign * evidence,
                nu: two * abs_err,
                alpha: abs_err,
                beta: T::zero(),
            };
            Ok((value, grad))
        }
        Regularizer::StandardScore => {
            // q = sqrt((alpha - 1) / beta) is 1 / aleatoric sd.
            let q = ((p.alpha - one) / p.beta).sqrt();
            let value = abs_err * q * evidence;
            let grad = ParamGrad {
                gamma: -sign * q * evidence,
                nu: two * abs_err * q,
                // d(q)/d(alpha) = q / (2 (alpha - 1)); product rule with the
                // evidence factor's own alpha dependence.
                alpha: abs_err * q * (evidence / (two * (p.alpha - one)) + one),
                beta: -half * abs_err * q / p.beta * evidence,
            };
            Ok((value, grad))
        }
        Regularizer::SoftKl { eps } => {
            if !(eps.is_finite() && eps > T::zero()) {
                return Err(Error::Config(format!(
                    "soft-KL regularizer needs eps > 0, got {eps}"
                )));
            }
            let value = p.soft_prior_kl(eps)?;
            let grad = ParamGrad {
                gamma: T::zero(),
                nu: half / p.nu - half * eps / (p.nu * p.nu),
                alpha: (p.alpha - one - eps) * trigamma(p.alpha),
                beta: T::zero(),
            };
            Ok((value, grad))
        }
    }
}

/// Full per-sample training loss `nll + lambda * regularizer`, with the
/// gradient of the total. With `lambda == 0` the total is bit-for-bit the
/// NLL (the regularizer is still reported for diagnostics).
pub fn total_loss<T: Real>(
    y: T,
    p: &EvidentialParams<T>,
    config: &LossConfig<T>,
) -> Result<LossBreakdown<T>> {
    config.validate()?;
    let (nll, nll_grad) = evidential_nll_grad(y, p)?;
    let (reg, reg_grad) = evidence_regularizer_grad(y, p, config.regularizer)?;
    let lam = config.lambda;
    if lam == T::zero() {
        return Ok(LossBreakdown {
            nll,
            regularizer: reg,
            total: nll,
            grad: nll_grad,
        });
    }
    Ok(LossBreakdown {
        nll,
        regularizer: reg,
        total: nll + lam * reg,
        grad: ParamGrad {
            gamma: nll_grad.gamma + lam * reg_grad.gamma,
            nu: nll_grad.nu + lam * reg_grad.nu,
            alpha: nll_grad.alpha + lam * reg_grad.alpha,
            beta: nll_grad.beta + lam * reg_grad.beta,
        },
    })
}

/// Gaussian NLL value and gradients, for the maximum-likelihood and
/// ensemble/dropout baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLoss<T> {
    pub nll: T,
    /// Derivative with respect to the predicted mean.
    pub d_mean: T,
    /// Derivative with respect to the predicted variance.
    pub d_var: T,
}

/// Negative log density of `y` under `Normal(mean, var)`:
/// `ln(2 pi var) / 2 + (y - mean)^2 / (2 var)`.
pub fn gaussian_nll<T: Real>(y: T, mean: T, var: T) -> Result<GaussianLoss<T>> {
    check_target(y)?;
    if !mean.is_finite() || !(var.is_finite() && var > T::zero()) {
        return Err(Error::Domain(format!(
            "Gaussian NLL needs finite mean and var > 0, got mean = {mean}, \
             var = {var}"
        )));
    }
    let half = from_f64::<T>(0.5);
    let two_pi = T::PI() + T::PI();
    let err = y - mean;
    let nll = half * (two_pi * var).ln() + err * err / (var + var);
    Ok(GaussianLoss {
        nll,
        d_mean: -err / var,
        d_var: half / var - err * err / (var + var) / var,
    })
}
