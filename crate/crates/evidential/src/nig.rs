//! Normal-Inverse-Gamma (NIG) evidential distribution.
//!
//! A network head emits four hyperparameters `(gamma, nu, alpha, beta)`
//! placing an NIG prior over the mean and variance of a Gaussian likelihood:
//! `mu ~ Normal(gamma, sigma2 / nu)`, `sigma2 ~ InvGamma(alpha, beta)`.
//! Everything useful falls out in closed form from one forward pass:
//! the point prediction, the expected data noise (aleatoric uncertainty),
//! the variance of the mean estimate (epistemic uncertainty), and the
//! marginal likelihood of an observation (a Student-t density).

use crate::dist::StudentT;
use crate::error::{Error, Result};
use crate::real::{from_f64, Real};
use crate::special::{digamma, ln_gamma};

/// Hyperparameters of the NIG distribution.
///
/// Domain: `gamma` finite, `nu > 0`, `alpha > 1` (strict, so the aleatoric
/// mean `beta / (alpha - 1)` exists), `beta > 0`, all finite. The struct is
/// plain data; operations validate on entry and report *every* violated
/// constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidentialParams<T> {
    /// Predicted mean location.
    pub gamma: T,
    /// Virtual observations backing the mean estimate (`> 0`).
    pub nu: T,
    /// Inverse-gamma shape over the noise variance (`> 1`).
    pub alpha: T,
    /// Inverse-gamma scale over the noise variance (`> 0`).
    pub beta: T,
}

/// A single violated domain constraint, with the offending value.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ParamViolation {
    #[error("gamma must be finite, got {0}")]
    GammaNotFinite(f64),
    #[error("nu must be finite and > 0, got {0}")]
    NuNotPositive(f64),
    #[error("alpha must be finite and > 1, got {0}")]
    AlphaNotAboveOne(f64),
    #[error("beta must be finite and > 0, got {0}")]
    BetaNotPositive(f64),
}

/// Point prediction plus the two disentangled uncertainty components, all
/// read off the NIG hyperparameters without sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveSummary<T> {
    /// `E[mu] = gamma`.
    pub prediction: T,
    /// Expected data noise `E[sigma2] = beta / (alpha - 1)`.
    pub aleatoric: T,
    /// Uncertainty in the mean `Var[mu] = beta / (nu (alpha - 1))`.
    pub epistemic: T,
}

impl<T: Real> PredictiveSummary<T> {
    /// Total predictive variance (aleatoric + epistemic), which equals the
    /// variance of the marginal Student-t when it exists.
    pub fn total_variance(&self) -> T {
        self.aleatoric + self.epistemic
    }
}

impl<T: Real> EvidentialParams<T> {
    /// Builds validated parameters; lists every violated constraint on error.
    pub fn new(gamma: T, nu: T, alpha: T, beta: T) -> Result<Self> {
        let p = Self {
            gamma,
            nu,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Returns all violated domain constraints (empty when valid).
    pub fn violations(&self) -> Vec<ParamViolation> {
        let as_f64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let mut out = Vec::new();
        if !self.gamma.is_finite() {
            out.push(ParamViolation::GammaNotFinite(as_f64(self.gamma)));
        }
        if !(self.nu.is_finite() && self.nu > T::zero()) {
            out.push(ParamViolation::NuNotPositive(as_f64(self.nu)));
        }
        if !(self.alpha.is_finite() && self.alpha > T::one()) {
            out.push(ParamViolation::AlphaNotAboveOne(as_f64(self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > T::zero()) {
            out.push(ParamViolation::BetaNotPositive(as_f64(self.beta)));
        }
        out
    }

    /// Checks the domain constraints, reporting every violation at once.
    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// Total evidence `2 nu + alpha`: the count of virtual observations the
    /// parameters claim to have seen.
    pub fn total_evidence(&self) -> T {
        self.nu + self.nu + self.alpha
    }

    /// Prediction and disentangled uncertainties.
    ///
    /// `epistemic * nu == aleatoric` holds to within a couple of ulps
    /// because the epistemic term is computed by dividing the aleatoric
    /// term by `nu`.
    pub fn predictive_summary(&self) -> Result<PredictiveSummary<T>> {
        self.validate()?;
        let aleatoric = self.beta / (self.alpha - T::one());
        Ok(PredictiveSummary {
            prediction: self.gamma,
            aleatoric,
            epistemic: aleatoric / self.nu,
        })
    }

    /// Log of the joint NIG density at `(mu, sigma2)`.
    pub fn ln_pdf(&self, mu: T, sigma2: T) -> Result<T> {
        self.validate()?;
        if !mu.is_finite() || !(sigma2.is_finite() && sigma2 > T::zero()) {
            return Err(Error::Domain(format!(
                "NIG density needs finite mu and sigma2 > 0, got mu = {mu}, \
                 sigma2 = {sigma2}"
            )));
        }
        let half = from_f64::<T>(0.5);
        let two_pi = T::PI() + T::PI();
        let d = self.gamma - mu;
        Ok(self.alpha * self.beta.ln() + half * self.nu.ln()
            - ln_gamma(self.alpha)
            - half * two_pi.ln()
            - (self.alpha + T::one() + half) * sigma2.ln()
            - (self.beta + self.beta + self.nu * d * d) / (sigma2 + sigma2))
    }

    /// Joint NIG density at `(mu, sigma2)`.
    pub fn pdf(&self, mu: T, sigma2: T) -> Result<T> {
        Ok(self.ln_pdf(mu, sigma2)?.exp())
    }

    /// Marginal (predictive) distribution of an observation: a Student-t
    /// with location `gamma`, squared scale `beta (1 + nu) / (nu alpha)`,
    /// and `2 alpha` degrees of freedom.
    pub fn predictive(&self) -> Result<StudentT<T>> {
        self.validate()?;
        let scale2 = self.beta * (T::one() + self.nu) / (self.nu * self.alpha);
        StudentT::new(self.gamma, scale2, self.alpha + self.alpha)
    }

    /// Marginal likelihood of observing `y`: the Gaussian likelihood
    /// integrated over the full NIG prior.
    pub fn model_evidence(&self, y: T) -> Result<T> {
        Ok(self.ln_evidence(y)?.exp())
    }

    /// Log marginal likelihood of `y`.
    pub fn ln_evidence(&self, y: T) -> Result<T> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("model evidence needs finite y, got {y}")));
        }
        Ok(self.predictive()?.ln_pdf(y))
    }

    /// Differential entropy of the marginal Student-t predictive; a scalar
    /// "how spread out is my forecast" score used for OOD detection.
    pub fn predictive_entropy(&self) -> Result<T> {
        Ok(self.predictive()?.entropy())
    }

    /// KL divergence `KL(self || other)` between two NIG distributions.
    ///
    /// Closed form, assembled from the factorization into a Gaussian over
    /// the mean and an inverse-gamma over the variance:
    ///
    /// ```text
    /// KL = a1 n2 (g1 - g2)^2 / (2 b1) + n2 / (2 n1) - 1/2 + ln(n1 / n2) / 2
    ///    + a2 ln(b1 / b2) - ln G(a1) + ln G(a2) + (a1 - a2) psi(a1)
    ///    - (b1 - b2) a1 / b1
    /// ```
    pub fn kl_divergence(&self, other: &Self) -> Result<T> {
        self.validate()?;
        other.validate()?;
        let half = from_f64::<T>(0.5);
        let (g1, n1, a1, b1) = (self.gamma, self.nu, self.alpha, self.beta);
        let (g2, n2, a2, b2) = (other.gamma, other.nu, other.alpha, other.beta);
        let d = g1 - g2;
        let gauss = half * a1 / b1 * n2 * d * d + half * n2 / n1 - half
            + half * (n1 / n2).ln();
        let inv_gamma = a2 * (b1 / b2).ln() - ln_gamma(a1) + ln_gamma(a2)
            + (a1 - a2) * digamma(a1)
            - (b1 - b2) * a1 / b1;
        Ok(gauss + inv_gamma)
    }

    /// KL divergence from `self` to the near-zero-evidence prior that keeps
    /// `gamma` and `beta` but shrinks the evidence parameters to `nu = eps`,
    /// `alpha = 1 + eps`.
    ///
    /// The hard zero-evidence prior (`nu = 0`, `alpha = 1`) sits outside the
    /// parameter domain and its KL diverges (the closed form below grows
    /// like `ln(1 / eps)`), so a small positive `eps` stands in for it.
    /// Matching `gamma` and `beta` makes their terms cancel exactly:
    ///
    /// ```text
    /// KL(p || prior) = eps / (2 nu) - 1/2 + ln(nu / eps) / 2
    ///                - ln G(alpha) + ln G(1 + eps) + (alpha - 1 - eps) psi(alpha)
    /// ```
    pub fn soft_prior_kl(&self, eps: T) -> Result<T> {
        self.validate()?;
        if !(eps.is_finite() && eps > T::zero()) {
            return Err(Error::Domain(format!(
                "soft prior KL needs eps > 0, got {eps}"
            )));
        }
        let half = from_f64::<T>(0.5);
        let one = T::one();
        Ok(half * eps / self.nu - half + half * (self.nu / eps).ln()
            - ln_gamma(self.alpha)
            + ln_gamma(one + eps)
            + (self.alpha - one - eps) * digamma(self.alpha))
    }
}

/// Joint NIG density at `(mu, sigma2)`; free-function form of
/// [`EvidentialParams::pdf`].
pub fn nig_pdf<T: Real>(p: &EvidentialParams<T>, mu: T, sigma2: T) -> Result<T> {
    p.pdf(mu, sigma2)
}

/// KL divergence between two NIG distributions; free-function form of
/// [`EvidentialParams::kl_divergence`].
pub fn nig_kl<T: Real>(p: &EvidentialParams<T>, q: &EvidentialParams<T>) -> Result<T> {
    p.kl_divergence(q)
}
