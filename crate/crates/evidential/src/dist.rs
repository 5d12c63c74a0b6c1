//! Predictive distributions: location-scale Student-t and Gaussian helpers.
//!
//! The Student-t here is parameterized by a *squared* scale to match how it
//! falls out of the NIG marginalization; quantiles are found by bisection on
//! the CDF, which keeps one well-tested code path for every inverse lookup.

use crate::error::{Error, Result};
use crate::real::{from_f64, Real};
use crate::special::{betainc_reg, digamma, erf, ln_gamma};

/// Location-scale Student-t distribution with `dof` degrees of freedom and
/// squared scale `scale2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT<T> {
    pub location: T,
    pub scale2: T,
    pub dof: T,
}

impl<T: Real> StudentT<T> {
    /// Builds the distribution, rejecting non-positive scale or dof.
    pub fn new(location: T, scale2: T, dof: T) -> Result<Self> {
        if !(location.is_finite() && scale2 > T::zero() && scale2.is_finite()) {
            return Err(Error::Domain(format!(
                "Student-t needs finite location and scale2 > 0, got location = \
                 {location}, scale2 = {scale2}"
            )));
        }
        if !(dof > T::zero() && dof.is_finite()) {
            return Err(Error::Domain(format!(
                "Student-t needs dof > 0, got {dof}"
            )));
        }
        Ok(Self {
            location,
            scale2,
            dof,
        })
    }

    /// Log density at `y`.
    pub fn ln_pdf(&self, y: T) -> T {
        let half = from_f64::<T>(0.5);
        let k = self.dof;
        let u2 = (y - self.location) * (y - self.location) / self.scale2;
        ln_gamma(half * (k + T::one())) - ln_gamma(half * k)
            - half * (T::PI() * k).ln()
            - half * self.scale2.ln()
            - half * (k + T::one()) * (u2 / k).ln_1p()
    }

    /// Density at `y`.
    pub fn pdf(&self, y: T) -> T {
        self.ln_pdf(y).exp()
    }

    /// Cumulative distribution function via the regularized incomplete beta.
    pub fn cdf(&self, y: T) -> T {
        let half = from_f64::<T>(0.5);
        let k = self.dof;
        let u = (y - self.location) / self.scale2.sqrt();
        if u == T::zero() {
            return half;
        }
        let x = k / (k + u * u);
        let tail = half * betainc_reg(half * k, half, x);
        if u > T::zero() {
            T::one() - tail
        } else {
            tail
        }
    }

    /// Quantile function by bisection on [`Self::cdf`]; converges to well
    /// below 1e-10 in the standardized coordinate.
    pub fn quantile(&self, p: T) -> Result<T> {
        let scale = self.scale2.sqrt();
        bisect_quantile(p, self.location, scale, |y| self.cdf(y))
    }

    /// Differential entropy in nats.
    pub fn entropy(&self) -> T {
        let half = from_f64::<T>(0.5);
        let k = self.dof;
        let a = half * (k + T::one());
        let b = half * k;
        a * (digamma(a) - digamma(b)) + half * k.ln() + half * T::PI().ln()
            + ln_gamma(b)
            - ln_gamma(a)
            + half * self.scale2.ln()
    }

    /// Central interval covering probability `level`, symmetric in CDF mass.
    pub fn central_interval(&self, level: T) -> Result<(T, T)> {
        let half = from_f64::<T>(0.5);
        let lo_p = half * (T::one() - level);
        let lo = self.quantile(lo_p)?;
        // Symmetry about the location avoids a second bisection.
        Ok((lo, self.location + self.location - lo))
    }
}

/// Gaussian log density with variance parameterization.
pub fn normal_ln_pdf<T: Real>(y: T, mean: T, var: T) -> T {
    let half = from_f64::<T>(0.5);
    let two_pi = T::PI() + T::PI();
    let d = y - mean;
    -half * (two_pi * var).ln() - d * d / (var + var)
}

/// Gaussian CDF via the error function.
pub fn normal_cdf<T: Real>(y: T, mean: T, var: T) -> T {
    let half = from_f64::<T>(0.5);
    let z = (y - mean) / (var + var).sqrt();
    half * (T::one() + erf(z))
}

/// Gaussian quantile by bisection on [`normal_cdf`].
pub fn normal_quantile<T: Real>(p: T, mean: T, var: T) -> Result<T> {
    let sd = var.sqrt();
    bisect_quantile(p, mean, sd, |y| normal_cdf(y, mean, var))
}

/// Gaussian differential entropy `0.5 ln(2 pi e var)`.
pub fn normal_entropy<T: Real>(var: T) -> T {
    let half = from_f64::<T>(0.5);
    let two_pi = T::PI() + T::PI();
    half * (two_pi * var).ln() + half
}

/// Central interval of a Gaussian at coverage `level`.
pub fn normal_central_interval<T: Real>(level: T, mean: T, var: T) -> Result<(T, T)> {
    let half = from_f64::<T>(0.5);
    let lo = normal_quantile(half * (T::one() - level), mean, var)?;
    Ok((lo, mean + mean - lo))
}

/// Shared quantile bisection for unimodal location-scale CDFs. The bracket
/// starts at +-8 scales around the location and doubles until it straddles
/// `p`; 200 halvings then push the interval width to the floating-point
/// floor (far below the 1e-10 target at any practical scale).
fn bisect_quantile<T: Real>(p: T, location: T, scale: T, cdf: impl Fn(T) -> T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!(
            "quantile needs p strictly inside (0, 1), got {p}"
        )));
    }
    let mut half_width = from_f64::<T>(8.0) * scale.max(T::min_positive_value());
    let mut lo = location - half_width;
    let mut hi = location + half_width;
    for _ in 0..60 {
        if cdf(lo) <= p && cdf(hi) >= p {
            break;
        }
        half_width = half_width + half_width;
        lo = location - half_width;
        hi = location + half_width;
    }
    for _ in 0..200 {
        let mid = from_f64::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval is at floating-point resolution
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(from_f64::<T>(0.5) * (lo + hi))
}
