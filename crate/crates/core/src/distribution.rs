//! Inverse Weibull lifetime law and the failure probabilities of a truncated test.
//!
//! The density is `f(t) = γ λ t^-(γ+1) exp(-λ t^-γ)` for `t > 0`, with
//! distribution function `F(t) = exp(-λ t^-γ)`. A unit put on test for
//! `t0 = a·m0` time units fails before truncation with probability
//!
//! ```text
//! p = exp(-(m/m0)^γ · ln 2 · a^-γ)
//! ```
//!
//! which depends on the shape only, never on the scale.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{open_unit, positive, Result};

/// Shape/scale pair of an inverse Weibull lifetime distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeModel {
    gamma: f64,
    lambda: f64,
}

impl LifetimeModel {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            gamma: positive("gamma", gamma)?,
            lambda: positive("lambda", lambda)?,
        })
    }

    /// Model with shape `gamma` whose median equals `median`.
    pub fn with_median(gamma: f64, median: f64) -> Result<Self> {
        let gamma = positive("gamma", gamma)?;
        let median = positive("median", median)?;
        Self::new(gamma, LN_2 * median.powf(gamma))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        let t = positive("t", t)?;
        let ln_t = t.ln();
        let tail = self.lambda * (-self.gamma * ln_t).exp();
        Ok((self.gamma.ln() + self.lambda.ln() - (self.gamma + 1.0) * ln_t - tail).exp())
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        let t = positive("t", t)?;
        Ok((-self.lambda * (-self.gamma * t.ln()).exp()).exp())
    }

    /// The `p`-quantile `(-λ / ln p)^(1/γ)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let p = open_unit("p", p)?;
        Ok((-self.lambda / p.ln()).powf(self.gamma.recip()))
    }

    pub fn median(&self) -> f64 {
        (self.lambda / LN_2).powf(self.gamma.recip())
    }
}

/// Lot quality relative to the specified life, the truncation multiplier and
/// the shape of the lifetime law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualitySetting {
    ratio: f64,
    multiplier: f64,
    gamma: f64,
}

impl QualitySetting {
    pub fn new(ratio: f64, multiplier: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            ratio: positive("ratio", ratio)?,
            multiplier: positive("multiplier", multiplier)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Natural log of the failure probability, `-(ratio/a)^γ · ln 2`.
    ///
    /// Stays exact where the probability itself would underflow.
    pub fn ln_failure_prob(&self) -> f64 {
        -LN_2 * (self.gamma * (self.ratio / self.multiplier).ln()).exp()
    }

    pub fn failure_prob(&self) -> f64 {
        self.ln_failure_prob().exp()
    }
}

/// Probability that a unit fails before `t0 = a·m0` when the true median is
/// `ratio·m0`.
pub fn failure_prob(ratio: f64, a: f64, gamma: f64) -> Result<f64> {
    Ok(QualitySetting::new(ratio, a, gamma)?.failure_prob())
}

/// Failure probability for a plan stated against the `p`-quantile: the test
/// runs for `ã·θ0` and the true quantile is `theta_ratio·θ0`.
pub fn failure_prob_percentile(theta_ratio: f64, a_tilde: f64, gamma: f64, p: f64) -> Result<f64> {
    let theta_ratio = positive("theta_ratio", theta_ratio)?;
    let a_tilde = positive("a_tilde", a_tilde)?;
    let gamma = positive("gamma", gamma)?;
    let p = open_unit("p", p)?;
    let exponent = (gamma * (theta_ratio / a_tilde).ln()).exp() * -p.ln();
    Ok((-exponent).exp())
}
