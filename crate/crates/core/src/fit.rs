//! Maximum-likelihood fits of candidate lifetime models and the
//! Kolmogorov–Smirnov distance used to choose between them.
//!
//! Parameter slots per model:
//!
//! | model           | `param1`         | `param2`         | CDF                                  |
//! |-----------------|------------------|------------------|--------------------------------------|
//! | inverse Weibull | shape `γ`        | scale `λ`        | `exp(-λ t^-γ)`                       |
//! | Weibull         | shape `γ`        | rate `λ`         | `1 - exp(-(λ t)^γ)`                  |
//! | lognormal       | mean of `ln t`   | sd of `ln t`     | `Φ((ln t - μ)/σ)`                    |
//! | log-logistic    | location `ln t`  | scale of `ln t`  | `1 / (1 + exp(-(ln t - μ)/s))`       |
//!
//! The negative log-likelihood (NLC) is always on the original time scale.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

/// Positive failure times, stored in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeSample {
    times: Vec<f64>,
}

impl LifetimeSample {
    pub fn new(mut times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSample("no observations".into()));
        }
        if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidSample(format!("failure times must be positive, found {bad}")));
        }
        times.sort_by(f64::total_cmp);
        Ok(Self { times })
    }

    /// Parses positive decimals separated by whitespace, commas or newlines.
    /// Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            for token in line.split(|ch: char| ch == ',' || ch.is_whitespace()) {
                if token.is_empty() {
                    continue;
                }
                let value: f64 = token
                    .parse()
                    .map_err(|_| Error::Data(format!("not a number: {token:?}")))?;
                times.push(value);
            }
        }
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Breakdown times (minutes) of insulating fluid at 30 kV, from Lawless.
pub const LAWLESS_30KV: &str = include_str!("../data/lawless_30kv.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    InverseWeibull,
    Weibull,
    Lognormal,
    LogLogistic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::InverseWeibull,
        ModelKind::Weibull,
        ModelKind::Lognormal,
        ModelKind::LogLogistic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::InverseWeibull => "inverse-weibull",
            ModelKind::Weibull => "weibull",
            ModelKind::Lognormal => "lognormal",
            ModelKind::LogLogistic => "log-logistic",
        }
    }

    pub fn fit(&self, sample: &LifetimeSample) -> Result<FitResult> {
        match self {
            ModelKind::InverseWeibull => fit_inverse_weibull(sample),
            ModelKind::Weibull => fit_weibull(sample),
            ModelKind::Lognormal => fit_lognormal(sample),
            ModelKind::LogLogistic => fit_loglogistic(sample),
        }
    }

    /// Distribution function with the given parameter slots.
    pub fn cdf(&self, param1: f64, param2: f64, t: f64) -> f64 {
        match self {
            ModelKind::InverseWeibull => (-param2 * t.powf(-param1)).exp(),
            ModelKind::Weibull => -(-(param2 * t).powf(param1)).exp_m1(),
            ModelKind::Lognormal => normal_cdf((t.ln() - param1) / param2),
            ModelKind::LogLogistic => 1.0 / (1.0 + (-(t.ln() - param1) / param2).exp()),
        }
    }

    /// Log density on the time scale.
    pub fn ln_pdf(&self, param1: f64, param2: f64, t: f64) -> f64 {
        let y = t.ln();
        match self {
            ModelKind::InverseWeibull => {
                param1.ln() + param2.ln() - (param1 + 1.0) * y - param2 * (-param1 * y).exp()
            }
            ModelKind::Weibull => {
                let z = param1 * (param2.ln() + y);
                param1.ln() + param2.ln() + (param1 - 1.0) * (param2.ln() + y) - z.exp()
            }
            ModelKind::Lognormal => {
                let z = (y - param1) / param2;
                -0.5 * (2.0 * PI).ln() - param2.ln() - 0.5 * z * z - y
            }
            ModelKind::LogLogistic => {
                let z = (y - param1) / param2;
                -z.abs() - 2.0 * (-z.abs()).exp().ln_1p() - param2.ln() - y
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inverse-weibull" | "inweibull" | "iw" => Ok(ModelKind::InverseWeibull),
            "weibull" => Ok(ModelKind::Weibull),
            "lognormal" => Ok(ModelKind::Lognormal),
            "log-logistic" | "loglogistic" => Ok(ModelKind::LogLogistic),
            other => Err(Error::Data(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub param1: f64,
    pub param2: f64,
    /// Negative log-likelihood at the estimate.
    pub nlc: f64,
    /// Kolmogorov–Smirnov distance between the sample and the fitted CDF.
    pub ks: f64,
}

impl FitResult {
    fn finish(model: ModelKind, param1: f64, param2: f64, sample: &LifetimeSample) -> Result<Self> {
        let nlc = negative_log_likelihood(model, param1, param2, sample);
        if !nlc.is_finite() || !param1.is_finite() || !param2.is_finite() {
            return Err(Error::NonConvergent {
                model: model.name(),
                reason: "non-finite likelihood at the estimate".into(),
            });
        }
        let ks = ks_statistic(sample, |t| model.cdf(param1, param2, t));
        Ok(Self {
            model,
            param1,
            param2,
            nlc,
            ks,
        })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.model.cdf(self.param1, self.param2, t)
    }
}

/// `-Σ ln f(t_i)` under `model`.
pub fn negative_log_likelihood(model: ModelKind, param1: f64, param2: f64, sample: &LifetimeSample) -> f64 {
    -sample
        .times()
        .iter()
        .map(|&t| model.ln_pdf(param1, param2, t))
        .sum::<f64>()
}

const SHAPE_RANGE: (f64, f64) = (1e-2, 1e2);
const SCAN_POINTS: usize = 400;
const GOLDEN_TOL: f64 = 1e-10;

/// Maximises a smooth unimodal-near-optimum function on `[lo, hi]`: a
/// log-spaced scan brackets the best grid point, golden-section refines it.
/// Fails when the maximum sits on the boundary.
fn maximize_log_scan(f: impl Fn(f64) -> f64, lo: f64, hi: f64, model: &'static str) -> Result<f64> {
    let step = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo * (step * i as f64).exp()).collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NonConvergent {
            model,
            reason: "likelihood is not finite anywhere on the search range".into(),
        })?;
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::NonConvergent {
            model,
            reason: format!("maximum at the search boundary ({})", grid[best]),
        });
    }
    Ok(golden_section_max(&f, grid[best - 1], grid[best + 1]))
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > GOLDEN_TOL * (1.0 + a.abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// `ln Σ exp(x_i)` without overflow.
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn require_spread(sample: &LifetimeSample, model: &'static str) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::InvalidSample(format!("{model} fit needs at least two observations")));
    }
    let t = sample.times();
    if t[0] == t[t.len() - 1] {
        return Err(Error::NonConvergent {
            model,
            reason: "all observations are equal".into(),
        });
    }
    Ok(())
}

/// Inverse Weibull MLE. For fixed `γ` the scale has the closed form
/// `λ(γ) = n / Σ t_i^-γ`; the profiled likelihood is maximised over `γ`.
pub fn fit_inverse_weibull(sample: &LifetimeSample) -> Result<FitResult> {
    const NAME: &str = "inverse-weibull";
    require_spread(sample, NAME)?;
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.times().iter().map(|t| t.ln()).collect();
    let sum_log: f64 = logs.iter().sum();
    // ln λ(γ) = ln n - ln Σ exp(-γ ln t)
    let ln_scale = |g: f64| n.ln() - log_sum_exp(logs.iter().map(|&y| -g * y));
    let profile = |g: f64| n * g.ln() + n * ln_scale(g) - (g + 1.0) * sum_log - n;
    let gamma = maximize_log_scan(profile, SHAPE_RANGE.0, SHAPE_RANGE.1, NAME)?;
    FitResult::finish(ModelKind::InverseWeibull, gamma, ln_scale(gamma).exp(), sample)
}

/// Weibull MLE with the rate parameterisation `1 - exp(-(λt)^γ)`; `λ^γ` is
/// profiled as `n / Σ t_i^γ`.
pub fn fit_weibull(sample: &LifetimeSample) -> Result<FitResult> {
    const NAME: &str = "weibull";
    require_spread(sample, NAME)?;
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.times().iter().map(|t| t.ln()).collect();
    let sum_log: f64 = logs.iter().sum();
    let ln_theta = |g: f64| n.ln() - log_sum_exp(logs.iter().map(|&y| g * y));
    let profile = |g: f64| n * g.ln() + n * ln_theta(g) + (g - 1.0) * sum_log - n;
    let gamma = maximize_log_scan(profile, SHAPE_RANGE.0, SHAPE_RANGE.1, NAME)?;
    let rate = (ln_theta(gamma) / gamma).exp();
    FitResult::finish(ModelKind::Weibull, gamma, rate, sample)
}

/// Lognormal MLE: mean and (biased) standard deviation of the log-times.
pub fn fit_lognormal(sample: &LifetimeSample) -> Result<FitResult> {
    const NAME: &str = "lognormal";
    require_spread(sample, NAME)?;
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.times().iter().map(|t| t.ln()).collect();
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    FitResult::finish(ModelKind::Lognormal, mean, var.sqrt(), sample)
}

/// Log-logistic MLE as a logistic fit to the log-times. For fixed scale the
/// location solves `Σ tanh((y_i - μ) / 2s) = 0`, which is monotone in `μ`.
pub fn fit_loglogistic(sample: &LifetimeSample) -> Result<FitResult> {
    const NAME: &str = "log-logistic";
    require_spread(sample, NAME)?;
    let logs: Vec<f64> = sample.times().iter().map(|t| t.ln()).collect();
    let (lo, hi) = (logs[0], logs[logs.len() - 1]);
    let location = |s: f64| {
        let score = |mu: f64| logs.iter().map(|&y| ((y - mu) / (2.0 * s)).tanh()).sum::<f64>();
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if score(mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let loglik = |s: f64| -negative_log_likelihood(ModelKind::LogLogistic, location(s), s, sample);
    let spread = hi - lo;
    let scale = maximize_log_scan(loglik, spread * 1e-4, spread * 1e2, NAME)?;
    FitResult::finish(ModelKind::LogLogistic, location(scale), scale, sample)
}

/// One-sample Kolmogorov–Smirnov distance
/// `max_i max(i/n - F(t_(i)), F(t_(i)) - (i-1)/n)`.
pub fn ks_statistic(sample: &LifetimeSample, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    sample
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = cdf(t);
            let i = i as f64;
            ((i + 1.0) / n - f).max(f - i / n)
        })
        .fold(0.0, f64::max)
}

/// Fits each requested model; a failing model does not stop the others.
pub fn goodness_table(sample: &LifetimeSample, models: &[ModelKind]) -> Vec<(ModelKind, Result<FitResult>)> {
    models.iter().map(|m| (*m, m.fit(sample))).collect()
}

/// Model with the smallest K-S distance among the successful fits.
pub fn best_by_ks(rows: &[(ModelKind, Result<FitResult>)]) -> Option<ModelKind> {
    rows.iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .min_by(|a, b| a.ks.total_cmp(&b.ks))
        .map(|r| r.model)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}
