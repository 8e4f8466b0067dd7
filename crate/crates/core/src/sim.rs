//! Monte Carlo execution of the truncated life test procedures.
//!
//! Each replicate draws actual inverse Weibull lifetimes by inversion and
//! counts the units that fail before `t0`. Replicate `k` uses ChaCha8
//! stream `k` of the generator keyed by the seed, so unit draws are a pure
//! function of `(seed, replicate, unit)` and the report does not depend on
//! how replicates are spread across threads.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::LifetimeModel;
use crate::error::{open_unit, positive, Error, Result};
use crate::plan::{DoublePlan, GroupPlan, SinglePlan};

/// Inverse-CDF draw `(-λ / ln u)^(1/γ)`.
pub fn sample_lifetime(model: &LifetimeModel, u: f64) -> Result<f64> {
    let u = open_unit("u", u)?;
    Ok(lifetime_unchecked(model, u))
}

#[inline]
fn lifetime_unchecked(model: &LifetimeModel, u: f64) -> f64 {
    (-model.lambda() / u.ln()).powf(model.gamma().recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: LifetimeModel,
    /// Truncation time of the test.
    pub t0: f64,
    /// Number of simulated lots.
    pub reps: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: LifetimeModel, t0: f64, reps: u64, seed: u64) -> Result<Self> {
        positive("t0", t0)?;
        if reps == 0 {
            return Err(Error::Domain {
                name: "reps",
                expected: "at least 1",
                value: 0.0,
            });
        }
        Ok(Self { model, t0, reps, seed })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub accepted: u64,
    pub rejected: u64,
    /// Lots that needed a second sample (double plans only).
    pub second_sample: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub accept_rate: f64,
    pub accept_rate_stderr: f64,
    /// Mean number of units put on test per lot.
    pub mean_sample_number: f64,
    pub decisions: DecisionCounts,
    pub units_tested: u64,
    pub units_failed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    decisions: DecisionCounts,
    units_tested: u64,
    units_failed: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.decisions.accepted += other.decisions.accepted;
        self.decisions.rejected += other.decisions.rejected;
        self.decisions.second_sample += other.decisions.second_sample;
        self.units_tested += other.units_tested;
        self.units_failed += other.units_failed;
        self
    }

    fn into_report(self, reps: u64) -> SimReport {
        let n = reps as f64;
        let rate = self.decisions.accepted as f64 / n;
        SimReport {
            accept_rate: rate,
            accept_rate_stderr: (rate * (1.0 - rate) / n).sqrt(),
            mean_sample_number: self.units_tested as f64 / n,
            decisions: self.decisions,
            units_tested: self.units_tested,
            units_failed: self.units_failed,
        }
    }
}

/// Puts units on test one draw at a time for a single replicate.
struct LotTester<'a> {
    rng: ChaCha8Rng,
    config: &'a SimConfig,
    tested: u64,
    failed: u64,
}

impl<'a> LotTester<'a> {
    fn new(config: &'a SimConfig, replicate: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(replicate);
        Self {
            rng,
            config,
            tested: 0,
            failed: 0,
        }
    }

    /// Tests `units` fresh units and returns how many fail before `t0`.
    fn failures(&mut self, units: u32) -> u32 {
        let mut count = 0;
        for _ in 0..units {
            let u: f64 = self.rng.sample(Open01);
            if lifetime_unchecked(&self.config.model, u) <= self.config.t0 {
                count += 1;
            }
        }
        self.tested += u64::from(units);
        self.failed += u64::from(count);
        count
    }

    fn finish(self, accepted: bool, second: bool) -> Tally {
        Tally {
            decisions: DecisionCounts {
                accepted: u64::from(accepted),
                rejected: u64::from(!accepted),
                second_sample: u64::from(second),
            },
            units_tested: self.tested,
            units_failed: self.failed,
        }
    }
}

fn run(config: &SimConfig, lot: impl Fn(&mut LotTester) -> (bool, bool) + Sync) -> SimReport {
    (0..config.reps)
        .into_par_iter()
        .map(|k| {
            let mut tester = LotTester::new(config, k);
            let (accepted, second) = lot(&mut tester);
            tester.finish(accepted, second)
        })
        .reduce(Tally::default, Tally::merge)
        .into_report(config.reps)
}

/// Runs the double-sampling procedure: accept on at most `c1` first-sample
/// failures, reject above `c2`, otherwise test `n2` more units and accept
/// iff the combined count is at most `c2`. The second sample is drawn only
/// when needed.
pub fn simulate_double(plan: &DoublePlan, config: &SimConfig) -> SimReport {
    run(config, |lot| {
        let first = lot.failures(plan.n1());
        if first <= plan.c1() {
            (true, false)
        } else if first > plan.c2() {
            (false, false)
        } else {
            let total = first + lot.failures(plan.n2());
            (total <= plan.c2(), true)
        }
    })
}

/// Tests all `g` groups of `r` units; accepts iff no group exceeds `c`.
pub fn simulate_group(plan: &GroupPlan, config: &SimConfig) -> SimReport {
    run(config, |lot| {
        let mut accepted = true;
        for _ in 0..plan.g() {
            if lot.failures(plan.r()) > plan.c() {
                accepted = false;
            }
        }
        (accepted, false)
    })
}

/// Accepts iff at most `c` of the `n` units fail.
pub fn simulate_single(plan: &SinglePlan, config: &SimConfig) -> SimReport {
    run(config, |lot| (lot.failures(plan.n()) <= plan.c(), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn config(gamma: f64, median: f64, t0: f64, reps: u64, seed: u64) -> SimConfig {
        SimConfig::new(LifetimeModel::with_median(gamma, median).unwrap(), t0, reps, seed).unwrap()
    }

    #[test]
    fn inversion_matches_cdf() {
        let model = LifetimeModel::new(0.75, 3.0).unwrap();
        assert_eq!(sample_lifetime(&model, 0.5).unwrap(), model.median());
        for u in [1e-9, 0.1, 0.5, 0.9, 1.0 - 1e-15] {
            let t = sample_lifetime(&model, u).unwrap();
            assert!(t.is_finite());
            assert_relative_eq!(model.cdf(t).unwrap(), u, max_relative = 1e-12);
        }
        assert!(sample_lifetime(&model, 0.0).is_err());
        assert!(sample_lifetime(&model, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        let model = LifetimeModel::new(1.0, 1.0).unwrap();
        assert!(SimConfig::new(model, 0.0, 10, 1).is_err());
        assert!(SimConfig::new(model, 1.0, 0, 1).is_err());
    }

    #[test]
    fn tiny_truncation_time_always_accepts() {
        let plan = DoublePlan::new(9, 7, 0, 2).unwrap();
        let report = simulate_double(&plan, &config(1.0, 1.0, 1e-12, 2000, 3));
        assert_eq!(report.accept_rate, 1.0);
        assert_eq!(report.mean_sample_number, 9.0);
        assert_eq!(report.accept_rate_stderr, 0.0);
    }

    #[test]
    fn full_acceptance_numbers_always_accept() {
        let cfg = config(0.75, 1.0, 10.0, 500, 9);
        assert_eq!(simulate_group(&GroupPlan::new(3, 4, 4).unwrap(), &cfg).accept_rate, 1.0);
        assert_eq!(simulate_single(&SinglePlan::new(5, 5).unwrap(), &cfg).accept_rate, 1.0);
    }

    #[test]
    fn counts_are_consistent() {
        let plan = DoublePlan::new(12, 8, 0, 3).unwrap();
        let r = simulate_double(&plan, &config(0.75, 1.0, 0.5, 5000, 11));
        assert_eq!(r.decisions.accepted + r.decisions.rejected, 5000);
        assert!(r.decisions.second_sample <= 5000);
        assert_eq!(r.units_tested, 12 * 5000 + 8 * r.decisions.second_sample);
    }

    #[test]
    fn same_seed_same_report() {
        let plan = DoublePlan::new(39, 12, 7, 11).unwrap();
        let cfg = config(0.75, 1.0, 0.5, 3000, 42);
        assert_eq!(simulate_double(&plan, &cfg), simulate_double(&plan, &cfg));
        let other = SimConfig { seed: 43, ..cfg };
        assert_ne!(simulate_double(&plan, &cfg), simulate_double(&plan, &other));
    }
}
