//! Plan design: the smallest plans meeting both risk constraints.
//!
//! A design problem fixes the consumer's risk `β` at quality ratio `r1`
//! and the producer's risk `α` at ratio `r2 > r1`. With
//! `p_i = failure_prob(r_i, a, γ)` a plan is feasible when
//!
//! ```text
//! P_a(p1) <= β   and   P_a(p2) >= 1 - α
//! ```
//!
//! Comparisons are exact on `f64` values with no slack. Double plans
//! minimise `ASN(p1)`, single plans minimise `n`, and group plans minimise
//! the number of groups for a fixed group size.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{cdf_prefix, BinomialTable, KahanSum, Tails};
use crate::distribution::failure_prob;
use crate::error::{open_unit, positive, Error, Result};
use crate::plan::{combine_stages, group_power, DoublePlan, GroupPlan, Plan, PlanEvaluation, SinglePlan};

/// Consumer/producer risks, quality ratios, truncation multiplier and shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    beta: f64,
    alpha: f64,
    r1: f64,
    r2: f64,
    a: f64,
    gamma: f64,
}

impl RiskSpec {
    pub fn new(beta: f64, alpha: f64, r1: f64, r2: f64, a: f64, gamma: f64) -> Result<Self> {
        let beta = open_unit("beta", beta)?;
        let alpha = open_unit("alpha", alpha)?;
        let r1 = positive("r1", r1)?;
        let r2 = positive("r2", r2)?;
        if r2 <= r1 {
            return Err(Error::Domain {
                name: "r2",
                expected: "greater than r1",
                value: r2,
            });
        }
        Ok(Self {
            beta,
            alpha,
            r1,
            r2,
            a: positive("a", a)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    /// The usual setting where the consumer's risk sits at `m = m0`.
    pub fn at_specified_life(beta: f64, alpha: f64, r2: f64, a: f64, gamma: f64) -> Result<Self> {
        Self::new(beta, alpha, 1.0, r2, a, gamma)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Failure probability at the consumer's quality level.
    pub fn p1(&self) -> f64 {
        failure_prob(self.r1, self.a, self.gamma).expect("validated spec")
    }

    /// Failure probability at the producer's quality level.
    pub fn p2(&self) -> f64 {
        failure_prob(self.r2, self.a, self.gamma).expect("validated spec")
    }

    /// Whether an evaluation meets both risk constraints.
    pub fn is_satisfied_by(&self, eval: &PlanEvaluation) -> bool {
        eval.p_accept_consumer <= self.beta && eval.p_accept_producer >= 1.0 - self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub n_max: u32,
    pub c_max: u32,
    pub g_max: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            n_max: 1000,
            c_max: 60,
            g_max: 5000,
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("n_max", self.n_max), ("c_max", self.c_max), ("g_max", self.g_max)] {
            if v == 0 {
                return Err(Error::Domain {
                    name,
                    expected: "at least 1",
                    value: 0.0,
                });
            }
        }
        if i32::try_from(self.g_max).is_err() {
            return Err(Error::Domain {
                name: "g_max",
                expected: "representable as i32",
                value: f64::from(self.g_max),
            });
        }
        Ok(())
    }
}

/// Result of a design search. Infeasibility is an ordinary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub plan: Option<Plan>,
    pub evaluation: Option<PlanEvaluation>,
    pub feasible: bool,
}

impl DesignOutcome {
    pub fn infeasible() -> Self {
        Self {
            plan: None,
            evaluation: None,
            feasible: false,
        }
    }

    /// Builds a feasible outcome, re-evaluating the plan from scratch.
    fn verified(spec: &RiskSpec, plan: Plan) -> Result<Self> {
        let evaluation = plan.evaluate(spec.p1(), spec.p2())?;
        if !spec.is_satisfied_by(&evaluation) {
            return Err(Error::InvalidPlan(format!(
                "search produced {plan} which fails re-verification"
            )));
        }
        Ok(Self {
            plan: Some(plan),
            evaluation: Some(evaluation),
            feasible: true,
        })
    }

    pub fn double(&self) -> Option<DoublePlan> {
        match self.plan {
            Some(Plan::Double(plan)) => Some(plan),
            _ => None,
        }
    }

    pub fn single(&self) -> Option<SinglePlan> {
        match self.plan {
            Some(Plan::Single(plan)) => Some(plan),
            _ => None,
        }
    }

    pub fn group(&self) -> Option<GroupPlan> {
        match self.plan {
            Some(Plan::Group(plan)) => Some(plan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    asn: f64,
    n1: u32,
    n2: u32,
    c1: u32,
    c2: u32,
}

impl Candidate {
    /// ASN, then `n1 + n2`, then `n1`, then `c2`, then `c1`.
    fn order(&self, other: &Self) -> Ordering {
        self.asn
            .total_cmp(&other.asn)
            .then((self.n1 + self.n2).cmp(&(other.n1 + other.n2)))
            .then(self.n1.cmp(&other.n1))
            .then(self.c2.cmp(&other.c2))
            .then(self.c1.cmp(&other.c1))
    }
}

/// Acceptance probability, first-stage decision probability and ASN of a
/// double plan, read from precomputed binomial rows. Shares its arithmetic
/// with [`DoublePlan::accept_prob`] and [`DoublePlan::asn`], so the results
/// are bit-identical.
struct DoubleEvaluator {
    table: BinomialTable,
}

impl DoubleEvaluator {
    fn accept(&self, n1: u32, n2: u32, c1: u32, c2: u32) -> f64 {
        combine_stages(self.table.row(n1), self.table.row(n2), c1, c2)
    }

    fn asn(&self, n1: u32, n2: u32, c1: u32, c2: u32) -> f64 {
        let first = self.table.row(n1);
        let mut undecided = KahanSum::default();
        for j in (c1 + 1)..=c2.min(n1) {
            undecided.add(first.pmf(j));
        }
        let decided = (1.0 - undecided.value()).clamp(0.0, 1.0);
        f64::from(n1) + f64::from(n2) * (1.0 - decided)
    }
}

/// Shared best-ASN bound. Positive `f64` values order like their bit patterns.
struct Incumbent(AtomicU64);

impl Incumbent {
    fn new() -> Self {
        Self(AtomicU64::new(f64::INFINITY.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(AtomicOrdering::Relaxed))
    }

    fn offer(&self, asn: f64) {
        self.0.fetch_min(asn.to_bits(), AtomicOrdering::Relaxed);
    }
}

/// Minimum-ASN double plan.
///
/// Searches `c1 < c2 <= c_max`, `c2 < n1`, `1 <= n2 <= n1 <= n_max`. Within
/// each `(c1, c2)` cell the smallest useful `n1` is found by bisection on the
/// consumer constraint; for each `n1` only the smallest `n2` meeting the
/// consumer constraint can be optimal, since ASN grows with `n2` while the
/// producer constraint only gets harder. Cells run in parallel and the
/// result does not depend on scheduling.
pub fn design_double(spec: &RiskSpec, bounds: &SearchBounds) -> Result<DesignOutcome> {
    bounds.validate()?;
    let beta = spec.beta();
    let floor = 1.0 - spec.alpha();
    let consumer = DoubleEvaluator {
        table: BinomialTable::new(bounds.n_max, bounds.c_max, spec.p1()),
    };
    let producer = DoubleEvaluator {
        table: BinomialTable::new(bounds.n_max, bounds.c_max, spec.p2()),
    };
    let incumbent = Incumbent::new();

    let cells: Vec<(u32, u32)> = (1..=bounds.c_max)
        .flat_map(|c2| (0..c2).map(move |c1| (c1, c2)))
        .collect();

    let best = cells
        .par_iter()
        .filter_map(|&(c1, c2)| {
            let start = c2 + 1;
            if start > bounds.n_max {
                return None;
            }
            // Smallest n1 for which even n2 = n1 meets the consumer constraint.
            let meets = |n1: u32| consumer.accept(n1, n1, c1, c2) <= beta;
            let first = partition_point(start, bounds.n_max, |n1| !meets(n1))?;

            let mut cell_best: Option<Candidate> = None;
            for n1 in first..=bounds.n_max {
                if f64::from(n1) > incumbent.get() {
                    break;
                }
                if producer.accept(n1, 1, c1, c2) < floor {
                    break;
                }
                let Some(n2) = partition_point(1, n1, |n2| consumer.accept(n1, n2, c1, c2) > beta) else {
                    continue;
                };
                if producer.accept(n1, n2, c1, c2) < floor {
                    continue;
                }
                let cand = Candidate {
                    asn: consumer.asn(n1, n2, c1, c2),
                    n1,
                    n2,
                    c1,
                    c2,
                };
                incumbent.offer(cand.asn);
                if cell_best.is_none_or(|b| cand.order(&b) == Ordering::Less) {
                    cell_best = Some(cand);
                }
            }
            cell_best
        })
        .min_by(|a, b| a.order(b));

    match best {
        None => Ok(DesignOutcome::infeasible()),
        Some(c) => DesignOutcome::verified(spec, DoublePlan::new(c.n1, c.n2, c.c1, c.c2)?.into()),
    }
}

/// First `x` in `lo..=hi` with `!before(x)`, for a predicate that is true on
/// a prefix and false afterwards. `None` when it holds everywhere.
fn partition_point(lo: u32, hi: u32, before: impl Fn(u32) -> bool) -> Option<u32> {
    if lo > hi || before(hi) {
        return None;
    }
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if before(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Minimum-size single plan `(n, c)`, ties broken by smaller `c`.
pub fn design_single(spec: &RiskSpec, bounds: &SearchBounds) -> Result<DesignOutcome> {
    bounds.validate()?;
    let (p1, p2) = (spec.p1(), spec.p2());
    let floor = 1.0 - spec.alpha();
    for n in 1..=bounds.n_max {
        let top = bounds.c_max.min(n);
        let consumer = cdf_prefix(n, p1, top);
        let producer = cdf_prefix(n, p2, top);
        let at = |row: &[f64], c: u32| if c == n { 1.0 } else { row[c as usize] };
        // Acceptance grows with c: the producer wants c large, the consumer small.
        let Some(c) = (0..=top).find(|&c| at(&producer, c) >= floor) else {
            continue;
        };
        if at(&consumer, c) <= spec.beta() {
            return DesignOutcome::verified(spec, SinglePlan::new(n, c)?.into());
        }
    }
    Ok(DesignOutcome::infeasible())
}

/// Minimum-group plan for `r` units per group, ties broken by smaller `c`.
pub fn design_group(spec: &RiskSpec, r: u32, bounds: &SearchBounds) -> Result<DesignOutcome> {
    bounds.validate()?;
    if r == 0 {
        return Err(Error::InvalidPlan("group size r must be at least 1".into()));
    }
    let (p1, p2) = (spec.p1(), spec.p2());
    let consumer = cdf_prefix(r, p1, r);
    let producer = cdf_prefix(r, p2, r);
    let floor = 1.0 - spec.alpha();

    let mut best: Option<(u32, u32)> = None;
    for c in 0..=r {
        let b1 = consumer[c as usize];
        let b2 = producer[c as usize];
        let Some(g) = min_groups(b1, spec.beta(), bounds.g_max) else {
            continue;
        };
        if group_power(b2, g) < floor {
            continue;
        }
        if best.is_none_or(|(bg, _)| g < bg) {
            best = Some((g, c));
        }
    }
    match best {
        None => Ok(DesignOutcome::infeasible()),
        Some((g, c)) => DesignOutcome::verified(spec, GroupPlan::new(g, r, c)?.into()),
    }
}

/// Smallest `g <= g_max` with `per_group^g <= beta`.
fn min_groups(per_group: f64, beta: f64, g_max: u32) -> Option<u32> {
    if per_group >= 1.0 {
        return None;
    }
    if per_group <= beta {
        return Some(1);
    }
    let guess = (beta.ln() / per_group.ln()).ceil();
    if !(guess <= f64::from(g_max) + 2.0) {
        return None;
    }
    let mut g = (guess as u32).max(1);
    while g > 1 && group_power(per_group, g - 1) <= beta {
        g -= 1;
    }
    while group_power(per_group, g) > beta {
        g += 1;
    }
    (g <= g_max).then_some(g)
}

/// Truncation multiplier on the median scale equivalent to testing for
/// `ã·θ0` against the `p`-quantile: `ã·(-ln 2 / ln p)^(1/γ)`.
pub fn percentile_multiplier(a_tilde: f64, gamma: f64, p: f64) -> Result<f64> {
    let a_tilde = positive("a_tilde", a_tilde)?;
    let gamma = positive("gamma", gamma)?;
    let p = open_unit("p", p)?;
    Ok(a_tilde * (-LN_2 / p.ln()).powf(gamma.recip()))
}

/// Acceptance probabilities of a double plan when the true shape is `gamma0`:
/// `(p_β, p_α)` at quality ratios 1 and `r2`.
pub fn misspec_probabilities(plan: &DoublePlan, a: f64, gamma0: f64, r2: f64) -> Result<(f64, f64)> {
    let p_beta = plan.accept_prob(failure_prob(1.0, a, gamma0)?)?;
    let p_alpha = plan.accept_prob(failure_prob(r2, a, gamma0)?)?;
    Ok((p_beta, p_alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::failure_prob_percentile;

    fn spec(beta: f64, r2: f64, a: f64, gamma: f64) -> RiskSpec {
        RiskSpec::at_specified_life(beta, 0.05, r2, a, gamma).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(RiskSpec::new(0.1, 0.05, 2.0, 2.0, 0.5, 0.75).is_err());
        assert!(RiskSpec::new(1.0, 0.05, 1.0, 2.0, 0.5, 0.75).is_err());
        assert!(RiskSpec::new(0.1, 0.0, 1.0, 2.0, 0.5, 0.75).is_err());
        assert!(RiskSpec::new(0.1, 0.05, 1.0, 2.0, -0.5, 0.75).is_err());
        let zero = SearchBounds { n_max: 0, ..Default::default() };
        assert!(design_single(&spec(0.1, 2.0, 0.5, 0.75), &zero).is_err());
    }

    #[test]
    fn table_evaluator_is_bit_identical_to_plan_model() {
        let s = spec(0.1, 2.0, 0.5, 0.75);
        let eval = DoubleEvaluator {
            table: BinomialTable::new(60, 20, s.p1()),
        };
        for (n1, n2, c1, c2) in [(39, 12, 7, 11), (9, 7, 0, 2), (60, 1, 0, 20), (21, 21, 19, 20)] {
            let plan = DoublePlan::new(n1, n2, c1, c2).unwrap();
            assert_eq!(eval.accept(n1, n2, c1, c2), plan.accept_prob(s.p1()).unwrap());
            assert_eq!(eval.asn(n1, n2, c1, c2), plan.asn(s.p1()).unwrap());
        }
    }

    #[test]
    fn double_design_example() {
        let out = design_double(&spec(0.10, 2.0, 0.5, 0.75), &SearchBounds::default()).unwrap();
        assert_eq!(out.double(), Some(DoublePlan::new(39, 12, 7, 11).unwrap()));
        let eval = out.evaluation.unwrap();
        assert!((eval.asn - 43.43).abs() <= 0.01);
        assert!((eval.p_accept_producer - 0.9552).abs() <= 1e-4);
    }

    #[test]
    fn double_design_infeasible_in_tight_bounds() {
        let bounds = SearchBounds { n_max: 10, c_max: 3, g_max: 10 };
        let out = design_double(&spec(0.01, 2.0, 0.5, 0.75), &bounds).unwrap();
        assert!(!out.feasible);
        assert!(out.plan.is_none() && out.evaluation.is_none());
    }

    #[test]
    fn single_design_examples() {
        let b = SearchBounds::default();
        let out = design_single(&spec(0.10, 2.0, 0.5, 0.75), &b).unwrap();
        assert_eq!(out.single(), Some(SinglePlan::new(51, 11).unwrap()));
        let out = design_single(&spec(0.25, 6.0, 0.5, 0.75), &b).unwrap();
        assert_eq!(out.single(), Some(SinglePlan::new(4, 0).unwrap()));
        let eval = out.evaluation.unwrap();
        assert!((eval.p_accept_consumer - 0.2244).abs() < 1e-4);
        assert!((eval.p_accept_producer - 0.955).abs() < 1e-3);
    }

    #[test]
    fn group_design_examples() {
        let b = SearchBounds::default();
        let out = design_group(&spec(0.10, 2.0, 0.5, 0.75), 10, &b).unwrap();
        assert_eq!(out.group(), Some(GroupPlan::new(40, 10, 5).unwrap()));
        assert!((out.evaluation.unwrap().p_accept_producer - 0.9615).abs() <= 1e-4);
        let out = design_group(&spec(0.25, 2.0, 0.5, 0.75), 5, &b).unwrap();
        assert_eq!(out.group(), Some(GroupPlan::new(471, 5, 4).unwrap()));
        assert!((out.evaluation.unwrap().p_accept_producer - 0.9743).abs() <= 1e-4);
        let out = design_group(&spec(0.05, 2.0, 0.5, 0.75), 5, &b).unwrap();
        assert!(!out.feasible);
        assert!(design_group(&spec(0.05, 2.0, 0.5, 0.75), 0, &b).is_err());
    }

    #[test]
    fn min_groups_edges() {
        assert_eq!(min_groups(1.0, 0.1, 100), None);
        assert_eq!(min_groups(0.05, 0.1, 100), Some(1));
        assert_eq!(min_groups(0.5, 0.25, 100), Some(2));
        assert_eq!(min_groups(0.5, 0.2, 100), Some(3));
        assert_eq!(min_groups(0.999, 0.1, 100), None);
    }

    #[test]
    fn percentile_multiplier_values() {
        let a = percentile_multiplier(0.31, 0.75, 0.75).unwrap();
        assert!((0.99..=1.01).contains(&a), "{a}");
        assert_eq!(percentile_multiplier(0.42, 3.0, 0.5).unwrap(), 0.42);
        assert!(percentile_multiplier(0.3, 1.0, 1.0).is_err());
        assert!(percentile_multiplier(0.3, 1.0, 0.0).is_err());
        for (ratio, at, g, p) in [(1.0, 0.31, 0.75, 0.75), (2.5, 0.8, 1.3, 0.1), (0.4, 2.0, 0.6, 0.95)] {
            let via_median = failure_prob(ratio, percentile_multiplier(at, g, p).unwrap(), g).unwrap();
            let direct = failure_prob_percentile(ratio, at, g, p).unwrap();
            assert!((via_median - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn misspecification_values() {
        let plan = DoublePlan::new(9, 7, 0, 2).unwrap();
        let (pb, pa) = misspec_probabilities(&plan, 0.5, 0.90, 2.0).unwrap();
        // Independently recomputed: (0.15960, 0.84087).
        assert!((pb - 0.1596).abs() <= 1e-4 && (pa - 0.8409).abs() <= 1e-4, "{pb} {pa}");
        let (pb, pa) = misspec_probabilities(&plan, 0.5, 1.05, 2.0).unwrap();
        assert!((pb - 0.2475).abs() <= 1e-4 && (pa - 0.9568).abs() <= 1e-4, "{pb} {pa}");
        let designed = Plan::from(plan).evaluate(spec(0.25, 2.0, 0.5, 1.05).p1(), spec(0.25, 2.0, 0.5, 1.05).p2()).unwrap();
        assert_eq!(pa, designed.p_accept_producer);
    }
}
