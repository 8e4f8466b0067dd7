//! Single, double and group attribute plans and their exact operating
//! characteristics.
//!
//! Every plan accepts a lot when the number of units failing before the
//! truncation time is small enough:
//!
//! * single `(n, c)`: accept iff at most `c` of `n` units fail;
//! * double `(n1, n2, c1, c2)`: accept on the first sample if at most `c1`
//!   fail, reject if more than `c2` fail, otherwise test `n2` more units and
//!   accept iff the combined count is at most `c2`;
//! * group `(g, r, c)`: `g` groups of `r` units, accept iff every group has
//!   at most `c` failures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::binomial::{pmf_prefix, KahanSum, Row, Tails};
use crate::distribution::failure_prob;
use crate::error::{closed_unit, positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SinglePlan {
    n: u32,
    c: u32,
}

impl SinglePlan {
    pub fn new(n: u32, c: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPlan("single plan needs n >= 1".into()));
        }
        if c > n {
            return Err(Error::InvalidPlan(format!("acceptance number {c} exceeds sample size {n}")));
        }
        Ok(Self { n, c })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn accept_prob(&self, p: f64) -> Result<f64> {
        crate::binomial::binom_cdf_tail(self.n, self.c, p)
    }
}

impl fmt::Display for SinglePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.n, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoublePlan {
    n1: u32,
    n2: u32,
    c1: u32,
    c2: u32,
}

impl DoublePlan {
    pub fn new(n1: u32, n2: u32, c1: u32, c2: u32) -> Result<Self> {
        if c1 >= c2 {
            return Err(Error::InvalidPlan(format!("need c1 < c2, got c1={c1}, c2={c2}")));
        }
        if n2 == 0 || n2 > n1 {
            return Err(Error::InvalidPlan(format!("need 1 <= n2 <= n1, got n1={n1}, n2={n2}")));
        }
        if c2 > n1 {
            return Err(Error::InvalidPlan(format!("need c2 <= n1, got n1={n1}, c2={c2}")));
        }
        Ok(Self { n1, n2, c1, c2 })
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn c1(&self) -> u32 {
        self.c1
    }

    pub fn c2(&self) -> u32 {
        self.c2
    }

    pub fn accept_prob(&self, p: f64) -> Result<f64> {
        let p = closed_unit("p", p)?;
        Ok(two_stage_accept(self.n1, self.n2, self.c1, self.c2, p))
    }

    /// Probability that the first sample alone settles the lot.
    pub fn first_decision_prob(&self, p: f64) -> Result<f64> {
        let p = closed_unit("p", p)?;
        let first = pmf_prefix(self.n1, p, self.c2);
        let mut undecided = KahanSum::default();
        for &term in &first[(self.c1 as usize + 1).min(first.len())..] {
            undecided.add(term);
        }
        Ok((1.0 - undecided.value()).clamp(0.0, 1.0))
    }

    /// Average sample number `n1 + n2·(1 - P_d1(p))`.
    pub fn asn(&self, p: f64) -> Result<f64> {
        let decided = self.first_decision_prob(p)?;
        Ok(f64::from(self.n1) + f64::from(self.n2) * (1.0 - decided))
    }
}

impl fmt::Display for DoublePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n1, self.n2, self.c1, self.c2)
    }
}

/// Two-stage acceptance probability for any `c1 <= c2`. With `c1 == c2` the
/// second stage is never reached and this is the single-plan tail.
pub(crate) fn two_stage_accept(n1: u32, n2: u32, c1: u32, c2: u32, p: f64) -> f64 {
    let first = Row::new(n1, p, c2);
    let second = Row::new(n2, p, c2.saturating_sub(c1 + 1));
    combine_stages(&first, &second, c1, c2)
}

/// Acceptance probability of the two-stage rule from the rows of the first
/// and second sample. Acceptance and rejection are both summed; when
/// acceptance is the likelier outcome it is reported as one minus the
/// rejection probability, which keeps values near 1 precise.
pub(crate) fn combine_stages(first: &impl Tails, second: &impl Tails, c1: u32, c2: u32) -> f64 {
    let mut accept = KahanSum::default();
    let mut reject = KahanSum::default();
    reject.add(first.sf(c2));
    for j in 0..=c2 {
        let term = first.pmf(j);
        if j <= c1 {
            accept.add(term);
        } else {
            accept.add(term * second.cdf(c2 - j));
            reject.add(term * second.sf(c2 - j));
        }
    }
    let accept = accept.value();
    if accept <= 0.5 { accept } else { 1.0 - reject.value() }.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupPlan {
    g: u32,
    r: u32,
    c: u32,
}

impl GroupPlan {
    pub fn new(g: u32, r: u32, c: u32) -> Result<Self> {
        if g == 0 || r == 0 {
            return Err(Error::InvalidPlan(format!("need g >= 1 and r >= 1, got g={g}, r={r}")));
        }
        if c > r {
            return Err(Error::InvalidPlan(format!("acceptance number {c} exceeds group size {r}")));
        }
        if i32::try_from(g).is_err() {
            return Err(Error::InvalidPlan(format!("group count {g} too large")));
        }
        Ok(Self { g, r, c })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn sample_size(&self) -> u64 {
        u64::from(self.g) * u64::from(self.r)
    }

    pub fn accept_prob(&self, p: f64) -> Result<f64> {
        let per_group = crate::binomial::binom_cdf_tail(self.r, self.c, p)?;
        Ok(group_power(per_group, self.g))
    }
}

pub(crate) fn group_power(per_group: f64, g: u32) -> f64 {
    per_group.powi(g as i32)
}

impl fmt::Display for GroupPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g={} r={} c={}", self.g, self.r, self.c)
    }
}

/// Any of the three plan families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Plan {
    Single(SinglePlan),
    Double(DoublePlan),
    Group(GroupPlan),
}

impl Plan {
    pub fn accept_prob(&self, p: f64) -> Result<f64> {
        match self {
            Plan::Single(plan) => plan.accept_prob(p),
            Plan::Double(plan) => plan.accept_prob(p),
            Plan::Group(plan) => plan.accept_prob(p),
        }
    }

    /// Expected number of units put on test. Fixed for single and group plans.
    pub fn asn(&self, p: f64) -> Result<f64> {
        match self {
            Plan::Single(plan) => Ok(f64::from(plan.n())),
            Plan::Double(plan) => plan.asn(p),
            Plan::Group(plan) => Ok(plan.sample_size() as f64),
        }
    }

    /// Acceptance probabilities at the consumer and producer failure
    /// probabilities, and the ASN at the consumer point.
    pub fn evaluate(&self, p_consumer: f64, p_producer: f64) -> Result<PlanEvaluation> {
        Ok(PlanEvaluation {
            p_accept_consumer: self.accept_prob(p_consumer)?,
            p_accept_producer: self.accept_prob(p_producer)?,
            asn: self.asn(p_consumer)?,
        })
    }
}

impl From<SinglePlan> for Plan {
    fn from(plan: SinglePlan) -> Self {
        Plan::Single(plan)
    }
}

impl From<DoublePlan> for Plan {
    fn from(plan: DoublePlan) -> Self {
        Plan::Double(plan)
    }
}

impl From<GroupPlan> for Plan {
    fn from(plan: GroupPlan) -> Self {
        Plan::Group(plan)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Plan::Single(plan) => plan.fmt(f),
            Plan::Double(plan) => plan.fmt(f),
            Plan::Group(plan) => plan.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEvaluation {
    /// Acceptance probability at the consumer's quality level (`p_β`).
    pub p_accept_consumer: f64,
    /// Acceptance probability at the producer's quality level (`p_α`).
    pub p_accept_producer: f64,
    /// Average sample number at the consumer's quality level.
    pub asn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcPoint {
    pub ratio: f64,
    pub accept_prob: f64,
    pub asn: f64,
}

/// Operating characteristic of `plan` over the quality ratios `m/m0`.
///
/// Ratios must be nondecreasing; repeated values collapse to one point.
pub fn oc_curve(plan: &Plan, gamma: f64, a: f64, ratios: &[f64]) -> Result<Vec<OcPoint>> {
    positive("gamma", gamma)?;
    positive("a", a)?;
    if ratios.is_empty() {
        return Err(Error::InvalidGrid("no quality ratios given".into()));
    }
    if let Some(w) = ratios.windows(2).find(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidGrid(format!("ratios must be increasing, got {} then {}", w[0], w[1])));
    }
    let mut points = Vec::with_capacity(ratios.len());
    let mut last = None;
    for &ratio in ratios {
        if last == Some(ratio) {
            continue;
        }
        last = Some(ratio);
        let p = failure_prob(ratio, a, gamma)?;
        points.push(OcPoint {
            ratio,
            accept_prob: plan.accept_prob(p)?,
            asn: plan.asn(p)?,
        });
    }
    Ok(points)
}
