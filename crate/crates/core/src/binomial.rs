//! Binomial probabilities for acceptance counting.
//!
//! Terms are built by the multiplicative recurrence
//! `P(i) = P(i-1) · (n-i+1)/i · p/(1-p)`, carried in log space so that
//! `(1-p)^n` never underflows before the first terms are formed. Sums use
//! Neumaier-compensated accumulation.

use crate::error::{closed_unit, Error, Result};

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `ln P(X = i)` for `i = 0, 1, ..., n` when `0 < p < 1`.
fn ln_terms(n: u32, p: f64) -> impl Iterator<Item = f64> {
    let ln_q = (-p).ln_1p();
    let log_odds = p.ln() - ln_q;
    let first = f64::from(n) * ln_q;
    std::iter::once(first).chain((1..=n).scan(first, move |ln_term, i| {
        *ln_term += (f64::from(n - i + 1) / f64::from(i)).ln() + log_odds;
        Some(*ln_term)
    }))
}

/// Binomial(n, p) probabilities `P(X = i)` for `i = 0..=upto.min(n)`.
///
/// `p` of exactly 0 or 1 yields the degenerate point masses.
pub(crate) fn pmf_prefix(n: u32, p: f64, upto: u32) -> Vec<f64> {
    let last = upto.min(n);
    let mut out = vec![0.0; last as usize + 1];
    if p <= 0.0 {
        out[0] = 1.0;
    } else if p >= 1.0 {
        if last == n {
            out[n as usize] = 1.0;
        }
    } else {
        for (slot, ln_term) in out.iter_mut().zip(ln_terms(n, p)) {
            *slot = ln_term.exp();
        }
    }
    out
}

/// One binomial row up to `upto`: point masses with both tails.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    n: u32,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    sf: Vec<f64>,
}

impl Row {
    /// Each tail is summed directly over the full support, small terms
    /// first, and the smaller side is reported as is; the larger one is
    /// taken as its complement so values near 1 keep full precision. The
    /// stored values do not depend on `upto`.
    pub(crate) fn new(n: u32, p: f64, upto: u32) -> Self {
        let keep = upto.min(n) as usize + 1;
        let mut pmf = pmf_prefix(n, p, n);
        let mut upper = vec![0.0; pmf.len()];
        let mut acc = KahanSum::default();
        for k in (0..pmf.len()).rev() {
            upper[k] = acc.value();
            acc.add(pmf[k]);
        }
        let mut lower = KahanSum::default();
        let mut cdf = Vec::with_capacity(keep);
        let mut sf = Vec::with_capacity(keep);
        for (&term, &up) in pmf.iter().zip(&upper).take(keep) {
            lower.add(term);
            let lo = lower.value();
            cdf.push(if lo <= 0.5 { lo } else { 1.0 - up }.clamp(0.0, 1.0));
            sf.push(if up <= 0.5 { up } else { 1.0 - lo }.clamp(0.0, 1.0));
        }
        pmf.truncate(keep);
        Self { n, pmf, cdf, sf }
    }
}

/// Lookups into a binomial row. Indices above `n` are legal and give the
/// limiting values.
pub(crate) trait Tails {
    /// `P(X = k)`.
    fn pmf(&self, k: u32) -> f64;
    /// `P(X <= k)`.
    fn cdf(&self, k: u32) -> f64;
    /// `P(X > k)`.
    fn sf(&self, k: u32) -> f64;
}

impl Row {
    fn lookup(&self, values: &[f64], k: u32, beyond: f64) -> f64 {
        if k > self.n {
            return beyond;
        }
        values.get(k as usize).copied().expect("index past the stored prefix")
    }
}

impl Tails for Row {
    fn pmf(&self, k: u32) -> f64 {
        self.lookup(&self.pmf, k, 0.0)
    }

    fn cdf(&self, k: u32) -> f64 {
        self.lookup(&self.cdf, k, 1.0)
    }

    fn sf(&self, k: u32) -> f64 {
        self.lookup(&self.sf, k, 0.0)
    }
}

/// `P(X <= k)` for `k = 0..=upto.min(n)`.
pub(crate) fn cdf_prefix(n: u32, p: f64, upto: u32) -> Vec<f64> {
    Row::new(n, p, upto).cdf
}

/// Lower tail `P(X <= c)` of a Binomial(n, p) count.
pub fn binom_cdf_tail(n: u32, c: u32, p: f64) -> Result<f64> {
    if c > n {
        return Err(Error::Domain {
            name: "c",
            expected: "at most n",
            value: f64::from(c),
        });
    }
    let p = closed_unit("p", p)?;
    if c == n {
        return Ok(1.0);
    }
    Ok(Row::new(n, p, c).cdf(c))
}

/// Binomial rows for every `n <= n_max`, truncated at `k <= k_max`. Lets the
/// plan searches evaluate acceptance probabilities in `O(c)` instead of
/// rebuilding rows.
#[derive(Debug, Clone)]
pub(crate) struct BinomialTable {
    rows: Vec<Row>,
}

impl BinomialTable {
    pub(crate) fn new(n_max: u32, k_max: u32, p: f64) -> Self {
        Self {
            rows: (0..=n_max).map(|n| Row::new(n, p, k_max)).collect(),
        }
    }

    pub(crate) fn row(&self, n: u32) -> &Row {
        &self.rows[n as usize]
    }
}
