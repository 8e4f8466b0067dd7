//! Double-plan acceptance probabilities against exact rational enumeration.
//!
//! The oracle never touches the closed form. It runs the inspection
//! procedure on every outcome and weights each by its exact probability.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use lifeplan::{DoublePlan, SinglePlan};

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Runs the procedure over all (first, second) failure counts, weighting each
/// count pair by its number of unit-level outcome sequences.
fn accept_by_counts(n1: u32, n2: u32, c1: u32, c2: u32, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for i in 0..=n1 {
        let first = BigRational::from(binomial(n1, i)) * pow(p, i) * pow(&q, n1 - i);
        if i <= c1 {
            total += first;
        } else if i <= c2 {
            for j in 0..=n2 {
                if i + j <= c2 {
                    total += &first * BigRational::from(binomial(n2, j)) * pow(p, j) * pow(&q, n2 - j);
                }
            }
        }
    }
    total
}

/// Walks every unit-level outcome path of the procedure. The second sample is
/// only entered when the first is indecisive.
fn accept_by_paths(n1: u32, n2: u32, c1: u32, c2: u32, p: &BigRational) -> BigRational {
    // paths[k][f]: accepted paths testing k units with f failures
    let mut paths = vec![vec![0u64; (n1 + n2 + 1) as usize]; (n1 + n2 + 1) as usize];
    for first in 0u32..(1 << n1) {
        let f1 = first.count_ones();
        if f1 <= c1 {
            paths[n1 as usize][f1 as usize] += 1;
        } else if f1 <= c2 {
            for second in 0u32..(1 << n2) {
                let f = f1 + second.count_ones();
                if f <= c2 {
                    paths[(n1 + n2) as usize][f as usize] += 1;
                }
            }
        }
    }
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for (k, row) in paths.iter().enumerate() {
        for (f, &count) in row.iter().enumerate() {
            if count > 0 {
                total += BigRational::from(BigInt::from(count)) * pow(p, f as u32) * pow(&q, (k - f) as u32);
            }
        }
    }
    total
}

fn probabilities() -> Vec<(f64, BigRational)> {
    vec![
        (0.1, ratio(1, 10)),
        (0.3, ratio(3, 10)),
        (0.5, ratio(1, 2)),
        (0.9, ratio(9, 10)),
    ]
}

fn all_plans(max: u32) -> impl Iterator<Item = (u32, u32, u32, u32)> {
    (1..=max).flat_map(move |n1| {
        (1..=n1).flat_map(move |n2| (1..=n1).flat_map(move |c2| (0..c2).map(move |c1| (n1, n2, c1, c2))))
    })
}

#[test]
fn double_accept_prob_matches_count_enumeration() {
    let mut checked = 0;
    for (n1, n2, c1, c2) in all_plans(8) {
        let plan = DoublePlan::new(n1, n2, c1, c2).unwrap();
        for (p, exact) in probabilities() {
            let want = accept_by_counts(n1, n2, c1, c2, &exact).to_f64().unwrap();
            let got = plan.accept_prob(p).unwrap();
            assert!((got - want).abs() <= 1e-14, "{plan} at {p}: {got} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn double_accept_prob_matches_outcome_tree() {
    for (n1, n2, c1, c2) in all_plans(6) {
        let plan = DoublePlan::new(n1, n2, c1, c2).unwrap();
        for (p, exact) in probabilities() {
            let tree = accept_by_paths(n1, n2, c1, c2, &exact);
            assert_eq!(tree, accept_by_counts(n1, n2, c1, c2, &exact), "{plan}");
            let got = plan.accept_prob(p).unwrap();
            assert!((got - tree.to_f64().unwrap()).abs() <= 1e-14, "{plan} at {p}");
        }
    }
}

#[test]
fn asn_matches_exact_expected_units() {
    for (n1, n2, c1, c2) in all_plans(8) {
        let plan = DoublePlan::new(n1, n2, c1, c2).unwrap();
        for (p, exact) in probabilities() {
            let q = BigRational::one() - &exact;
            let mut second = BigRational::zero();
            for i in (c1 + 1)..=c2 {
                second += BigRational::from(binomial(n1, i)) * pow(&exact, i) * pow(&q, n1 - i);
            }
            let want = (BigRational::from(BigInt::from(n1)) + BigRational::from(BigInt::from(n2)) * second)
                .to_f64()
                .unwrap();
            let got = plan.asn(p).unwrap();
            assert!((got - want).abs() <= 1e-12, "{plan} at {p}: {got} vs {want}");
        }
    }
}

#[test]
fn single_accept_prob_matches_exact_tail() {
    for n in 1..=20 {
        for c in 0..=n {
            for (p, exact) in probabilities() {
                let q = BigRational::one() - &exact;
                let want: BigRational = (0..=c)
                    .map(|i| BigRational::from(binomial(n, i)) * pow(&exact, i) * pow(&q, n - i))
                    .sum();
                let got = SinglePlan::new(n, c).unwrap().accept_prob(p).unwrap();
                assert!((got - want.to_f64().unwrap()).abs() <= 1e-14, "({n},{c}) at {p}");
            }
        }
    }
}
