use proptest::prelude::*;

use lifeplan::fit::{fit_inverse_weibull, ks_statistic};
use lifeplan::{
    binom_cdf_tail, failure_prob, failure_prob_percentile, percentile_multiplier, DoublePlan, GroupPlan,
    LifetimeModel, LifetimeSample, SinglePlan,
};

fn double_plan() -> impl Strategy<Value = DoublePlan> {
    (1u32..=120)
        .prop_flat_map(|n1| (Just(n1), 1..=n1, 1..=n1))
        .prop_flat_map(|(n1, n2, c2)| (Just(n1), Just(n2), 0..c2, Just(c2)))
        .prop_map(|(n1, n2, c1, c2)| DoublePlan::new(n1, n2, c1, c2).unwrap())
}

fn group_plan() -> impl Strategy<Value = GroupPlan> {
    (1u32..=200, 1u32..=20)
        .prop_flat_map(|(g, r)| (Just(g), Just(r), 0..=r))
        .prop_map(|(g, r, c)| GroupPlan::new(g, r, c).unwrap())
}

fn p_grid() -> Vec<f64> {
    (0..20).map(|k| k as f64 / 19.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn double_accept_is_nonincreasing_in_p(plan in double_plan()) {
        let values: Vec<f64> = p_grid().iter().map(|&p| plan.accept_prob(p).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15, "{plan}: {values:?}");
        }
        prop_assert_eq!(values[0], 1.0);
    }

    #[test]
    fn single_and_group_accept_are_nonincreasing_in_p(plan in group_plan()) {
        let single = SinglePlan::new(plan.r(), plan.c()).unwrap();
        let mut last = (f64::INFINITY, f64::INFINITY);
        for p in p_grid() {
            let now = (plan.accept_prob(p).unwrap(), single.accept_prob(p).unwrap());
            prop_assert!(now.0 <= last.0 + 1e-15 && now.1 <= last.1 + 1e-15);
            prop_assert!((0.0..=1.0).contains(&now.0) && (0.0..=1.0).contains(&now.1));
            last = now;
        }
    }

    #[test]
    fn asn_lies_between_stage_sizes(plan in double_plan(), p in 0.0f64..=1.0) {
        let asn = plan.asn(p).unwrap();
        prop_assert!(asn >= f64::from(plan.n1()));
        prop_assert!(asn <= f64::from(plan.n1() + plan.n2()));
        let d = plan.first_decision_prob(p).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn group_acceptance_multiplies_over_groups(g1 in 1u32..100, g2 in 1u32..100, r in 1u32..15, c_frac in 0.0f64..1.0, p in 0.0f64..=1.0) {
        let c = (c_frac * f64::from(r)) as u32;
        let whole = GroupPlan::new(g1 + g2, r, c).unwrap().accept_prob(p).unwrap();
        let a = GroupPlan::new(g1, r, c).unwrap().accept_prob(p).unwrap();
        let b = GroupPlan::new(g2, r, c).unwrap().accept_prob(p).unwrap();
        prop_assert!((whole - a * b).abs() <= 1e-13 * (1.0 + whole), "{whole} vs {}", a * b);
        prop_assert!(whole <= a + 1e-15);
    }

    #[test]
    fn group_of_one_is_the_single_plan(r in 1u32..60, c_frac in 0.0f64..=1.0, p in 0.0f64..=1.0) {
        let c = (c_frac * f64::from(r)) as u32;
        let group = GroupPlan::new(1, r, c).unwrap().accept_prob(p).unwrap();
        prop_assert_eq!(group, SinglePlan::new(r, c).unwrap().accept_prob(p).unwrap());
    }

    #[test]
    fn binomial_tail_is_nondecreasing_in_c(n in 1u32..400, p in 0.0f64..=1.0) {
        let mut last = 0.0;
        for c in 0..=n {
            let v = binom_cdf_tail(n, c, p).unwrap();
            prop_assert!(v + 1e-15 >= last);
            last = v;
        }
        prop_assert_eq!(last, 1.0);
    }

    #[test]
    fn failure_prob_orders_by_ratio_and_multiplier(
        ratio in 0.05f64..8.0, bump in 1.001f64..3.0, a in 0.05f64..3.0, gamma in 0.2f64..4.0,
    ) {
        let base = failure_prob(ratio, a, gamma).unwrap();
        prop_assume!(base > 1e-300 && base < 1.0);
        prop_assert!(failure_prob(ratio * bump, a, gamma).unwrap() < base);
        prop_assert!(failure_prob(ratio, a * bump, gamma).unwrap() > base);
    }

    #[test]
    fn failure_prob_ignores_scale(ratio in 0.1f64..6.0, a in 0.1f64..2.0, gamma in 0.2f64..4.0, l1 in 1e-3f64..1e3, l2 in 1e-3f64..1e3) {
        // Direct route through each model: t0 = a·m0, true median = ratio·m0.
        let p = failure_prob(ratio, a, gamma).unwrap();
        for lambda in [l1, l2] {
            let model = LifetimeModel::new(gamma, lambda).unwrap();
            let m0 = model.median() / ratio;
            let direct = model.cdf(a * m0).unwrap();
            prop_assert!((direct - p).abs() <= 1e-12, "{direct} vs {p}");
        }
    }

    #[test]
    fn pdf_is_the_derivative_of_cdf(gamma in 0.3f64..4.0, lambda in 0.1f64..10.0, u in 0.02f64..0.98) {
        let model = LifetimeModel::new(gamma, lambda).unwrap();
        let t = model.quantile(u).unwrap();
        let h = t * 1e-5;
        let slope = (model.cdf(t + h).unwrap() - model.cdf(t - h).unwrap()) / (2.0 * h);
        let pdf = model.pdf(t).unwrap();
        prop_assert!((slope - pdf).abs() <= 1e-5 * pdf, "{slope} vs {pdf}");
    }

    #[test]
    fn quantile_inverts_cdf(gamma in 0.2f64..5.0, lambda in 1e-2f64..1e2, p in 0.001f64..0.999) {
        let model = LifetimeModel::new(gamma, lambda).unwrap();
        let back = model.cdf(model.quantile(p).unwrap()).unwrap();
        prop_assert!((back - p).abs() <= 1e-12 * p.max(1e-3), "{back} vs {p}");
    }

    #[test]
    fn percentile_multiplier_reproduces_percentile_form(
        ratio in 0.1f64..6.0, a_tilde in 0.05f64..3.0, gamma in 0.3f64..3.0, p in 0.01f64..0.99,
    ) {
        let a = percentile_multiplier(a_tilde, gamma, p).unwrap();
        let via_median = failure_prob(ratio, a, gamma).unwrap();
        let direct = failure_prob_percentile(ratio, a_tilde, gamma, p).unwrap();
        prop_assert!((via_median - direct).abs() <= 1e-12, "{via_median} vs {direct}");
    }

    #[test]
    fn ks_is_invariant_under_monotone_time_maps(
        raw in prop::collection::vec(0.01f64..100.0, 2..40), gamma in 0.3f64..3.0, lambda in 0.1f64..10.0,
        power in 0.2f64..3.0, scale in 0.1f64..10.0,
    ) {
        let sample = LifetimeSample::new(raw.clone()).unwrap();
        let model = LifetimeModel::new(gamma, lambda).unwrap();
        let before = ks_statistic(&sample, |t| model.cdf(t).unwrap());
        // h(t) = scale·t^power; the model moves with the data: F(h^-1(s)).
        let mapped = LifetimeSample::new(raw.iter().map(|t| scale * t.powf(power)).collect()).unwrap();
        let after = ks_statistic(&mapped, |s| model.cdf((s / scale).powf(power.recip())).unwrap());
        prop_assert!((before - after).abs() <= 1e-9, "{before} vs {after}");
        prop_assert!((0.0..=1.0).contains(&before));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inverse_weibull_fit_is_scale_equivariant(k in 0.01f64..100.0) {
        let base = LifetimeSample::parse(lifeplan::fit::LAWLESS_30KV).unwrap();
        let scaled = LifetimeSample::new(base.times().iter().map(|t| t * k).collect()).unwrap();
        let f0 = fit_inverse_weibull(&base).unwrap();
        let f1 = fit_inverse_weibull(&scaled).unwrap();
        prop_assert!((f1.param1 - f0.param1).abs() <= 1e-6 * f0.param1);
        let expected = f0.param2 * k.powf(f0.param1);
        prop_assert!((f1.param2 - expected).abs() <= 1e-6 * expected, "{} vs {expected}", f1.param2);
    }
}
