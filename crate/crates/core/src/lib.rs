//! Acceptance sampling plans for truncated life tests when unit lifetimes
//! follow an inverse Weibull law.
//!
//! A lot is judged by putting units on test for `t0 = a·m0`, a multiple of
//! the specified median life `m0`, and counting failures. The crate
//!
//! * evaluates single, double and group plans exactly ([`plan`]);
//! * designs the smallest plans meeting a consumer's and a producer's risk
//!   ([`design`], [`tables`]);
//! * fits the lifetime model and three competitors to failure data ([`fit`]);
//! * runs the test procedures by simulation as an independent check ([`sim`]).
//!
//! ```
//! use lifeplan::{design_double, RiskSpec, SearchBounds};
//!
//! let spec = RiskSpec::at_specified_life(0.10, 0.05, 2.0, 0.5, 0.75)?;
//! let outcome = design_double(&spec, &SearchBounds::default())?;
//! let plan = outcome.double().unwrap();
//! assert_eq!((plan.n1(), plan.n2(), plan.c1(), plan.c2()), (39, 12, 7, 11));
//! # Ok::<(), lifeplan::Error>(())
//! ```

pub mod binomial;
pub mod design;
pub mod distribution;
mod error;
pub mod fit;
pub mod plan;
pub mod sim;
pub mod tables;

pub use binomial::binom_cdf_tail;
pub use design::{
    design_double, design_group, design_single, misspec_probabilities, percentile_multiplier, DesignOutcome,
    RiskSpec, SearchBounds,
};
pub use distribution::{failure_prob, failure_prob_percentile, LifetimeModel, QualitySetting};
pub use error::{Error, Result};
pub use fit::{FitResult, LifetimeSample, ModelKind};
pub use plan::{oc_curve, DoublePlan, GroupPlan, OcPoint, Plan, PlanEvaluation, SinglePlan};
pub use sim::{SimConfig, SimReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lifetime-model.md")]
    mod lifetime_model {}
    #[doc = include_str!("../../../book/src/plans.md")]
    mod plans {}
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
