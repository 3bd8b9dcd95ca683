//! Directional replicability of an effect across `n` independent studies.
//!
//! The null hypothesis is that fewer than `r` studies share a positive effect
//! *and* fewer than `r` share a negative one. Per-study z-scores are turned
//! into one-sided p-values, combined into the two partial-conjunction p-values
//! `p⁺` and `p⁻`, and the test rejects when `min(p⁺, p⁻) <= α`. When
//! `2r > n + 1` (Bonferroni or Šidák combining) this min rule is a valid level-α
//! test without the usual factor of two; elsewhere the doubled rule
//! `2·min(p⁺, p⁻)` is used.
//!
//! [`error_analysis`] computes the exact and simulated Type I error of the min
//! rule at points of the null parameter space.

pub mod cli;
pub mod directional;
pub mod error;
pub mod error_analysis;
pub mod numerics;
pub mod partial_conjunction;

pub use directional::{
    adaptive_r, directional_test, min_rule_is_valid, AdaptiveResult, AdaptiveStep,
    DirectionalResult, ReplicabilityQuery, Rule, RuleApplied, Sign,
};
pub use error::{Error, Result};
pub use error_analysis::{McEstimate, ThetaPoint, TypeOneCurve};
pub use numerics::{ExtendedReal, PoissonBinomial};
pub use partial_conjunction::{CombinerKind, PcPValuePair, StudyVector};
