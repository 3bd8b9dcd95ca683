//! The r-out-of-n directional replicability test and the sequential choice of r.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial_conjunction::{pc_pair, CombinerKind, StudyVector};

/// Requested decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Min rule where its validity is established, doubled rule elsewhere.
    Auto,
    Min,
    Double,
}

/// The rule actually used for a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleApplied {
    Min,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    None,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Auto => "auto",
            Rule::Min => "min",
            Rule::Double => "double",
        }
    }
}

impl RuleApplied {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleApplied::Min => "min",
            RuleApplied::Double => "double",
        }
    }
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::None => "none",
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::None => Sign::None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for RuleApplied {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Rule::Auto),
            "min" => Ok(Rule::Min),
            "double" => Ok(Rule::Double),
            other => Err(Error::Domain(format!("unknown rule '{other}'"))),
        }
    }
}

/// One test of `H_{r/n}`: at least `r` of `n` effects share a sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicabilityQuery {
    n: usize,
    r: usize,
    alpha: f64,
    combiner: CombinerKind,
    rule: Rule,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 0.5)")));
    }
    Ok(())
}

impl ReplicabilityQuery {
    pub fn new(n: usize, r: usize, alpha: f64, combiner: CombinerKind, rule: Rule) -> Result<Self> {
        if r < 2 || r > n {
            return Err(Error::Domain(format!("r = {r} must lie in 2..={n}")));
        }
        check_alpha(alpha)?;
        Ok(ReplicabilityQuery {
            n,
            r,
            alpha,
            combiner,
            rule,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn combiner(&self) -> CombinerKind {
        self.combiner
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn with_rule(self, rule: Rule) -> Self {
        ReplicabilityQuery { rule, ..self }
    }

    pub fn min_rule_is_valid(&self) -> bool {
        min_rule_is_valid(self.n, self.r, self.combiner)
    }

    pub fn rule_applied(&self) -> RuleApplied {
        match self.rule {
            Rule::Min => RuleApplied::Min,
            Rule::Double => RuleApplied::Double,
            Rule::Auto if self.min_rule_is_valid() => RuleApplied::Min,
            Rule::Auto => RuleApplied::Double,
        }
    }

    /// Level at which `min(p⁺, p⁻)` is compared: α for the min rule, α/2
    /// for the doubled rule.
    pub fn effective_level(&self) -> f64 {
        match self.rule_applied() {
            RuleApplied::Min => self.alpha,
            RuleApplied::Double => 0.5 * self.alpha,
        }
    }

    /// Turn a pair of directional p-values into a decision.
    pub fn decide(&self, p_plus: f64, p_minus: f64) -> DirectionalResult {
        let rule_applied = self.rule_applied();
        let smaller = p_plus.min(p_minus);
        let p_final = match rule_applied {
            RuleApplied::Min => smaller,
            RuleApplied::Double => (2.0 * smaller).min(1.0),
        };
        let reject = p_final <= self.alpha;
        let sign = match (reject, p_plus < p_minus) {
            (false, _) => Sign::None,
            (true, true) => Sign::Positive,
            (true, false) => Sign::Negative,
        };
        DirectionalResult {
            p_plus,
            p_minus,
            p_final,
            rule_applied,
            reject,
            sign,
            unproven_validity: self.rule == Rule::Min && !self.min_rule_is_valid(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalResult {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_final: f64,
    pub rule_applied: RuleApplied,
    pub reject: bool,
    pub sign: Sign,
    /// Set when the min rule was forced where its level has not been proven.
    pub unproven_validity: bool,
}

/// Whether `min(p⁺, p⁻)` is a proven valid p-value for `H_{r/n}`.
///
/// True when `2r > n + 1` with Bonferroni or Šidák combining, and for the
/// single small case `n = 3, r = 2` with Bonferroni.
pub fn min_rule_is_valid(n: usize, r: usize, combiner: CombinerKind) -> bool {
    let large_r = 2 * r > n + 1
        && matches!(combiner, CombinerKind::Bonferroni | CombinerKind::Sidak);
    let three_two = n == 3 && r == 2 && combiner == CombinerKind::Bonferroni;
    large_r || three_two
}

pub fn directional_test(s: &StudyVector, q: &ReplicabilityQuery) -> Result<DirectionalResult> {
    if s.n() != q.n {
        return Err(Error::LengthMismatch {
            expected: q.n,
            got: s.n(),
        });
    }
    let pair = pc_pair(s, q.r, q.combiner)?;
    Ok(q.decide(pair.p_plus, pair.p_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveStep {
    pub r: usize,
    pub p_final: f64,
    pub reject: bool,
}

/// Outcome of the sequential procedure. Only tested hypotheses appear in
/// `steps`; every `r` beyond the last step was not tested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveResult {
    pub n: usize,
    /// First tested `r`, `⌈(n + 2) / 2⌉`.
    pub k: usize,
    /// Lower confidence bound for `max(n⁺, n⁻)`; 0 when `H_{k/n}` survives.
    pub l: usize,
    pub steps: Vec<AdaptiveStep>,
}

pub fn first_adaptive_r(n: usize) -> usize {
    (n + 3) / 2
}

/// Test `H_{k/n}, H_{(k+1)/n}, …` at level α and stop at the first
/// non-rejection.
pub fn adaptive_r(s: &StudyVector, alpha: f64, combiner: CombinerKind) -> Result<AdaptiveResult> {
    let n = s.n();
    if n < 2 {
        return Err(Error::Domain("adaptive r needs at least two studies".into()));
    }
    check_alpha(alpha)?;
    let k = first_adaptive_r(n);
    let mut steps = Vec::new();
    let mut l = 0;
    for r in k..=n {
        let q = ReplicabilityQuery::new(n, r, alpha, combiner, Rule::Auto)?;
        let res = directional_test(s, &q)?;
        steps.push(AdaptiveStep {
            r,
            p_final: res.p_final,
            reject: res.reject,
        });
        if !res.reject {
            break;
        }
        l = r;
    }
    Ok(AdaptiveResult { n, k, l, steps })
}
