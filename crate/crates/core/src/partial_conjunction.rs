//! One-sided per-study p-values and partial-conjunction combining.
//!
//! The right-sided p-value for study `i` is `p_i = 1 − Φ(z_i)`, the left-sided
//! one `q_i = Φ(z_i) = 1 − p_i`. A partial-conjunction p-value for "at least
//! `r` of `n`" drops the `r − 1` smallest p-values and combines the remaining
//! `n − r + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::norm_cdf;

/// Observed z-scores, one per study, each a unit-variance normal estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyVector {
    z: Vec<f64>,
}

impl StudyVector {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Domain("a study vector needs at least one study".into()));
        }
        if let Some(bad) = z.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("z-score {bad} is not finite")));
        }
        Ok(StudyVector { z })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn negated(&self) -> StudyVector {
        StudyVector {
            z: self.z.iter().map(|x| -x).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerKind {
    Bonferroni,
    Sidak,
    Simes,
    Fisher,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 4] = [
        CombinerKind::Bonferroni,
        CombinerKind::Sidak,
        CombinerKind::Simes,
        CombinerKind::Fisher,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinerKind::Bonferroni => "bonferroni",
            CombinerKind::Sidak => "sidak",
            CombinerKind::Simes => "simes",
            CombinerKind::Fisher => "fisher",
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bonferroni" => Ok(CombinerKind::Bonferroni),
            "sidak" => Ok(CombinerKind::Sidak),
            "simes" => Ok(CombinerKind::Simes),
            "fisher" => Ok(CombinerKind::Fisher),
            other => Err(Error::Domain(format!("unknown combiner '{other}'"))),
        }
    }
}

/// The right and left partial-conjunction p-values for one study vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcPValuePair {
    pub p_plus: f64,
    pub p_minus: f64,
    pub r: usize,
    pub n: usize,
    pub combiner: CombinerKind,
}

/// Right-sided p-values `1 − Φ(z_i)`.
pub fn right_pvalues(s: &StudyVector) -> Vec<f64> {
    s.z.iter().map(|&z| norm_cdf(-z)).collect()
}

/// Left-sided p-values `Φ(z_i)`.
///
/// Evaluated directly rather than as `1 − p_i` so that negating `z` swaps the
/// two sides bit for bit.
pub fn left_pvalues(s: &StudyVector) -> Vec<f64> {
    s.z.iter().map(|&z| norm_cdf(z)).collect()
}

fn check_r(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::Domain(format!("r = {r} must lie in 1..={n}")));
    }
    Ok(())
}

fn sorted(p: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("p-value {bad} lies outside [0, 1]")));
    }
    let mut p = p.to_vec();
    p.sort_by(f64::total_cmp);
    Ok(p)
}

/// Combine `n` p-values into a p-value for "at least `r` of `n`".
///
/// With `m = n − r + 1` and `p_(1) <= … <= p_(n)`:
///
/// * Bonferroni: `m · p_(r)`
/// * Šidák: `1 − (1 − p_(r))^m`
/// * Simes: `min_{i=1..m} (m / i) · p_(r−1+i)`
/// * Fisher: upper tail of χ² with `2m` degrees of freedom at
///   `−2 Σ_{i=r..n} ln p_(i)`; a zero among those p-values gives 0.
///
/// Results are capped at 1.
pub fn combine(p: &[f64], r: usize, combiner: CombinerKind) -> Result<f64> {
    let n = p.len();
    check_r(n, r)?;
    let p = sorted(p)?;
    let tail = &p[r - 1..];
    let m = tail.len() as f64;
    let value = match combiner {
        CombinerKind::Bonferroni => m * tail[0],
        CombinerKind::Sidak => -(m * (-tail[0]).ln_1p()).exp_m1(),
        CombinerKind::Simes => tail
            .iter()
            .enumerate()
            .map(|(i, &pi)| m / (i + 1) as f64 * pi)
            .fold(f64::INFINITY, f64::min),
        CombinerKind::Fisher => {
            if tail.contains(&0.0) {
                0.0
            } else {
                let stat = -2.0 * tail.iter().map(|x| x.ln()).sum::<f64>();
                chi2_sf_even(tail.len(), stat)
            }
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `P(χ²_{2k} >= x)`, the regularized upper incomplete gamma `Q(k, x/2)`.
///
/// For integer shape `k` and `y = x / 2 >= k` this is the finite Poisson sum
/// `e^{−y} Σ_{j<k} y^j / j!`, summed in log space. Below `k` the result is
/// `1 − P(k, y)` with the lower tail from its power series, so values near 1
/// keep full precision.
pub fn chi2_sf_even(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    let y = 0.5 * x;
    let ln_y = y.ln();
    if y < k as f64 {
        let ln_k_fact: f64 = (2..=k).map(|j| (j as f64).ln()).sum();
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut i = 1;
        while term > sum * f64::EPSILON * 0.25 {
            term *= y / (k + i) as f64;
            sum += term;
            i += 1;
        }
        let lower = (-y + k as f64 * ln_y - ln_k_fact + sum.ln()).exp();
        return (1.0 - lower).clamp(0.0, 1.0);
    }
    let mut log_terms = Vec::with_capacity(k);
    let mut ln_fact = 0.0;
    for j in 0..k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        log_terms.push(-y + j as f64 * ln_y - ln_fact);
    }
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// Bonferroni left p-value read off the sorted *right* p-values:
/// `q_(r) = 1 − p_(n−r+1)`, so `p⁻ = min(1, m · (1 − p_(n−r+1)))`.
pub fn bonferroni_minus_from_right(right: &[f64], r: usize) -> Result<f64> {
    let n = right.len();
    check_r(n, r)?;
    let p = sorted(right)?;
    let m = (n - r + 1) as f64;
    Ok((m * (1.0 - p[n - r])).min(1.0))
}

/// Both directional partial-conjunction p-values for `s`.
pub fn pc_pair(s: &StudyVector, r: usize, combiner: CombinerKind) -> Result<PcPValuePair> {
    let right = right_pvalues(s);
    let p_plus = combine(&right, r, combiner)?;
    let p_minus = combine(&left_pvalues(s), r, combiner)?;
    if combiner == CombinerKind::Bonferroni {
        debug_assert!((p_minus - bonferroni_minus_from_right(&right, r)?).abs() <= 1e-12);
    }
    Ok(PcPValuePair {
        p_plus,
        p_minus,
        r,
        n: s.n(),
        combiner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(z: &[f64]) -> StudyVector {
        StudyVector::new(z.to_vec()).unwrap()
    }

    #[test]
    fn right_pvalue_examples() {
        assert_eq!(right_pvalues(&sv(&[0.0])), vec![0.5]);
        let p = right_pvalues(&sv(&[1.6448536269514722]))[0];
        assert!((p - 0.05).abs() < 1e-15);
        let z = sv(&[0.3, -1.2, 2.5]);
        for (p, q) in right_pvalues(&z).iter().zip(right_pvalues(&z.negated())) {
            assert!((p + q - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn combine_examples() {
        let b = CombinerKind::Bonferroni;
        assert_eq!(combine(&[0.4, 0.4], 2, b).unwrap(), 0.4);
        assert!((combine(&[0.01, 0.5, 0.9], 1, b).unwrap() - 0.03).abs() < 1e-15);
        let s = combine(&[0.02, 0.03, 0.8], 2, CombinerKind::Sidak).unwrap();
        assert!((s - 0.0591).abs() < 1e-15);
    }

    #[test]
    fn combine_caps_and_errors() {
        assert_eq!(combine(&[0.9, 0.9, 0.9], 1, CombinerKind::Bonferroni).unwrap(), 1.0);
        assert!(combine(&[0.1, 0.2], 0, CombinerKind::Simes).is_err());
        assert!(combine(&[0.1, 0.2], 3, CombinerKind::Simes).is_err());
        assert!(combine(&[0.1, 1.2], 1, CombinerKind::Simes).is_err());
        assert_eq!(combine(&[0.0, 0.3], 1, CombinerKind::Fisher).unwrap(), 0.0);
        // the zero is dropped when r = 2
        assert!(combine(&[0.0, 0.3], 2, CombinerKind::Fisher).unwrap() > 0.0);
    }

    #[test]
    fn chi2_even_tail_known_values() {
        // dof 2: exp(-x/2)
        assert!((chi2_sf_even(1, 3.0) - (-1.5f64).exp()).abs() < 1e-15);
        // dof 4: exp(-y)(1 + y)
        let y = 2.5f64;
        assert!((chi2_sf_even(2, 2.0 * y) - (-y).exp() * (1.0 + y)).abs() < 1e-15);
        assert_eq!(chi2_sf_even(3, 0.0), 1.0);
        assert!(chi2_sf_even(2, 4000.0) >= 0.0);
    }

    #[test]
    fn chi2_even_tail_against_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for k in [1usize, 2, 5, 9, 20, 60] {
            let d = ChiSquared::new(2.0 * k as f64).unwrap();
            let mut prev = 1.0;
            for i in 0..=400 {
                let x = i as f64 * 0.01 * (4 * k) as f64;
                let got = chi2_sf_even(k, x);
                assert!((got - d.sf(x)).abs() < 1e-13, "k={k} x={x}");
                assert!(got <= prev, "k={k} x={x}");
                prev = got;
            }
        }
    }

    #[test]
    fn pc_pair_examples() {
        let pair = pc_pair(&sv(&[3.0, 3.0, 3.0]), 2, CombinerKind::Bonferroni).unwrap();
        assert!((pair.p_plus - 0.0026997960632601).abs() < 1e-12);
        assert_eq!(pair.p_minus, 1.0);

        for c in CombinerKind::ALL {
            let pair = pc_pair(&sv(&[0.0; 5]), 3, c).unwrap();
            assert_eq!(pair.p_plus, pair.p_minus);
        }
    }

    #[test]
    fn combiner_names_round_trip() {
        for c in CombinerKind::ALL {
            assert_eq!(c.as_str().parse::<CombinerKind>().unwrap(), c);
        }
        assert!("stouffer".parse::<CombinerKind>().is_err());
    }

    #[test]
    fn study_vector_validation() {
        assert!(StudyVector::new(vec![]).is_err());
        assert!(StudyVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(StudyVector::new(vec![f64::INFINITY]).is_err());
    }

    fn z_and_r() -> impl Strategy<Value = (Vec<f64>, usize)> {
        prop::collection::vec(-6.0f64..6.0, 1..25)
            .prop_flat_map(|z| {
                let n = z.len();
                (Just(z), 1..=n)
            })
    }

    proptest! {
        #[test]
        fn bonferroni_duality((z, r) in z_and_r()) {
            let s = sv(&z);
            let pair = pc_pair(&s, r, CombinerKind::Bonferroni).unwrap();
            let dual = bonferroni_minus_from_right(&right_pvalues(&s), r).unwrap();
            prop_assert!((pair.p_minus - dual).abs() <= 1e-12);
        }

        #[test]
        fn sign_flip_swaps_exactly((z, r) in z_and_r()) {
            let s = sv(&z);
            for c in CombinerKind::ALL {
                let a = pc_pair(&s, r, c).unwrap();
                let b = pc_pair(&s.negated(), r, c).unwrap();
                prop_assert_eq!(a.p_plus, b.p_minus);
                prop_assert_eq!(a.p_minus, b.p_plus);
            }
        }

        #[test]
        fn permutation_invariant((z, r) in z_and_r(), seed in any::<u64>()) {
            let mut shuffled = z.clone();
            let len = shuffled.len();
            // deterministic Fisher-Yates driven by a simple LCG
            let mut state = seed;
            for i in (1..len).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            for c in CombinerKind::ALL {
                prop_assert_eq!(pc_pair(&sv(&z), r, c).unwrap(), pc_pair(&sv(&shuffled), r, c).unwrap());
            }
        }
    }
}
