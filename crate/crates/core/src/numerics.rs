//! Probability primitives: the standard normal distribution, Poisson-binomial
//! sums of independent Bernoulli indicators, and seeded normal streams for
//! Monte Carlo work.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868_5;

/// A real number extended with the two infinities.
///
/// Effect sizes in the error-analysis engine are allowed to be infinite (the
/// limit points of the null space). Keeping the infinities as symbols means no
/// formula ever evaluates `inf - inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// Sign classification: `1` for positive, `-1` for negative, `0` for zero.
    pub fn signum(self) -> i8 {
        match self {
            ExtendedReal::NegInf => -1,
            ExtendedReal::PosInf => 1,
            ExtendedReal::Finite(x) if x > 0.0 => 1,
            ExtendedReal::Finite(x) if x < 0.0 => -1,
            ExtendedReal::Finite(_) => 0,
        }
    }

    /// `self + shift` for a finite shift.
    pub fn shift(self, by: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(x + by),
            inf => inf,
        }
    }
}

impl std::ops::Neg for ExtendedReal {
    type Output = ExtendedReal;

    fn neg(self) -> ExtendedReal {
        match self {
            ExtendedReal::NegInf => ExtendedReal::PosInf,
            ExtendedReal::PosInf => ExtendedReal::NegInf,
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => f.write_str("-inf"),
            ExtendedReal::PosInf => f.write_str("inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Standard normal CDF Φ(x), exact at the infinities.
pub fn norm_cdf(x: impl Into<ExtendedReal>) -> f64 {
    match x.into() {
        ExtendedReal::NegInf => 0.0,
        ExtendedReal::PosInf => 1.0,
        ExtendedReal::Finite(x) => 0.5 * libm::erfc(-x * FRAC_1_SQRT_2),
    }
}

/// Upper tail 1 − Φ(x), evaluated without cancellation.
pub fn norm_sf(x: impl Into<ExtendedReal>) -> f64 {
    norm_cdf(-x.into())
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal quantile Φ⁻¹(u) for `u` in (0, 1).
pub fn norm_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs a probability in (0, 1), got {u}"
        )));
    }
    if u <= 0.5 {
        Ok(lower_quantile(u))
    } else {
        // 1 - u is exact for u >= 0.5
        Ok(-lower_quantile(1.0 - u))
    }
}

/// Upper quantile: the `x` with 1 − Φ(x) = `tail`.
pub fn norm_isf(tail: f64) -> Result<f64> {
    norm_quantile(tail).map(|x| -x)
}

/// Lower-half quantile: AS241 initial value, then a Newton step on Φ.
fn lower_quantile(u: f64) -> f64 {
    let mut x = as241(u);
    let density = norm_pdf(x);
    if density > 0.0 {
        x -= (norm_cdf(x) - u) / density;
    }
    x
}

/// Wichura's AS241 (PPND16) rational approximation.
#[allow(clippy::excessive_precision)]
fn as241(u: f64) -> f64 {
    const SPLIT1: f64 = 0.425;
    const SPLIT2: f64 = 5.0;
    const CONST1: f64 = 0.180625;
    const CONST2: f64 = 1.6;

    const A: [f64; 8] = [
        3.3871328727963666080E0,
        1.3314166789178437745E+2,
        1.9715909503065514427E+3,
        1.3731693765509461125E+4,
        4.5921953931549871457E+4,
        6.7265770927008700853E+4,
        3.3430575583588128105E+4,
        2.5090809287301226727E+3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.2313330701600911252E+1,
        6.8718700749205790830E+2,
        5.3941960214247511077E+3,
        2.1213794301586595867E+4,
        3.9307895800092710610E+4,
        2.8729085735721942674E+4,
        5.2264952788528545610E+3,
    ];
    const C: [f64; 8] = [
        1.42343711074968357734E0,
        4.63033784615654529590E0,
        5.76949722146069140550E0,
        3.64784832476320460504E0,
        1.27045825245236838258E0,
        2.41780725177450611770E-1,
        2.27238449892691845833E-2,
        7.74545014278341407640E-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.05319162663775882187E0,
        1.67638483018380384940E0,
        6.89767334985100004550E-1,
        1.48103976427480074590E-1,
        1.51986665636164571966E-2,
        5.47593808499534494600E-4,
        1.05075007164441684324E-9,
    ];
    const E: [f64; 8] = [
        6.65790464350110377720E0,
        5.46378491116411436990E0,
        1.78482653991729133580E0,
        2.96560571828504891230E-1,
        2.65321895265761230930E-2,
        1.24266094738807843860E-3,
        2.71155556874348757815E-5,
        2.01033439929228813265E-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.99832206555887937690E-1,
        1.36929880922735805310E-1,
        1.48753612908506148525E-2,
        7.86869131145613259100E-4,
        1.84631831751005468180E-5,
        1.42151175831644588870E-7,
        2.04426310338993978564E-15,
    ];

    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = u - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { u } else { 1.0 - u };
    let r = (-tail.ln()).sqrt();
    let x = if r <= SPLIT2 {
        let r = r - CONST2;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - SPLIT2;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Distribution of a sum of independent Bernoulli indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonBinomial {
    probs: Vec<f64>,
}

impl PoissonBinomial {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!(
                "success probability {bad} lies outside [0, 1]"
            )));
        }
        Ok(PoissonBinomial { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of indicators `m`; the support is `0..=m`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Exact PMF by sequential convolution, `O(m²)`.
    pub fn pmf(&self) -> Vec<f64> {
        let mut pmf = vec![0.0; self.probs.len() + 1];
        pmf[0] = 1.0;
        for (i, &p) in self.probs.iter().enumerate() {
            let q = 1.0 - p;
            for j in (1..=i + 1).rev() {
                pmf[j] = pmf[j] * q + pmf[j - 1] * p;
            }
            pmf[0] *= q;
        }
        pmf
    }

    /// `P(S >= k)` for `k` in `0..=m+1`.
    pub fn tail(&self, k: usize) -> Result<f64> {
        let m = self.probs.len();
        if k > m + 1 {
            return Err(Error::Domain(format!(
                "tail index {k} outside 0..={}",
                m + 1
            )));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let tail: f64 = self.pmf()[k..].iter().sum();
        Ok(tail.min(1.0))
    }
}

/// Free-function form of [`PoissonBinomial::pmf`].
pub fn poisbin_pmf(d: &PoissonBinomial) -> Vec<f64> {
    d.pmf()
}

/// Free-function form of [`PoissonBinomial::tail`].
pub fn poisbin_tail(d: &PoissonBinomial, k: usize) -> Result<f64> {
    d.tail(k)
}

/// Deterministic stream of standard normal draws.
///
/// The generator is ChaCha8 keyed by `seed` (expanded with `seed_from_u64`)
/// with its 64-bit stream counter set to `stream_id`; draws come from the
/// ziggurat sampler of `rand_distr`. Distinct stream ids give independent,
/// non-overlapping sequences under the same seed, so parallel workers take
/// one stream each.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        NormalStream { rng }
    }

    pub fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

pub fn rng_stream(seed: u64, stream_id: u64) -> NormalStream {
    NormalStream::new(seed, stream_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_quantile(u: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn enumerate_pmf(probs: &[f64]) -> Vec<f64> {
        let m = probs.len();
        let mut pmf = vec![0.0; m + 1];
        for mask in 0u32..(1 << m) {
            let mut pr = 1.0;
            for (i, &p) in probs.iter().enumerate() {
                pr *= if mask & (1 << i) != 0 { p } else { 1.0 - p };
            }
            pmf[mask.count_ones() as usize] += pr;
        }
        pmf
    }

    #[test]
    fn cdf_fixed_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert_eq!(norm_cdf(ExtendedReal::PosInf), 1.0);
        assert_eq!(norm_cdf(ExtendedReal::NegInf), 0.0);
        assert_eq!(norm_cdf(f64::INFINITY), 1.0);
        assert!((norm_cdf(1.6448536269514722) - 0.95).abs() <= 1e-15);
    }

    #[test]
    fn quantile_matches_bisection() {
        assert_eq!(norm_quantile(0.5).unwrap(), 0.0);
        let u = 1.0 - 0.1 / 19.0;
        let t = norm_quantile(u).unwrap();
        assert!((t - bisect_quantile(u)).abs() < 1e-12);
        assert!((t - 2.558_042_726_986_768).abs() < 1e-12);
        for &u in &[1e-300, 1e-20, 1e-8, 0.01, 0.2, 0.45, 0.7, 0.999, 1.0 - 1e-12] {
            let x = norm_quantile(u).unwrap();
            assert!((norm_cdf(x) - u).abs() <= 1e-12 * u.max(1e-3), "u = {u}");
        }
    }

    #[test]
    fn quantile_symmetry_and_domain() {
        for &u in &[0.01, 0.1, 0.3, 0.49] {
            let a = norm_quantile(u).unwrap();
            let b = norm_quantile(1.0 - u).unwrap();
            assert!((a + b).abs() < 1e-12);
        }
        for &u in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(norm_quantile(u).is_err());
        }
    }

    #[test]
    fn pdf_values() {
        assert_eq!(norm_pdf(0.0), 0.3989422804014327);
        assert!((norm_pdf(1.0) - 0.24197072451914337).abs() <= 1e-15);
        assert_eq!(norm_pdf(1.3), norm_pdf(-1.3));
    }

    #[test]
    fn poisson_binomial_small_cases() {
        let d = PoissonBinomial::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(d.pmf(), vec![0.25, 0.5, 0.25]);
        assert_eq!(d.tail(1).unwrap(), 0.75);
        assert_eq!(d.tail(0).unwrap(), 1.0);
        assert_eq!(d.tail(3).unwrap(), 0.0);
        assert!(d.tail(4).is_err());

        let empty = PoissonBinomial::new(vec![]).unwrap();
        assert_eq!(empty.pmf(), vec![1.0]);

        let probs = [0.1, 0.2, 0.3];
        let d = PoissonBinomial::new(probs.to_vec()).unwrap();
        let oracle = enumerate_pmf(&probs);
        for (a, b) in d.pmf().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-15);
        }
        let oracle_tail = oracle[2] + oracle[3];
        assert!((d.tail(2).unwrap() - oracle_tail).abs() <= 1e-15);
    }

    #[test]
    fn poisson_binomial_rejects_bad_probs() {
        assert!(PoissonBinomial::new(vec![0.2, 1.1]).is_err());
        assert!(PoissonBinomial::new(vec![-0.01]).is_err());
        assert!(PoissonBinomial::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn extended_real_arithmetic() {
        assert_eq!(-ExtendedReal::PosInf, ExtendedReal::NegInf);
        assert_eq!(ExtendedReal::PosInf.shift(-1e300), ExtendedReal::PosInf);
        assert_eq!(ExtendedReal::from(f64::NEG_INFINITY), ExtendedReal::NegInf);
        assert_eq!(ExtendedReal::Finite(-0.0).signum(), 0);
        assert_eq!(norm_sf(ExtendedReal::PosInf), 0.0);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<f64> = rng_stream(7, 3).take(1000).collect();
        let b: Vec<f64> = rng_stream(7, 3).take(1000).collect();
        let c: Vec<f64> = rng_stream(7, 4).take(1000).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stream_moments() {
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for x in rng_stream(2024, 0).take(n) {
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }
}
