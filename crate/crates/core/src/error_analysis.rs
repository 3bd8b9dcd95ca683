//! Type I and Type III error of the min-rule test.
//!
//! With Bonferroni combining, `p⁺ <= α` exactly when at least `r` of the
//! z-scores reach `t = Φ⁻¹(1 − α/(n − r + 1))`, and `p⁻ <= α` exactly when at
//! least `r` fall to `−t` or below. The rejection probability `c(θ)` of the
//! min rule is the probability of the union of those two events.
//!
//! When `2r > n + 1` the events are disjoint and `c(θ)` is the sum of two
//! Poisson-binomial tails ([`c_exact_disjoint`]). Below that regime only two
//! limiting null points have closed forms ([`c_concordant`],
//! [`c_discordant`]); everything else goes through [`mc_type1`].

use rayon::prelude::*;
use serde::Serialize;

use crate::directional::{check_alpha, ReplicabilityQuery};
use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_isf, rng_stream, ExtendedReal, PoissonBinomial};
use crate::partial_conjunction::{combine, CombinerKind};

/// Replicates per random stream; block `b` always draws from stream `b`, so
/// estimates do not depend on the number of worker threads.
pub const MC_BLOCK: u64 = 8192;

/// A point of the parameter space, entries possibly infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    theta: Vec<ExtendedReal>,
}

impl ThetaPoint {
    pub fn new(theta: Vec<ExtendedReal>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Domain("theta needs at least one entry".into()));
        }
        if theta
            .iter()
            .any(|x| matches!(x, ExtendedReal::Finite(v) if v.is_nan()))
        {
            return Err(Error::Domain("theta contains NaN".into()));
        }
        Ok(ThetaPoint { theta })
    }

    pub fn from_f64(theta: &[f64]) -> Result<Self> {
        Self::new(theta.iter().map(|&x| ExtendedReal::from(x)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![ExtendedReal::ZERO; n])
    }

    /// First `r − 1` entries at `value`, the rest zero.
    pub fn boundary(n: usize, r: usize, value: ExtendedReal) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::Domain(format!("r = {r} must lie in 1..={n}")));
        }
        let mut theta = vec![ExtendedReal::ZERO; n];
        theta[..r - 1].fill(value);
        Self::new(theta)
    }

    /// `r − 1` entries at +∞, the rest zero.
    pub fn concordant_limit(n: usize, r: usize) -> Result<Self> {
        Self::boundary(n, r, ExtendedReal::PosInf)
    }

    /// `r − 1` entries at +∞, `r − 1` at −∞, the rest zero. Needs `2r <= n + 1`.
    pub fn discordant_limit(n: usize, r: usize) -> Result<Self> {
        if r < 1 || 2 * r > n + 1 {
            return Err(Error::Regime(format!(
                "a discordant point needs 2r <= n + 1, got n = {n}, r = {r}"
            )));
        }
        let mut theta = vec![ExtendedReal::ZERO; n];
        theta[..r - 1].fill(ExtendedReal::PosInf);
        theta[r - 1..2 * r - 2].fill(ExtendedReal::NegInf);
        Self::new(theta)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn entries(&self) -> &[ExtendedReal] {
        &self.theta
    }

    pub fn n_plus(&self) -> usize {
        self.theta.iter().filter(|x| x.signum() > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.theta.iter().filter(|x| x.signum() < 0).count()
    }

    /// Whether `H_{r/n}` holds at this point.
    pub fn in_null(&self, r: usize) -> bool {
        self.n_plus() < r && self.n_minus() < r
    }
}

fn check_n_r(n: usize, r: usize) -> Result<()> {
    if r < 2 || r > n {
        return Err(Error::Domain(format!("r = {r} must lie in 2..={n}")));
    }
    Ok(())
}

fn require_disjoint(n: usize, r: usize) -> Result<()> {
    if 2 * r <= n + 1 {
        return Err(Error::Regime(format!(
            "rejection events overlap for n = {n}, r = {r}; need 2r > n + 1"
        )));
    }
    Ok(())
}

fn require_overlapping(n: usize, r: usize) -> Result<()> {
    if 2 * r > n + 1 {
        return Err(Error::Regime(format!(
            "closed form needs 2r <= n + 1, got n = {n}, r = {r}"
        )));
    }
    Ok(())
}

/// Bonferroni rejection threshold `t = Φ⁻¹(1 − α/(n − r + 1))`.
pub fn threshold_t(n: usize, r: usize, alpha: f64) -> Result<f64> {
    check_n_r(n, r)?;
    check_alpha(alpha)?;
    norm_isf(alpha / (n - r + 1) as f64)
}

/// Exact `c(θ) = P(X >= r) + P(Y >= r)` in the disjoint regime, where
/// `X` counts z-scores at or below `−t` and `Y` those at or above `t`.
pub fn c_exact_disjoint(theta: &ThetaPoint, r: usize, alpha: f64) -> Result<f64> {
    let n = theta.n();
    check_n_r(n, r)?;
    require_disjoint(n, r)?;
    let t = threshold_t(n, r, alpha)?;
    let low = theta.theta.iter().map(|&th| norm_cdf((-th).shift(-t))).collect();
    let high = theta.theta.iter().map(|&th| norm_cdf(th.shift(-t))).collect();
    let x = PoissonBinomial::new(low)?;
    let y = PoissonBinomial::new(high)?;
    Ok((x.tail(r)? + y.tail(r)?).min(1.0))
}

/// Supremum of `c(θ)` over the null boundary, `1 − (1 − α/m)^m` with
/// `m = n − r + 1`. Never exceeds α; equals α when `r = n`.
pub fn sup_boundary(n: usize, r: usize, alpha: f64) -> Result<f64> {
    check_n_r(n, r)?;
    check_alpha(alpha)?;
    require_disjoint(n, r)?;
    let m = (n - r + 1) as f64;
    Ok(-(m * (-alpha / m).ln_1p()).exp_m1())
}

fn ln_choose(m: usize, k: usize) -> f64 {
    libm::lgamma((m + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((m - k + 1) as f64)
}

fn choose(m: usize, k: usize) -> f64 {
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `c(θ⁺)`: `r − 1` infinitely strong positive effects, the rest null.
///
/// `[1 − Φ(t)^m] + Σ_{k=r}^{m} C(m, k) (1 − Φ(t))^k (2Φ(t) − 1)^{m−k}`,
/// `m = n − r + 1`. The first term is the chance that some null z-score
/// reaches `t`; the sum covers a left rejection with none of them doing so.
pub fn c_concordant(n: usize, r: usize, alpha: f64) -> Result<f64> {
    check_n_r(n, r)?;
    require_overlapping(n, r)?;
    let t = threshold_t(n, r, alpha)?;
    let m = n - r + 1;
    let upper = norm_cdf(-t);
    let inside = 1.0 - 2.0 * upper;
    let right = -(m as f64 * (-upper).ln_1p()).exp_m1();
    let left_only: f64 = (r..=m)
        .map(|k| {
            if m > 60 {
                (ln_choose(m, k) + k as f64 * upper.ln() + (m - k) as f64 * inside.ln()).exp()
            } else {
                choose(m, k) * upper.powi(k as i32) * inside.powi((m - k) as i32)
            }
        })
        .sum();
    Ok((right + left_only).min(1.0))
}

/// `c(θ̃)`: `r − 1` strong positive and `r − 1` strong negative effects,
/// `1 − (2Φ(t) − 1)^{n−2r+2}`.
pub fn c_discordant(n: usize, r: usize, alpha: f64) -> Result<f64> {
    check_n_r(n, r)?;
    require_overlapping(n, r)?;
    let t = threshold_t(n, r, alpha)?;
    let nulls = (n + 2 - 2 * r) as f64;
    Ok(-(nulls * (-2.0 * norm_cdf(-t)).ln_1p()).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeOneRow {
    pub r: usize,
    pub c_concordant: f64,
    pub c_discordant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeOneCurve {
    pub n: usize,
    pub alpha: f64,
    pub rows: Vec<TypeOneRow>,
}

/// Concordant and discordant Type I error for `r = 2..=⌊(n+1)/2⌋`.
pub fn figure1_curve(n: usize, alpha: f64) -> Result<TypeOneCurve> {
    if n < 4 {
        return Err(Error::Domain(format!("curve needs n >= 4, got {n}")));
    }
    check_alpha(alpha)?;
    let rows = (2..=n.div_ceil(2))
        .map(|r| {
            Ok(TypeOneRow {
                r,
                c_concordant: c_concordant(n, r, alpha)?,
                c_discordant: c_discordant(n, r, alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TypeOneCurve { n, alpha, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(hits: u64, reps: u64, seed: u64) -> Self {
        let estimate = hits as f64 / reps as f64;
        McEstimate {
            estimate,
            std_error: (estimate * (1.0 - estimate) / reps as f64).sqrt(),
            reps,
            seed,
        }
    }
}

/// Estimate the probability of `event` with `z_i = θ_i + Z_i`.
///
/// Infinite entries of θ stay infinite and consume no draws. `event` sees the
/// simulated vector in the original study order.
pub fn simulate_event<F>(theta: &ThetaPoint, reps: u64, seed: u64, event: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if reps == 0 {
        return Err(Error::Domain("reps must be at least 1".into()));
    }
    let blocks = reps.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng_stream(seed, b);
            let count = MC_BLOCK.min(reps - b * MC_BLOCK);
            let mut z = vec![0.0; theta.n()];
            let mut hits = 0u64;
            for _ in 0..count {
                for (zi, th) in z.iter_mut().zip(&theta.theta) {
                    *zi = match *th {
                        ExtendedReal::Finite(mean) => mean + stream.next_normal(),
                        ExtendedReal::PosInf => f64::INFINITY,
                        ExtendedReal::NegInf => f64::NEG_INFINITY,
                    };
                }
                hits += u64::from(event(&z));
            }
            hits
        })
        .sum();
    Ok(McEstimate::from_count(hits, reps, seed))
}

/// How a simulated z-vector is turned into the two one-sided rejections.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Rejector {
    /// Count z-scores at or beyond `±t` (Bonferroni and Šidák).
    Threshold { r: usize, t: f64 },
    /// Recompute both partial-conjunction p-values.
    PValues {
        r: usize,
        combiner: CombinerKind,
        level: f64,
    },
}

impl Rejector {
    pub(crate) fn for_query(q: &ReplicabilityQuery) -> Result<Self> {
        let level = q.effective_level();
        let m = (q.n() - q.r() + 1) as f64;
        let tail = match q.combiner() {
            CombinerKind::Bonferroni => level / m,
            CombinerKind::Sidak => -((-level).ln_1p() / m).exp_m1(),
            _ => return Ok(Self::pvalue_path(q)),
        };
        Ok(Rejector::Threshold {
            r: q.r(),
            t: norm_isf(tail)?,
        })
    }

    pub(crate) fn pvalue_path(q: &ReplicabilityQuery) -> Self {
        Rejector::PValues {
            r: q.r(),
            combiner: q.combiner(),
            level: q.effective_level(),
        }
    }

    /// `(right rejected, left rejected)`.
    pub(crate) fn sides(&self, z: &[f64]) -> (bool, bool) {
        match *self {
            Rejector::Threshold { r, t } => {
                let high = z.iter().filter(|&&x| x >= t).count();
                let low = z.iter().filter(|&&x| x <= -t).count();
                (high >= r, low >= r)
            }
            Rejector::PValues { r, combiner, level } => {
                let right: Vec<f64> = z.iter().map(|&x| norm_cdf(-x)).collect();
                let left: Vec<f64> = z.iter().map(|&x| norm_cdf(x)).collect();
                let p_plus = combine(&right, r, combiner).expect("r validated by query");
                let p_minus = combine(&left, r, combiner).expect("r validated by query");
                (p_plus <= level, p_minus <= level)
            }
        }
    }
}

fn check_theta_len(theta: &ThetaPoint, q: &ReplicabilityQuery) -> Result<()> {
    if theta.n() != q.n() {
        return Err(Error::LengthMismatch {
            expected: q.n(),
            got: theta.n(),
        });
    }
    Ok(())
}

/// Monte Carlo rejection probability of the test described by `q` at `theta`.
pub fn mc_type1(theta: &ThetaPoint, q: &ReplicabilityQuery, reps: u64, seed: u64) -> Result<McEstimate> {
    check_theta_len(theta, q)?;
    let rejector = Rejector::for_query(q)?;
    simulate_event(theta, reps, seed, |z| {
        let (right, left) = rejector.sides(z);
        right || left
    })
}

/// Monte Carlo probability of rejecting toward the wrong sign.
///
/// With at least `r` positive effects this is the chance that the left
/// partial conjunction rejects; symmetrically with at least `r` negative
/// effects. When both directions replicate no sign is wrong and the call
/// is a domain error.
pub fn mc_type3(theta: &ThetaPoint, q: &ReplicabilityQuery, reps: u64, seed: u64) -> Result<McEstimate> {
    check_theta_len(theta, q)?;
    let positive = theta.n_plus() >= q.r();
    let negative = theta.n_minus() >= q.r();
    if positive == negative {
        return Err(Error::Domain(format!(
            "type III error needs exactly one direction with at least r = {} effects (n+ = {}, n- = {})",
            q.r(),
            theta.n_plus(),
            theta.n_minus()
        )));
    }
    let rejector = Rejector::for_query(q)?;
    simulate_event(theta, reps, seed, |z| {
        let (right, left) = rejector.sides(z);
        if positive {
            left
        } else {
            right
        }
    })
}

/// `h(u) = Φ(t) + Φ(t + u) − 2Φ(t)Φ(t + u)`.
pub fn h_fn(u: f64, t: f64) -> f64 {
    let a = norm_cdf(t);
    let b = norm_cdf(t + u);
    a + b - 2.0 * a * b
}

/// `g(u) = −ln(h(−u) / h(u)) / (2t)`.
pub fn g_fn(u: f64, t: f64) -> f64 {
    -(h_fn(-u, t) / h_fn(u, t)).ln() / (2.0 * t) + 0.0
}

/// `(θ₁, g(g(θ₁)))` over `grid` for three studies and `r = 2`, where
/// `t = Φ⁻¹(1 − α/2)`. A stationary point of the rejection probability in
/// the mixed-sign quadrant would be a fixed point of `g∘g`.
pub fn gg_curve(grid: &[f64], alpha: f64) -> Result<Vec<(f64, f64)>> {
    check_alpha(alpha)?;
    let t = threshold_t(3, 2, alpha)?;
    Ok(grid.iter().map(|&x| (x, g_fn(g_fn(x, t), t))).collect())
}
