//! Independent reference computations for the integration and acceptance
//! tests. Nothing here calls into the crate's combining or convolution code.

#![allow(dead_code)]

use dirrep::CombinerKind;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Poisson-binomial PMF by summing over all `2^m` outcomes.
pub fn enumerate_pmf(probs: &[f64]) -> Vec<f64> {
    let m = probs.len();
    let mut pmf = vec![0.0; m + 1];
    for mask in 0u32..(1u32 << m) {
        let mut pr = 1.0;
        for (i, &p) in probs.iter().enumerate() {
            pr *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
        }
        pmf[mask.count_ones() as usize] += pr;
    }
    pmf
}

pub fn binomial_pmf(m: usize, p: f64) -> Vec<f64> {
    (0..=m)
        .map(|k| {
            let mut c = 1.0;
            for i in 0..k {
                c = c * (m - i) as f64 / (i + 1) as f64;
            }
            c * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)
        })
        .collect()
}

fn insertion_sorted(p: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(p.len());
    for &x in p {
        let pos = v.iter().position(|&y| y > x).unwrap_or(v.len());
        v.insert(pos, x);
    }
    v
}

/// Straight-line combining formulas; `r` is 1-based.
pub fn combine_oracle(p: &[f64], r: usize, combiner: CombinerKind) -> f64 {
    let s = insertion_sorted(p);
    let n = s.len();
    let m = n - r + 1;
    let raw = match combiner {
        CombinerKind::Bonferroni => m as f64 * s[r - 1],
        CombinerKind::Sidak => 1.0 - (1.0 - s[r - 1]).powi(m as i32),
        CombinerKind::Simes => {
            let mut best = f64::INFINITY;
            for i in 1..=m {
                let v = m as f64 / i as f64 * s[(r - 1) + (i - 1)];
                if v < best {
                    best = v;
                }
            }
            best
        }
        CombinerKind::Fisher => {
            let mut stat = 0.0;
            for x in &s[r - 1..] {
                stat += -2.0 * x.ln();
            }
            ChiSquared::new(2.0 * m as f64).unwrap().sf(stat)
        }
    };
    raw.clamp(0.0, 1.0)
}

/// Parse CSV text into header and rows of strings.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

pub const CURVE20_CONCORDANT: [f64; 9] = [
    0.09948031, 0.09553569, 0.09543220, 0.09544652, 0.09546549, 0.09548723, 0.09551232, 0.09554163,
    0.09557629,
];

pub const CURVE20_DISCORDANT: [f64; 9] = [
    0.17343603, 0.16370412, 0.15268471, 0.14010534, 0.12561125, 0.10873181, 0.08882939, 0.06501844,
    0.03603306,
];

/// `(θ₁, g∘g(θ₁))` as printed for the three-study fixed-point plot.
pub const GG_POINTS: [(f64, f64); 10] = [
    (0.0, 0.0),
    (0.3333333, 0.1142378),
    (0.6666667, 0.2115821),
    (1.0, 0.2863999),
    (1.3333333, 0.3416454),
    (1.6666667, 0.3820159),
    (2.0, 0.4111723),
    (2.3333333, 0.4316986),
    (2.6666667, 0.4455676),
    (3.0, 0.4544309),
];
