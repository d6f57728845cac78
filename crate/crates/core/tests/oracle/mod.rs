//! Reference computations that share no code path with the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::LN_2;

/// `(top, shift)` with `x ≈ top · 2^shift` and `top` holding 60 bits.
fn split(x: &BigInt) -> (f64, i64) {
    assert!(x > &BigInt::zero());
    let shift = x.bits().saturating_sub(60);
    ((x >> shift).to_f64().unwrap(), shift as i64)
}

/// `ln(a/b)` for positive big integers, without forming either logarithm.
fn ln_ratio(a: &BigInt, b: &BigInt) -> f64 {
    let (ta, sa) = split(a);
    let (tb, sb) = split(b);
    (ta / tb).ln() + (sa - sb) as f64 * LN_2
}

/// `ln` of the exact probability that `Binomial(shots, 1 - p)` reaches the
/// smallest failure count `k` for which the hit rate `(shots - k)/shots`,
/// computed in f64, is at most `alpha`. `p` is taken as the exact rational
/// value of its f64 representation.
pub fn ln_tail_exact(shots: u64, alpha: f64, p: f64) -> f64 {
    let k = (0..=shots)
        .find(|&i| ((shots - i) as f64 / shots as f64) <= alpha)
        .unwrap();
    let p = BigRational::from_float(p).unwrap();
    // common denominator D: p = P/D, q = (D - P)/D
    let d = p.denom().clone();
    let big_p = p.numer().clone();
    let big_q = &d - &big_p;
    let mut numer = BigInt::zero();
    let mut binom = BigInt::one();
    for i in 0..=shots {
        if i > 0 {
            binom = binom * BigInt::from(shots - i + 1) / BigInt::from(i);
        }
        if i >= k {
            numer += &binom * big_q.pow(i as u32) * big_p.pow((shots - i) as u32);
        }
    }
    ln_ratio(&numer, &d.pow(shots as u32))
}

/// `|⟨a|b⟩|²` straight from amplitudes.
pub fn overlap_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Reference ε-graph edge list by double loop, strict `<` on the distance.
pub fn scan_edges(points: &[Vec<f64>], eps: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < eps * eps {
                out.push((i, j));
            }
        }
    }
    out
}

#[test]
fn tail_oracle_small_cases() {
    // N = 1: one failure has probability 1 - p
    assert!((ln_tail_exact(1, 0.5, 0.9) - 0.1f64.ln()).abs() < 1e-15);
    // N = 2, alpha = 0.5: at least one failure
    let p: f64 = 0.75;
    assert!((ln_tail_exact(2, 0.5, p) - (1.0 - p * p).ln()).abs() < 1e-15);
}
