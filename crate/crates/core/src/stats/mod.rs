//! Closed-form statistics of SWAP-test distance decisions.
//!
//! A SWAP test on unit states returns 0 with probability
//! `p = (1 + |⟨φ|ψ⟩|²)/2`. Repeating it `N` times and declaring the pair
//! ε-neighbours iff the hit rate `p̂` exceeds a threshold `α_ε` gives a
//! binomial decision rule. This module holds the conversions between
//! probability, overlap and distance, the thresholds, the exact
//! false-negative tail `ξ_p(N, α)`, and the Chernoff-Hoeffding machinery
//! built on the Bernoulli KL divergence.
//!
//! Repetition counts that come out of bound formulas stay real-valued;
//! [`shots_for`] is the only place a ceiling is taken.

mod binomial;

pub use binomial::{ln_pmf, ln_upper_tail};

use serde::Serialize;

use crate::error::{domain, Result};

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("{name} = {x} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_ordered(alpha: f64, p: f64) -> Result<()> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("p", p)?;
    if alpha >= p {
        return Err(domain(format!("bounds need alpha < p, got alpha={alpha}, p={p}")));
    }
    Ok(())
}

fn check_power_of_two(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(domain(format!("n = {n} must be a power of two >= 4")));
    }
    Ok(())
}

/// `2p - 1`, clamped to `[0, 1]`.
pub fn prob_to_overlap_sq(p: f64) -> f64 {
    (2.0 * p - 1.0).clamp(0.0, 1.0)
}

/// `(1 + x)/2`: SWAP-test success probability for squared overlap `x`.
pub fn overlap_sq_to_prob(overlap_sq: f64) -> f64 {
    0.5 + 0.5 * overlap_sq
}

/// Euclidean distance of unit vectors with `|⟨u|v⟩| = overlap_abs`.
pub fn overlap_to_distance(overlap_abs: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap_abs) {
        return Err(domain(format!("overlap {overlap_abs} outside [0, 1]")));
    }
    Ok((2.0 * (1.0 - overlap_abs)).sqrt())
}

/// Overlap magnitude at distance `eps`, `1 - ε²/2`, floored at -1.
fn overlap_at(eps: f64) -> f64 {
    (1.0 - eps * eps / 2.0).max(-1.0)
}

/// Success-probability threshold equivalent to `distance < eps`:
/// `((1 - ε²/2)² + 1)/2` for `eps <= √2`.
///
/// Past `√2` every pair of unit states is a neighbour; the threshold then
/// continues as `(1 + o|o|)/2`, dropping below 1/2 so that the strict rule
/// `p > α` accepts orthogonal pairs too.
pub fn alpha_eps_standard(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(format!("eps = {eps} must be positive")));
    }
    let o = overlap_at(eps);
    Ok((1.0 + o * o.abs()) / 2.0)
}

/// Multi-state threshold `[(1 - ε²/2)² + 1]·2³/n³`.
pub fn alpha_eps_multi(eps: f64, n: usize) -> Result<f64> {
    check_power_of_two(n)?;
    Ok(alpha_eps_standard(eps)? * published_pair_constant(n) * 2.0)
}

/// The per-pair constant `2³/n³` (`= 1/2^{d_n}`) of the multi-state
/// probability law as published.
pub fn published_pair_constant(n: usize) -> f64 {
    8.0 / (n as f64).powi(3)
}

/// Published multi-state law `p_{0ij} = 2³(1 + |⟨φ_i|φ_j⟩|²)/n³`.
pub fn p0ij_theory(overlap_sq: f64, n: usize) -> Result<f64> {
    check_power_of_two(n)?;
    if !(0.0..=1.0).contains(&overlap_sq) {
        return Err(domain(format!("overlap_sq {overlap_sq} outside [0, 1]")));
    }
    Ok(published_pair_constant(n) * (1.0 + overlap_sq))
}

/// `KL(Ber(a) ‖ Ber(p))` in nats.
pub fn kl_bernoulli(a: f64, p: f64) -> Result<f64> {
    check_open_unit("a", a)?;
    check_open_unit("p", p)?;
    // ln((1-a)/(1-p)) through ln_1p keeps tiny a, p accurate
    let tail = (1.0 - a) * ((-a).ln_1p() - (-p).ln_1p());
    Ok((a * (a / p).ln() + tail).max(0.0))
}

/// `p̂ <= α`: the estimate fails to certify a neighbour.
pub fn is_false_negative(hits: u64, shots: u64, alpha: f64) -> bool {
    (hits as f64 / shots as f64) <= alpha
}

/// Smallest failure count `X` with `(N - X)/N <= α`, i.e. `⌈N(1 - α)⌉`
/// computed so it agrees with [`is_false_negative`] bit for bit.
pub fn failure_threshold(shots: u64, alpha: f64) -> u64 {
    let guess = ((shots as f64) * (1.0 - alpha)).ceil().clamp(0.0, shots as f64) as u64;
    let mut k = guess;
    while k > 0 && is_false_negative(shots - (k - 1), shots, alpha) {
        k -= 1;
    }
    while k <= shots && !is_false_negative(shots - k, shots, alpha) {
        k += 1;
    }
    k
}

/// `ln ξ_p(N, α)`, usable far below the f64 underflow threshold.
pub fn ln_false_negative_exact(shots: u64, alpha: f64, p: f64) -> Result<f64> {
    if shots == 0 {
        return Err(domain("N must be at least 1"));
    }
    check_open_unit("alpha", alpha)?;
    check_open_unit("p", p)?;
    let k = failure_threshold(shots, alpha);
    Ok(ln_upper_tail(k, shots, 1.0 - p, p))
}

/// Exact false-negative probability
/// `ξ_p(N, α) = Σ_{i >= ⌈N(1-α)⌉} C(N,i) (1-p)^i p^{N-i}`.
pub fn false_negative_exact(shots: u64, alpha: f64, p: f64) -> Result<f64> {
    Ok(ln_false_negative_exact(shots, alpha, p)?.exp())
}

/// `N(γ) = ln(1/γ) / KL(α ‖ p)`, unrounded.
pub fn n_gamma(gamma: f64, alpha: f64, p: f64) -> Result<f64> {
    check_open_unit("gamma", gamma)?;
    check_ordered(alpha, p)?;
    Ok((1.0 / gamma).ln() / kl_bernoulli(alpha, p)?)
}

/// Integer repetition count for planning: `⌈N(γ)⌉`, at least 1.
pub fn shots_for(gamma: f64, alpha: f64, p: f64) -> Result<u64> {
    let n = n_gamma(gamma, alpha, p)?;
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(domain(format!("N(gamma) = {n} is not a usable shot count")));
    }
    Ok((n.ceil() as u64).max(1))
}

/// Chernoff-Hoeffding upper bound `exp(-N·KL(α ‖ p))`.
pub fn chernoff_upper(shots: f64, alpha: f64, p: f64) -> Result<f64> {
    Ok(ln_chernoff_upper(shots, alpha, p)?.exp())
}

pub fn ln_chernoff_upper(shots: f64, alpha: f64, p: f64) -> Result<f64> {
    if !(shots > 0.0) {
        return Err(domain(format!("N = {shots} must be positive")));
    }
    check_ordered(alpha, p)?;
    Ok(-shots * kl_bernoulli(alpha, p)?)
}

/// Matching lower bound `exp(-N·KL(α ‖ p)) / √(2N)`.
pub fn chernoff_lower(shots: f64, alpha: f64, p: f64) -> Result<f64> {
    Ok(ln_chernoff_lower(shots, alpha, p)?.exp())
}

pub fn ln_chernoff_lower(shots: f64, alpha: f64, p: f64) -> Result<f64> {
    Ok(ln_chernoff_upper(shots, alpha, p)? - 0.5 * (2.0 * shots).ln())
}

/// Error level at which the lower bound evaluated at `N(γ)` equals `γ`:
/// `KL(α ‖ p) = 2 ln(1/γ)`.
pub fn gamma_tilde(alpha: f64, p: f64) -> Result<f64> {
    check_ordered(alpha, p)?;
    Ok((-kl_bernoulli(alpha, p)? / 2.0).exp())
}

/// Oracle-call scaling `n⁶/(2⁶γ²)` of the all-distances estimate.
pub fn theorem1_calls(n: usize, gamma: f64) -> Result<f64> {
    check_power_of_two(n)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(domain(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    Ok((n as f64).powi(6) / (64.0 * gamma * gamma))
}

/// Repetition lower-bound curve `n³ ln(1/γ̃) / ln n`.
pub fn proposition1_lower(n: usize, gamma_t: f64) -> Result<f64> {
    check_power_of_two(n)?;
    check_open_unit("gamma", gamma_t)?;
    let nf = n as f64;
    Ok(nf.powi(3) * (1.0 / gamma_t).ln() / nf.ln())
}

/// The `(α, p, N, γ)` quadruple behind one bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsQuery {
    pub alpha: f64,
    pub p: f64,
    pub shots: u64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub kl: f64,
    pub xi_exact: f64,
    pub upper: f64,
    pub lower: f64,
    pub n_gamma: f64,
}

impl BoundsQuery {
    pub fn new(alpha: f64, p: f64, shots: u64, gamma: f64) -> Result<Self> {
        check_ordered(alpha, p)?;
        check_open_unit("gamma", gamma)?;
        if shots == 0 {
            return Err(domain("N must be at least 1"));
        }
        Ok(Self {
            alpha,
            p,
            shots,
            gamma,
        })
    }

    pub fn evaluate(&self) -> Result<BoundsReport> {
        let n = self.shots as f64;
        Ok(BoundsReport {
            kl: kl_bernoulli(self.alpha, self.p)?,
            xi_exact: false_negative_exact(self.shots, self.alpha, self.p)?,
            upper: chernoff_upper(n, self.alpha, self.p)?,
            lower: chernoff_lower(n, self.alpha, self.p)?,
            n_gamma: n_gamma(self.gamma, self.alpha, self.p)?,
        })
    }
}

/// How a hit rate maps back to an overlap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EstimatorMode {
    /// Two-state SWAP test, `p = (1 + x)/2`.
    Standard,
    /// Multi-state test with the published constant, `p = 2³(1 + x)/n³`.
    Multi { n: usize },
    /// Multi-state test with a measured per-pair constant, `p = c(1 + x)`.
    Calibrated { constant: f64 },
}

impl EstimatorMode {
    /// Hit probability per unit of `(1 + x)`.
    pub fn pair_constant(&self) -> f64 {
        match *self {
            EstimatorMode::Standard => 0.5,
            EstimatorMode::Multi { n } => published_pair_constant(n),
            EstimatorMode::Calibrated { constant } => constant,
        }
    }

    /// Decision threshold on the hit rate for scale `eps`.
    pub fn threshold(&self, eps: f64) -> Result<f64> {
        Ok(2.0 * self.pair_constant() * alpha_eps_standard(eps)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub pair: (usize, usize),
    pub shots_total: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub overlap_sq_hat: f64,
    pub distance_hat: f64,
    /// The raw inversion fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
}

/// Inverts a hit count into overlap and distance estimates.
pub fn estimate_from_counts(hits: u64, shots: u64, mode: EstimatorMode) -> Result<OverlapEstimate> {
    if shots == 0 {
        return Err(domain("shots must be at least 1"));
    }
    if hits > shots {
        return Err(domain(format!("hits {hits} exceed shots {shots}")));
    }
    if let EstimatorMode::Multi { n } = mode {
        check_power_of_two(n)?;
    }
    let c = mode.pair_constant();
    if !(c > 0.0) {
        return Err(domain(format!("pair constant {c} must be positive")));
    }
    let p_hat = hits as f64 / shots as f64;
    let raw = p_hat / c - 1.0;
    let overlap_sq_hat = raw.clamp(0.0, 1.0);
    Ok(OverlapEstimate {
        pair: (0, 1),
        shots_total: shots,
        hits,
        p_hat,
        overlap_sq_hat,
        distance_hat: overlap_to_distance(overlap_sq_hat.sqrt())?,
        clamped: raw != overlap_sq_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, SQRT_2};

    #[test]
    fn probability_overlap_distance() {
        assert_eq!(prob_to_overlap_sq(1.0), 1.0);
        assert_eq!(prob_to_overlap_sq(0.5), 0.0);
        assert_eq!(prob_to_overlap_sq(0.75), 0.5);
        assert_eq!(prob_to_overlap_sq(0.3), 0.0);
        assert_eq!(overlap_to_distance(1.0).unwrap(), 0.0);
        assert!((overlap_to_distance(0.0).unwrap() - SQRT_2).abs() < 1e-15);
        let d = overlap_to_distance(1.0 / SQRT_2).unwrap();
        assert!((d - (2.0 - SQRT_2).sqrt()).abs() < 1e-15);
        assert!((d - 0.76537).abs() < 1e-5);
        // cross-check against the chord between unit vectors 45° apart
        let chord = ((1.0 - (0.25 * std::f64::consts::PI).cos()).powi(2)
            + (0.25 * std::f64::consts::PI).sin().powi(2))
        .sqrt();
        assert!((d - chord).abs() < 1e-12);
        assert!(overlap_to_distance(1.5).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((alpha_eps_standard(SQRT_2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(alpha_eps_standard(1.0).unwrap(), 0.625);
        assert!((alpha_eps_standard(1e-9).unwrap() - 1.0).abs() < 1e-15);
        assert!(alpha_eps_standard(0.0).is_err());
        assert!(alpha_eps_standard(-1.0).is_err());
        assert!(alpha_eps_standard(1.5).unwrap() < 0.5);

        assert!((alpha_eps_multi(SQRT_2, 4).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(alpha_eps_multi(1.0, 4).unwrap(), 0.15625);
        assert!((alpha_eps_multi(SQRT_2, 8).unwrap() - 0.015625).abs() < 1e-15);
        assert!(alpha_eps_multi(1.0, 6).is_err());
    }

    #[test]
    fn published_multi_law() {
        assert_eq!(p0ij_theory(1.0, 4).unwrap(), 0.25);
        assert_eq!(p0ij_theory(0.0, 4).unwrap(), 0.125);
        assert_eq!(p0ij_theory(0.5, 8).unwrap(), 0.0234375);
        assert!(p0ij_theory(1.5, 4).is_err());
        assert!(p0ij_theory(0.5, 5).is_err());
    }

    #[test]
    fn kl_values() {
        let k = kl_bernoulli(0.5, 0.9).unwrap();
        assert!((k - 0.5108).abs() < 1e-4);
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
        assert!((kl_bernoulli(0.25, 0.75).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!(kl_bernoulli(0.0, 0.5).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
    }

    #[test]
    fn false_negative_values() {
        assert!((false_negative_exact(1, 0.5, 0.9).unwrap() - 0.1).abs() < 1e-15);
        // P(Bin(10, 0.1) >= 5), expanded by hand
        let q: f64 = 0.1;
        let direct: f64 = (5..=10u32)
            .map(|i| {
                let c = (1..=i).fold(1.0, |acc, k| acc * (10 - i + k) as f64 / k as f64);
                c * q.powi(i as i32) * (1.0 - q).powi(10 - i as i32)
            })
            .sum();
        let xi = false_negative_exact(10, 0.5, 0.9).unwrap();
        assert!((xi - direct).abs() < 1e-13 * direct);
        assert!((xi - 1.63e-3).abs() < 1e-5);
        assert!(false_negative_exact(50, 0.5, 1.0 - 1e-15).unwrap() < 1e-300);
        assert!(false_negative_exact(0, 0.5, 0.9).is_err());
    }

    #[test]
    fn threshold_matches_decision_rule() {
        for shots in 1..300u64 {
            for a in 1..100 {
                let alpha = a as f64 / 100.0;
                let k = failure_threshold(shots, alpha);
                if k <= shots {
                    assert!(is_false_negative(shots - k, shots, alpha));
                }
                if k > 0 {
                    assert!(!is_false_negative(shots - (k - 1), shots, alpha));
                }
            }
        }
    }

    #[test]
    fn sample_complexity() {
        let n = n_gamma(0.7746, 0.5, 0.9).unwrap();
        assert!((n - 0.5).abs() < 0.005);
        let n = n_gamma(0.1, 0.5, 0.9).unwrap();
        assert!((n - 10f64.ln() / kl_bernoulli(0.5, 0.9).unwrap()).abs() < 1e-12);
        assert!((n - 4.51).abs() < 0.01);
        assert!(n_gamma(0.1, 0.5, 0.5 + 1e-9).unwrap() > 1e15);
        assert!(n_gamma(0.1, 0.9, 0.5).is_err());
        assert_eq!(shots_for(0.1, 0.5, 0.9).unwrap(), 5);
    }

    #[test]
    fn chernoff_bounds() {
        let up = chernoff_upper(10.0, 0.5, 0.9).unwrap();
        assert!((up - 6.05e-3).abs() < 1e-5);
        let lo = chernoff_lower(10.0, 0.5, 0.9).unwrap();
        assert!((lo - 1.35e-3).abs() < 1e-5);
        assert!((lo / up - 1.0 / 20f64.sqrt()).abs() < 1e-15);
        assert!((chernoff_upper(1e-300, 0.5, 0.9).unwrap() - 1.0).abs() < 1e-15);
        let ng = n_gamma(0.2, 0.5, 0.9).unwrap();
        assert!((chernoff_upper(ng, 0.5, 0.9).unwrap() - 0.2).abs() < 1e-14);
        let kl = kl_bernoulli(0.5, 0.9).unwrap();
        let expected = 0.2 / (2.0 * (5f64).ln() / kl).sqrt();
        assert!((chernoff_lower(ng, 0.5, 0.9).unwrap() - expected).abs() < 1e-14);
        assert!(chernoff_upper(0.0, 0.5, 0.9).is_err());
    }

    #[test]
    fn sharpness_point() {
        let g = gamma_tilde(0.5, 0.9).unwrap();
        assert!((g - 0.7746).abs() < 5e-3);
        let kl = kl_bernoulli(0.5, 0.9).unwrap();
        assert!((kl - 2.0 * (1.0 / g).ln()).abs() < 1e-12);
        assert!(gamma_tilde(0.5, 0.5 + 1e-9).unwrap() > 1.0 - 1e-12);
        for a in [0.1, 0.3, 0.5, 0.7] {
            for dp in [0.05, 0.1, 0.2] {
                let p = a + dp;
                let g = gamma_tilde(a, p).unwrap();
                let n = n_gamma(g, a, p).unwrap();
                assert!((chernoff_lower(n, a, p).unwrap() - g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaling_curves() {
        assert_eq!(theorem1_calls(4, 1.0).unwrap(), 64.0);
        assert_eq!(theorem1_calls(8, 0.5).unwrap(), 16384.0);
        assert_eq!(
            theorem1_calls(16, 0.3).unwrap() / theorem1_calls(8, 0.3).unwrap(),
            64.0
        );
        assert!((proposition1_lower(8, 1.0 / E).unwrap() - 512.0 / 8f64.ln()).abs() < 1e-12);
        assert!((proposition1_lower(8, 1.0 / E).unwrap() - 246.2).abs() < 0.05);
        assert!((proposition1_lower(4, 1.0 / E).unwrap() - 46.2).abs() < 0.05);
        let mut prev = 0.0;
        for k in 2..20 {
            let v = proposition1_lower(1 << k, 0.3).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn estimates() {
        let e = estimate_from_counts(100, 100, EstimatorMode::Standard).unwrap();
        assert_eq!((e.p_hat, e.overlap_sq_hat, e.distance_hat), (1.0, 1.0, 0.0));
        let e = estimate_from_counts(50, 100, EstimatorMode::Standard).unwrap();
        assert_eq!(e.overlap_sq_hat, 0.0);
        assert!((e.distance_hat - SQRT_2).abs() < 1e-15);
        let e = estimate_from_counts(25, 100, EstimatorMode::Multi { n: 4 }).unwrap();
        assert_eq!((e.p_hat, e.overlap_sq_hat, e.distance_hat), (0.25, 1.0, 0.0));
        let e = estimate_from_counts(30, 100, EstimatorMode::Standard).unwrap();
        assert!(e.clamped);
        assert!(estimate_from_counts(5, 4, EstimatorMode::Standard).is_err());
        assert!(estimate_from_counts(0, 0, EstimatorMode::Standard).is_err());
    }

    #[test]
    fn bounds_query_evaluates() {
        let r = BoundsQuery::new(0.5, 0.9, 10, 0.1).unwrap().evaluate().unwrap();
        assert!(r.lower <= r.xi_exact && r.xi_exact <= r.upper);
        assert!(BoundsQuery::new(0.9, 0.5, 10, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn overlap_round_trip(x in 0.0f64..=1.0) {
            prop_assert!((prob_to_overlap_sq(overlap_sq_to_prob(x)) - x).abs() <= 1e-15);
        }

        #[test]
        fn tail_is_monotone(shots in 1u64..120, a in 0.05f64..0.9, dp in 0.01f64..0.09) {
            let p = (a + dp).min(0.99);
            let base = false_negative_exact(shots, a, p).unwrap();
            let higher_p = false_negative_exact(shots, a, (p + 0.005).min(0.995)).unwrap();
            let higher_a = false_negative_exact(shots, (a + 0.005).min(p - 1e-6), p).unwrap();
            prop_assert!(higher_p <= base * (1.0 + 1e-12));
            prop_assert!(higher_a >= base * (1.0 - 1e-12));
        }

        #[test]
        fn upper_bound_always_holds(shots in 1u64..400, a in 0.05f64..0.95, dp in 0.02f64..0.5) {
            let p = a + dp;
            prop_assume!(p < 0.995);
            let xi = ln_false_negative_exact(shots, a, p).unwrap();
            let up = ln_chernoff_upper(shots as f64, a, p).unwrap();
            prop_assert!(xi <= up + 1e-12);
        }
    }
}
