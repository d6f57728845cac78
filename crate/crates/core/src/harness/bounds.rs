use serde::Serialize;

use super::{config_json, fmt_real, Table};
use crate::circuits::build_swap_test;
use crate::egraph::{encode_point, BuildOptions, GraphBuilder, PointCloud, QuantumStandard};
use crate::error::{domain, Result};
use crate::seeding;
use crate::statevec::{Marginal, StateVector};
use crate::stats::{
    chernoff_lower, chernoff_upper, false_negative_exact, gamma_tilde, is_false_negative,
    kl_bernoulli, ln_chernoff_lower, ln_chernoff_upper, ln_false_negative_exact, n_gamma,
    shots_for,
};

/// Grid for [`run_bounds_sweep`]. Without an explicit `p` grid each `α` is
/// paired with `p = α + 0.02, α + 0.03, …, 0.99`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsSweep {
    pub shots: Vec<u64>,
    pub alpha: Vec<f64>,
    pub p: Option<Vec<f64>>,
}

impl BoundsSweep {
    fn p_values(&self, alpha: f64) -> Vec<f64> {
        match &self.p {
            Some(ps) => ps.iter().copied().filter(|&p| p > alpha && p < 1.0).collect(),
            None => (0..)
                .map(|k| ((alpha + 0.02 + 0.01 * k as f64) * 1e12).round() / 1e12)
                .take_while(|&p| p <= 0.99)
                .collect(),
        }
    }
}

/// Exact tail against the two Chernoff-Hoeffding bounds on every grid cell.
///
/// Comparisons are made on logarithms so cells whose values underflow f64
/// are still decided. `aligned` marks cells where `N·α` is an integer.
/// Cells with `p <= α` in an explicit grid are skipped.
pub fn run_bounds_sweep(sweep: &BoundsSweep) -> Result<Table> {
    let mut t = Table::new(&[
        "N",
        "alpha",
        "p",
        "kl",
        "xi_exact",
        "upper",
        "lower",
        "ln_xi_exact",
        "ln_upper",
        "ln_lower",
        "aligned",
        "upper_ok",
        "lower_ok",
        "sandwich_ok",
    ]);
    t.meta("config", config_json(sweep)?);
    t.meta("xi_exact", "sum_{i >= ceil(N(1-alpha))} C(N,i) (1-p)^i p^(N-i)");
    t.meta("upper", "exp(-N KL(alpha||p))");
    t.meta("lower", "exp(-N KL(alpha||p)) / sqrt(2N)");
    let (mut cells, mut failures, mut upper_failures) = (0u64, 0u64, 0u64);
    let (mut aligned_cells, mut aligned_failures) = (0u64, 0u64);
    for &n in &sweep.shots {
        if n == 0 {
            return Err(domain("N grid must be positive"));
        }
        for &alpha in &sweep.alpha {
            for p in sweep.p_values(alpha) {
                let nf = n as f64;
                let ln_xi = ln_false_negative_exact(n, alpha, p)?;
                let ln_up = ln_chernoff_upper(nf, alpha, p)?;
                let ln_lo = ln_chernoff_lower(nf, alpha, p)?;
                let upper_ok = ln_xi <= ln_up;
                let lower_ok = ln_lo <= ln_xi;
                let na = nf * alpha;
                let aligned = (na - na.round()).abs() < 1e-9;
                cells += 1;
                failures += u64::from(!(upper_ok && lower_ok));
                upper_failures += u64::from(!upper_ok);
                if aligned {
                    aligned_cells += 1;
                    aligned_failures += u64::from(!(upper_ok && lower_ok));
                }
                t.push(vec![
                    n.into(),
                    alpha.into(),
                    p.into(),
                    kl_bernoulli(alpha, p)?.into(),
                    ln_xi.exp().into(),
                    ln_up.exp().into(),
                    ln_lo.exp().into(),
                    ln_xi.into(),
                    ln_up.into(),
                    ln_lo.into(),
                    aligned.into(),
                    upper_ok.into(),
                    lower_ok.into(),
                    (upper_ok && lower_ok).into(),
                ]);
            }
        }
    }
    t.meta("cells", cells);
    t.meta("sandwich_failures", failures);
    t.meta("upper_failures", upper_failures);
    t.meta("aligned_cells", aligned_cells);
    t.meta("aligned_failures", aligned_failures);
    Ok(t)
}

/// The sharpness example at `(α, p)`: KL, `γ̃`, `N(γ̃)` and the lower bound
/// evaluated there, which should give back `γ̃`.
pub fn run_lemma1_example(alpha: f64, p: f64) -> Result<Table> {
    let mut t = Table::new(&[
        "alpha",
        "p",
        "kl",
        "gamma_tilde",
        "n_gamma_tilde",
        "lower_at_n_gamma_tilde",
        "sharpness_delta",
    ]);
    t.meta("gamma_tilde", "exp(-KL(alpha||p) / 2)");
    t.meta("n_gamma_tilde", "ln(1/gamma_tilde) / KL(alpha||p)");
    t.meta("lower_at_n_gamma_tilde", "exp(-N KL) / sqrt(2N) at N = n_gamma_tilde");
    let kl = kl_bernoulli(alpha, p)?;
    let g = gamma_tilde(alpha, p)?;
    let n = n_gamma(g, alpha, p)?;
    let lower = chernoff_lower(n, alpha, p)?;
    t.push(vec![
        alpha.into(),
        p.into(),
        kl.into(),
        g.into(),
        n.into(),
        lower.into(),
        (lower - g).abs().into(),
    ]);
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FnRateConfig {
    /// Success probability of the designed pair.
    pub p: f64,
    pub alpha: f64,
    pub shots: u64,
    pub trials: u64,
    pub seed: u64,
}

/// SWAP-test marginal of `|0⟩` against a real qubit with squared overlap
/// `2p - 1`, so that `P(0) = p`.
fn designed_pair(p: f64) -> Result<Marginal> {
    if !(0.5..=1.0).contains(&p) {
        return Err(domain(format!("a SWAP test cannot reach p = {p}")));
    }
    let overlap_sq = 2.0 * p - 1.0;
    let a = StateVector::basis(1, 0)?;
    let b = StateVector::qubit(2.0 * overlap_sq.sqrt().acos(), 0.0);
    let circuit = build_swap_test(1)?;
    circuit.run(&[a, b])?.exact_marginal(&circuit.layout.measured())
}

fn count_false_negatives(
    marginal: &Marginal,
    alpha: f64,
    shots: u64,
    trials: u64,
    seed: u64,
    stream_base: u64,
) -> Result<u64> {
    let mut fn_count = 0;
    for trial in 0..trials {
        let mut rng = seeding::stream(seed, stream_base + trial);
        let hits = marginal.sample(shots, &mut rng)?[0];
        fn_count += u64::from(is_false_negative(hits, shots, alpha));
    }
    Ok(fn_count)
}

/// Monte Carlo false-negative frequency of one designed pair, compared
/// with the exact tail and the bounds.
pub fn run_fn_rate(config: &FnRateConfig) -> Result<Table> {
    let FnRateConfig {
        p,
        alpha,
        shots,
        trials,
        seed,
    } = *config;
    if trials == 0 || shots == 0 {
        return Err(domain("shots and trials must be positive"));
    }
    let marginal = designed_pair(p)?;
    let p_exact = marginal.probability(0);
    let fn_count = count_false_negatives(&marginal, alpha, shots, trials, seed, 0)?;
    let xi = false_negative_exact(shots, alpha, p_exact)?;
    let rate = fn_count as f64 / trials as f64;
    let sigma = (xi * (1.0 - xi) / trials as f64).sqrt();
    let mut t = Table::new(&[
        "p",
        "p_exact",
        "alpha",
        "shots",
        "trials",
        "fn_count",
        "fn_rate",
        "xi_exact",
        "sigma",
        "z",
        "upper",
        "lower",
    ]);
    t.meta("config", config_json(config)?);
    t.meta("sigma", "sqrt(xi_exact (1 - xi_exact) / trials)");
    t.meta("z", "(fn_rate - xi_exact) / sigma");
    t.push(vec![
        p.into(),
        p_exact.into(),
        alpha.into(),
        shots.into(),
        trials.into(),
        fn_count.into(),
        rate.into(),
        xi.into(),
        sigma.into(),
        ((rate - xi) / sigma).into(),
        chernoff_upper(shots as f64, alpha, p_exact)?.into(),
        chernoff_lower(shots as f64, alpha, p_exact)?.into(),
    ]);
    Ok(t)
}

/// For every true neighbour pair of `cloud` under the per-pair SWAP test,
/// runs `trials` decisions with `⌈N(γ)⌉` shots and records the
/// false-negative frequency against `γ + 4σ`, `σ = √(γ(1-γ)/trials)`.
pub fn run_pair_fn_rates(
    cloud: &PointCloud,
    eps: f64,
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<Table> {
    if trials == 0 {
        return Err(domain("trials must be positive"));
    }
    let exact = QuantumStandard.build(cloud, eps, &BuildOptions::default())?;
    let circuit = build_swap_test(encode_point(cloud.point(0))?.num_qubits())?;
    let sigma = (gamma * (1.0 - gamma) / trials as f64).sqrt();
    let mut t = Table::new(&[
        "i",
        "j",
        "p_exact",
        "alpha",
        "shots",
        "trials",
        "fn_count",
        "fn_rate",
        "xi_exact",
        "limit",
        "within_limit",
    ]);
    t.meta("shots", "ceil(ln(1/gamma) / KL(alpha||p))");
    t.meta("limit", "gamma + 4 sqrt(gamma (1 - gamma) / trials)");
    t.meta("gamma", fmt_real(gamma));
    for rec in exact.pairs.iter().filter(|r| r.p_exact > r.threshold) {
        let (i, j) = rec.estimate.pair;
        let shots = shots_for(gamma, rec.threshold, rec.p_exact)?;
        let a = encode_point(cloud.point(i))?;
        let b = encode_point(cloud.point(j))?;
        let marginal = circuit.run(&[a, b])?.exact_marginal(&circuit.layout.measured())?;
        let base = seeding::pair_stream(i, j, cloud.len()) << 32;
        let fn_count = count_false_negatives(&marginal, rec.threshold, shots, trials, seed, base)?;
        let rate = fn_count as f64 / trials as f64;
        let limit = gamma + 4.0 * sigma;
        t.push(vec![
            i.into(),
            j.into(),
            rec.p_exact.into(),
            rec.threshold.into(),
            shots.into(),
            trials.into(),
            fn_count.into(),
            rate.into(),
            false_negative_exact(shots, rec.threshold, rec.p_exact)?.into(),
            limit.into(),
            (rate <= limit).into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_small_grid() {
        let t = run_bounds_sweep(&BoundsSweep {
            shots: vec![1, 10],
            alpha: vec![0.5],
            p: Some(vec![0.3, 0.9]),
        })
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        let xi1 = t.get(0, "xi_exact").unwrap().as_f64().unwrap();
        assert!((xi1 - 0.1).abs() < 1e-15);
        let xi10 = t.get(1, "xi_exact").unwrap().as_f64().unwrap();
        assert!((xi10 - 1.6349374e-3).abs() < 1e-9);
        assert_eq!(t.get(1, "sandwich_ok").unwrap().as_bool(), Some(true));
        assert_eq!(t.get(1, "aligned").unwrap().as_bool(), Some(true));
    }

    #[test]
    fn default_p_grid() {
        let s = BoundsSweep {
            shots: vec![1],
            alpha: vec![0.05, 0.95],
            p: None,
        };
        assert_eq!(s.p_values(0.05).len(), 93);
        assert_eq!(s.p_values(0.95)[0], 0.97);
        assert_eq!(s.p_values(0.95).len(), 3);
    }

    #[test]
    fn lemma1_values() {
        let t = run_lemma1_example(0.5, 0.9).unwrap();
        let kl = t.get(0, "kl").unwrap().as_f64().unwrap();
        assert!((kl - 0.5108).abs() < 1e-4);
        assert!((t.get(0, "n_gamma_tilde").unwrap().as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(t.get(0, "sharpness_delta").unwrap().as_f64().unwrap() < 1e-12);
    }

    #[test]
    fn designed_pair_hits_target() {
        for p in [0.5, 0.7, 0.9, 1.0] {
            assert!((designed_pair(p).unwrap().probability(0) - p).abs() < 1e-12);
        }
        assert!(designed_pair(0.4).is_err());
    }

    #[test]
    fn fn_rate_small_run() {
        let cfg = FnRateConfig {
            p: 0.9,
            alpha: 0.5,
            shots: 10,
            trials: 20_000,
            seed: 1,
        };
        let t = run_fn_rate(&cfg).unwrap();
        assert!(t.get(0, "z").unwrap().as_f64().unwrap().abs() < 4.0);
        assert_eq!(run_fn_rate(&cfg).unwrap(), t);
    }
}
