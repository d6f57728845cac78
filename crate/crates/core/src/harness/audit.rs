use serde::Serialize;
use std::collections::BTreeMap;

use super::{config_json, random_state, Table};
use crate::circuits::{build_multiswap_full, build_swap_test, derive_pair_map, mid_ancillas, CircuitSpec};
use crate::egraph::Shots;
use crate::error::{domain, Error, Result};
use crate::seeding;
use crate::statevec::{outcome_bits, StateVector, MAX_QUBITS};
use crate::stats::{estimate_from_counts, overlap_sq_to_prob, published_pair_constant, EstimatorMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapTestConfig {
    pub w: usize,
    pub trials: u64,
    pub shots: Shots,
    pub seed: u64,
}

/// Two-state SWAP tests on Haar-random `w`-qubit pairs, one row per trial.
pub fn run_swap_test(config: &SwapTestConfig) -> Result<Table> {
    let circuit = build_swap_test(config.w)?;
    let measured = circuit.layout.measured();
    let mut t = Table::new(&[
        "trial",
        "overlap_sq_true",
        "p_exact",
        "p_theory",
        "abs_delta",
        "shots",
        "hits",
        "p_hat",
        "overlap_sq_hat",
        "distance_hat",
    ]);
    t.meta("config", config_json(config)?);
    t.meta("p_theory", "(1 + |<a|b>|^2) / 2");
    for trial in 0..config.trials {
        let mut rng = seeding::stream(config.seed, trial);
        let a = random_state(config.w, &mut rng)?;
        let b = random_state(config.w, &mut rng)?;
        let x = a.inner_product(&b)?.norm_sqr();
        let marginal = circuit.run(&[a, b])?.exact_marginal(&measured)?;
        let p = marginal.probability(0);
        let theory = overlap_sq_to_prob(x);
        let est = match config.shots {
            Shots::Exact => None,
            Shots::Finite(s) => {
                let hits = marginal.sample(s, &mut rng)?[0];
                Some(estimate_from_counts(hits, s, EstimatorMode::Standard)?)
            }
        };
        t.push(vec![
            trial.into(),
            x.into(),
            p.into(),
            theory.into(),
            (p - theory).abs().into(),
            est.map(|e| e.shots_total).into(),
            est.map(|e| e.hits).into(),
            est.map(|e| e.p_hat).into(),
            est.map(|e| e.overlap_sq_hat).into(),
            est.map(|e| e.distance_hat).into(),
        ]);
    }
    Ok(t)
}

/// Outcome-to-pair table of the `n`-input shuffler plus the full circuit
/// for width `w`.
pub fn run_pair_map(n: usize, w: usize) -> Result<(Table, CircuitSpec)> {
    let circuit = build_multiswap_full(n, w)?;
    let map = derive_pair_map(n)?;
    let mut t = Table::new(&[
        "outcome",
        "bits",
        "register1",
        "register2",
        "i",
        "j",
        "multiplicity",
    ]);
    t.meta("n", n);
    t.meta("mid_ancillas", map.mid_ancillas);
    t.meta("covers_all_pairs", map.covers_all_pairs());
    for (outcome, &(r1, r2)) in map.entries.iter().enumerate() {
        let bits: String = outcome_bits(outcome, map.mid_ancillas)
            .iter()
            .map(|b| char::from(b'0' + b))
            .collect();
        let (i, j) = map.pair(outcome);
        t.push(vec![
            outcome.into(),
            bits.into(),
            r1.into(),
            r2.into(),
            i.into(),
            j.into(),
            map.multiplicity(i, j).into(),
        ]);
    }
    Ok((t, circuit))
}

/// Result of [`run_eq1_audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct Eq1Audit {
    /// One row per trial and pair.
    pub table: Table,
    /// Largest `|P(top, a) - (1 ± |ovl|²)/2^{d+1}|` over all outcomes.
    pub max_outcome_delta: f64,
    /// Largest `|Σ P - 1|` over trials.
    pub max_norm_delta: f64,
    pub covers_all_pairs: bool,
    /// Empirical per-pair constant keyed by outcome multiplicity.
    pub pair_constants: BTreeMap<usize, f64>,
    pub published_constant: f64,
}

/// Audits the multi-state probability law on random single-qubit inputs.
///
/// For each trial the exact joint marginal of (top, mid ancillas) is
/// compared outcome by outcome against `(1 ± |⟨φ_i|φ_j⟩|²)/2^{d_n+1}`,
/// then aggregated per pair. Both the published constant `2³/n³` and the
/// measured `P_ij/(1 + |ovl|²)` are reported.
pub fn run_eq1_audit(n: usize, trials: u64, seed: u64) -> Result<Eq1Audit> {
    if n > 8 {
        // a dense audit at tag width log2(n) no longer fits
        return Err(Error::Resource {
            required: 1 + mid_ancillas(n) + n * n.trailing_zeros() as usize,
            limit: MAX_QUBITS,
        });
    }
    if n != 4 && n != 8 {
        return Err(domain(format!("audit supports n = 4 or 8, got {n}")));
    }
    let circuit = build_multiswap_full(n, 1)?;
    let map = derive_pair_map(n)?;
    let d = map.mid_ancillas;
    let per_outcome = 1.0 / (1u64 << (d + 1)) as f64;
    let published = published_pair_constant(n);
    let measured = circuit.layout.measured();

    let mut t = Table::new(&[
        "trial",
        "i",
        "j",
        "multiplicity",
        "overlap_sq_true",
        "p_agg_measured",
        "p_eq1_theory",
        "p_outcome_theory",
        "c_empirical",
        "c_published",
        "ratio",
        "max_outcome_delta",
    ]);
    t.meta("config", format!("{{\"n\":{n},\"trials\":{trials},\"seed\":{seed}}}"));
    t.meta("p_eq1_theory", "2^3 (1 + |<phi_i|phi_j>|^2) / n^3");
    t.meta(
        "p_outcome_theory",
        "multiplicity * (1 + |<phi_i|phi_j>|^2) / 2^(d_n + 1), d_n = 3 log2(n/2)",
    );
    t.meta("c_empirical", "p_agg_measured / (1 + |<phi_i|phi_j>|^2)");
    t.meta("c_published", "2^3 / n^3");
    t.meta("ratio", "c_empirical / c_published");

    let mut max_outcome_delta: f64 = 0.0;
    let mut max_norm_delta: f64 = 0.0;
    let mut pair_constants = BTreeMap::new();
    for trial in 0..trials {
        let mut rng = seeding::stream(seed, trial);
        let inputs: Vec<StateVector> = (0..n)
            .map(|_| random_state(1, &mut rng))
            .collect::<Result<_>>()?;
        let marginal = circuit.run(&inputs)?.exact_marginal(&measured)?;
        let total: f64 = marginal.probabilities().iter().sum();
        max_norm_delta = max_norm_delta.max((total - 1.0).abs());

        let mut agg: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for a in 0..1usize << d {
            let (r1, r2) = map.entries[a];
            let x = inputs[r1].inner_product(&inputs[r2])?.norm_sqr();
            let p0 = marginal.probability(a);
            let p1 = marginal.probability((1 << d) | a);
            let delta = (p0 - (1.0 + x) * per_outcome)
                .abs()
                .max((p1 - (1.0 - x) * per_outcome).abs());
            let slot = agg.entry(map.pair(a)).or_insert((0.0, 0.0));
            slot.0 += p0;
            slot.1 = slot.1.max(delta);
            max_outcome_delta = max_outcome_delta.max(delta);
        }
        for (&(i, j), &(p_agg, delta)) in &agg {
            let m = map.multiplicity(i, j);
            let x = inputs[i].inner_product(&inputs[j])?.norm_sqr();
            let c = p_agg / (1.0 + x);
            pair_constants.insert(m, m as f64 * per_outcome);
            t.push(vec![
                trial.into(),
                i.into(),
                j.into(),
                m.into(),
                x.into(),
                p_agg.into(),
                (published * (1.0 + x)).into(),
                (m as f64 * per_outcome * (1.0 + x)).into(),
                c.into(),
                published.into(),
                (c / published).into(),
                delta.into(),
            ]);
        }
    }
    for (m, c) in &pair_constants {
        t.meta(format!("c_empirical_multiplicity_{m}"), crate::harness::fmt_real(*c));
    }
    t.meta("max_outcome_delta", crate::harness::fmt_real(max_outcome_delta));
    t.meta("max_norm_delta", crate::harness::fmt_real(max_norm_delta));
    t.meta("covers_all_pairs", map.covers_all_pairs());
    Ok(Eq1Audit {
        table: t,
        max_outcome_delta,
        max_norm_delta,
        covers_all_pairs: map.covers_all_pairs(),
        pair_constants,
        published_constant: published,
    })
}
