use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use super::{check_eps, EpsilonGraph, PointCloud};
use crate::circuits::{
    build_multiswap_full, build_swap_test, derive_pair_map, mid_ancillas, pad_inputs,
    padded_size, CircuitSpec,
};
use crate::error::{domain, Error, Result};
use crate::seeding;
use crate::statevec::{StateVector, MAX_QUBITS};
use crate::stats::{
    estimate_from_counts, is_false_negative, overlap_to_distance, EstimatorMode, OverlapEstimate,
};

/// Repetitions per circuit. `Exact` decides from exact probabilities, the
/// infinite-shot limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "exact" => Ok(Shots::Exact),
            other => match other.parse::<u64>() {
                Ok(0) | Err(_) => Err(domain(format!(
                    "shots must be a positive integer or `inf`, got `{other}`"
                ))),
                Ok(n) => Ok(Shots::Finite(n)),
            },
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("inf"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Per-pair constant used to invert multi-state hit rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiCalibration {
    /// `m_ij / 2^{d_n+1}`, from the pair's outcome multiplicity.
    #[default]
    Empirical,
    /// The published `2³/n³` for every pair.
    Published,
}

impl FromStr for MultiCalibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical" => Ok(Self::Empirical),
            "published" => Ok(Self::Published),
            other => Err(domain(format!("unknown calibration `{other}`"))),
        }
    }
}

/// Decision record for one pair of a quantum build.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairEstimate {
    pub estimate: OverlapEstimate,
    /// Exact success probability of the simulated circuit.
    pub p_exact: f64,
    pub threshold: f64,
    pub neighbour: bool,
    /// Hit probability per unit of `1 + |overlap|²`.
    pub pair_constant: f64,
}

/// Amplitude encoding of `v/‖v‖`, zero-padded to a power-of-two length of
/// at least 2.
pub fn encode_point(v: &[f64]) -> Result<StateVector> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(domain("cannot encode a zero or non-finite vector"));
    }
    let len = v.len().next_power_of_two().max(2);
    let mut amps = vec![Complex64::new(0.0, 0.0); len];
    for (a, x) in amps.iter_mut().zip(v) {
        *a = Complex64::new(x / norm, 0.0);
    }
    StateVector::from_amplitudes(amps)
}

pub(super) fn encode_cloud(cloud: &PointCloud) -> Result<Vec<StateVector>> {
    cloud.points().iter().map(|p| encode_point(p)).collect()
}

fn decide(
    pair: (usize, usize),
    p_exact: f64,
    hits: Option<(u64, u64)>,
    mode: EstimatorMode,
    eps: f64,
) -> Result<PairEstimate> {
    let threshold = mode.threshold(eps)?;
    let c = mode.pair_constant();
    let (estimate, neighbour) = match hits {
        Some((hits, shots)) => {
            let est = estimate_from_counts(hits, shots, mode)?;
            (est, !is_false_negative(hits, shots, threshold))
        }
        None => {
            let raw = p_exact / c - 1.0;
            let overlap_sq_hat = raw.clamp(0.0, 1.0);
            let est = OverlapEstimate {
                pair,
                shots_total: 0,
                hits: 0,
                p_hat: p_exact,
                overlap_sq_hat,
                distance_hat: overlap_to_distance(overlap_sq_hat.sqrt())?,
                clamped: (raw - overlap_sq_hat).abs() > 1e-12,
            };
            (est, p_exact > threshold)
        }
    };
    Ok(PairEstimate {
        estimate: OverlapEstimate { pair, ..estimate },
        p_exact,
        threshold,
        neighbour,
        pair_constant: c,
    })
}

/// Runs the two-state SWAP test on `(a, b)`; entry 0 of the returned table
/// is `P(ancilla = 0)`.
pub(super) fn swap_test_probability(
    circuit: &CircuitSpec,
    a: &StateVector,
    b: &StateVector,
) -> Result<crate::statevec::Marginal> {
    let out = circuit.run(&[a.clone(), b.clone()])?;
    out.exact_marginal(&circuit.layout.measured())
}

/// One SWAP test per pair.
pub(super) fn per_pair_egraph(
    cloud: &PointCloud,
    eps: f64,
    shots: Shots,
    seed: u64,
) -> Result<(EpsilonGraph, Vec<PairEstimate>, CircuitSpec)> {
    check_eps(eps)?;
    let n = cloud.len();
    let states = encode_cloud(cloud)?;
    let w = states.first().map_or(1, StateVector::num_qubits);
    let circuit = build_swap_test(w)?;
    if circuit.layout.num_qubits > MAX_QUBITS {
        return Err(Error::Resource {
            required: circuit.layout.num_qubits,
            limit: MAX_QUBITS,
        });
    }
    let mut graph = EpsilonGraph::new(n, eps);
    let mut records = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let marginal = swap_test_probability(&circuit, &states[i], &states[j])?;
            let p = marginal.probability(0);
            let hits = match shots {
                Shots::Exact => None,
                Shots::Finite(s) => {
                    let mut rng = seeding::stream(seed, seeding::pair_stream(i, j, n));
                    Some((marginal.sample(s, &mut rng)?[0], s))
                }
            };
            let rec = decide((i, j), p, hits, EstimatorMode::Standard, eps)?;
            if rec.neighbour {
                graph.insert(i, j)?;
            }
            records.push(rec);
        }
    }
    Ok((graph, records, circuit))
}

/// All pairs from one multi-state circuit. `shots` counts whole-circuit
/// executions; each run yields a hit for at most one pair.
pub(super) fn multi_egraph(
    cloud: &PointCloud,
    eps: f64,
    shots: Shots,
    seed: u64,
    calibration: MultiCalibration,
) -> Result<(EpsilonGraph, Vec<PairEstimate>, CircuitSpec)> {
    check_eps(eps)?;
    let n = cloud.len();
    if n < 2 {
        return Err(domain("multi-state mode needs at least 2 points"));
    }
    let states = encode_cloud(cloud)?;
    let w = states[0].num_qubits();
    let padded = padded_size(n);
    let d = mid_ancillas(padded);
    let required = 1 + d + padded * w;
    if required > MAX_QUBITS {
        return Err(Error::Resource {
            required,
            limit: MAX_QUBITS,
        });
    }
    let inputs = pad_inputs(&states, w)?;
    let circuit = build_multiswap_full(padded, w)?;
    let pair_map = derive_pair_map(padded)?;
    let out = circuit.run(&inputs)?;
    let marginal = out.exact_marginal(&circuit.layout.measured())?;
    let counts = match shots {
        Shots::Exact => None,
        Shots::Finite(s) => Some(marginal.sample(s, &mut seeding::stream(seed, 0))?),
    };

    // top = 0 outcomes occupy indices 0..2^d
    let mut p_pair = std::collections::BTreeMap::new();
    let mut hits_pair = std::collections::BTreeMap::new();
    for outcome in 0..1usize << d {
        let pair = pair_map.pair(outcome);
        *p_pair.entry(pair).or_insert(0.0) += marginal.probability(outcome);
        if let Some(c) = &counts {
            *hits_pair.entry(pair).or_insert(0u64) += c[outcome];
        }
    }

    let per_outcome = 1.0 / (1u64 << (d + 1)) as f64;
    let mut graph = EpsilonGraph::new(n, eps);
    let mut records = Vec::new();
    for (&(i, j), &p) in p_pair.iter().filter(|((i, j), _)| *i < n && *j < n) {
        let mode = match calibration {
            MultiCalibration::Published => EstimatorMode::Multi { n: padded },
            MultiCalibration::Empirical => EstimatorMode::Calibrated {
                constant: pair_map.multiplicity(i, j) as f64 * per_outcome,
            },
        };
        let hits = match shots {
            Shots::Exact => None,
            Shots::Finite(s) => Some((hits_pair.get(&(i, j)).copied().unwrap_or(0), s)),
        };
        let rec = decide((i, j), p, hits, mode, eps)?;
        if rec.neighbour {
            graph.insert(i, j)?;
        }
        records.push(rec);
    }
    Ok((graph, records, circuit))
}
