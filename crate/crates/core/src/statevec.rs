//! Dense state-vector simulation of a qubit register.
//!
//! Qubit 0 is the most significant bit of the basis index: in a 3-qubit
//! register the basis state `|q0 q1 q2⟩` lives at index `q0·4 + q1·2 + q2`.
//! The same convention applies to measurement outcomes, where the first
//! listed qubit is the most significant bit of the outcome index.
//!
//! Only the two gates the SWAP-test family needs are provided (Hadamard and
//! controlled swap). Measurement is exact-marginal computation followed by
//! multinomial sampling, which matches measuring once per circuit run.

use num_complex::Complex64;
use std::borrow::Cow;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Error, Result};
use crate::seeding;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 28;

/// Norm drift tolerated after any gate sequence.
pub const NORM_TOLERANCE: f64 = 1e-10;

fn check_ceiling(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::Resource {
            required: num_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Pure state of `num_qubits` qubits as `2^num_qubits` complex amplitudes.
///
/// Hadamards are applied without their `1/√2` factor; one pending factor is
/// carried in `scaled` and two are folded into an exact `× 0.5`. Circuits
/// with an even number of Hadamards on dyadic inputs therefore produce
/// exact probabilities.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
    /// Stored amplitudes are `√2` times the true ones.
    scaled: bool,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits && self.amplitudes() == other.amplitudes()
    }
}

impl StateVector {
    /// Computational basis state `|basis_index⟩`.
    pub fn basis(num_qubits: usize, basis_index: usize) -> Result<Self> {
        check_ceiling(num_qubits)?;
        let dim = 1usize << num_qubits;
        if basis_index >= dim {
            return Err(domain(format!(
                "basis index {basis_index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[basis_index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
            scaled: false,
        })
    }

    /// All-zero register `|0…0⟩`.
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Single-qubit state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(c, 0.0), Complex64::from_polar(s, phi)],
            scaled: false,
        }
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(domain(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_ceiling(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
            scaled: false,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(domain(format!("amplitudes have squared norm {norm}")));
        }
        Ok(state)
    }

    /// Kronecker product; the first state occupies the leading qubits.
    pub fn tensor(states: &[StateVector]) -> Result<Self> {
        let (first, rest) = states
            .split_first()
            .ok_or_else(|| domain("tensor product of zero states"))?;
        let total: usize = states.iter().map(|s| s.num_qubits).sum();
        check_ceiling(total)?;
        let mut acc = first.amplitudes().into_owned();
        for s in rest {
            let amps = s.amplitudes();
            let mut next = Vec::with_capacity(acc.len() * amps.len());
            for a in &acc {
                next.extend(amps.iter().map(|b| a * b));
            }
            acc = next;
        }
        Ok(Self {
            num_qubits: total,
            amplitudes: acc,
            scaled: false,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> Cow<'_, [Complex64]> {
        if self.scaled {
            Cow::Owned(self.amplitudes.iter().map(|a| a * FRAC_1_SQRT_2).collect())
        } else {
            Cow::Borrowed(&self.amplitudes)
        }
    }

    /// Factor turning stored squared magnitudes into probabilities.
    fn weight(&self) -> f64 {
        if self.scaled {
            0.5
        } else {
            1.0
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weight() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Bit mask of `qubit` inside a basis index.
    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(domain(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let f = if self.scaled { 0.5 } else { 1.0 };
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | m];
                self.amplitudes[i] = (a + b) * f;
                self.amplitudes[i | m] = (a - b) * f;
            }
        }
        self.scaled = !self.scaled;
        Ok(())
    }

    /// Fredkin gate: exchanges qubits `a` and `b` wherever `control` is 1.
    /// Pure permutation of amplitudes, so applying it twice is bit-exact.
    pub fn apply_cswap(&mut self, control: usize, a: usize, b: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if control == a || control == b || a == b {
            return Err(domain(format!(
                "cswap needs distinct qubits, got control={control} a={a} b={b}"
            )));
        }
        let (mc, ma, mb) = (self.mask(control), self.mask(a), self.mask(b));
        for i in 0..self.amplitudes.len() {
            // visit each swapped pair once, from the side where a=1, b=0
            if i & mc != 0 && i & ma != 0 && i & mb == 0 {
                let j = (i & !ma) | mb;
                self.amplitudes.swap(i, j);
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(domain(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        let raw: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(match (self.scaled, other.scaled) {
            (false, false) => raw,
            (true, true) => raw * 0.5,
            _ => raw * FRAC_1_SQRT_2,
        })
    }

    /// Outcome distribution of the listed qubits, summed over the rest.
    pub fn exact_marginal(&self, qubits: &[usize]) -> Result<Marginal> {
        for (k, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..k].contains(&q) {
                return Err(domain(format!("qubit {q} listed twice")));
            }
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut probs = vec![0.0; 1usize << qubits.len()];
        let w = self.weight();
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let p = w * amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let outcome = masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(i & m != 0));
            probs[outcome] += p;
        }
        Ok(Marginal {
            qubits: qubits.to_vec(),
            probs,
        })
    }

    /// Draws `shots` independent measurement outcomes of `qubits`.
    /// Deterministic for a given seed.
    pub fn sample_outcomes(&self, qubits: &[usize], shots: u64, seed: u64) -> Result<Vec<u64>> {
        let marginal = self.exact_marginal(qubits)?;
        let mut rng = seeding::stream(seed, 0);
        marginal.sample(shots, &mut rng)
    }
}

/// One outcome of a partial measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub bits: Vec<u8>,
    pub probability: f64,
}

/// Exact outcome table for a list of measured qubits. Entry `k` holds the
/// probability of the outcome whose bits, first listed qubit most
/// significant, spell `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    qubits: Vec<usize>,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn outcomes(&self) -> impl Iterator<Item = MeasurementOutcome> + '_ {
        let width = self.qubits.len();
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &probability)| MeasurementOutcome {
                bits: outcome_bits(k, width),
                probability,
            })
    }

    /// Multinomial draw of `shots` outcomes via sequential conditional
    /// binomials, so the cost is independent of the shot count.
    pub fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(domain("shots must be at least 1"));
        }
        let mut counts = vec![0u64; self.probs.len()];
        let mut remaining = shots;
        let mut mass: f64 = self.probs.iter().sum();
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (k, &p) in self.probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if k == last {
                counts[k] = remaining;
                break;
            }
            if p <= 0.0 {
                continue;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining, q)
                .map_err(|e| domain(format!("binomial sampler: {e}")))?
                .sample(rng);
            counts[k] = draw;
            remaining -= draw;
            mass -= p;
        }
        Ok(counts)
    }
}

/// Bits of `outcome`, most significant first, padded to `width`.
pub fn outcome_bits(outcome: usize, width: usize) -> Vec<u8> {
    (0..width)
        .map(|k| ((outcome >> (width - 1 - k)) & 1) as u8)
        .collect()
}
