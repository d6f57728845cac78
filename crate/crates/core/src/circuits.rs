//! Circuit builders for the SWAP-test family.
//!
//! Every circuit is a flat list of Hadamard and controlled-swap gates over a
//! register layout: an optional top ancilla, a block of mid ancillas that
//! index the pair held in registers 1 and 2, and `n` input registers of `w`
//! qubits each. All ancillas start in `|0⟩`; circuits open with explicit
//! Hadamards instead of `|+⟩` preparation.
//!
//! Input registers are labelled `0..n`. A register swap between two inputs
//! expands to `w` controlled swaps, one per qubit position.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::statevec::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Hadamard(usize),
    Cswap { control: usize, a: usize, b: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Hadamard(q) => vec![q],
            Gate::Cswap { control, a, b } => vec![control, a, b],
        }
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::Hadamard(q) => state.apply_hadamard(q),
            Gate::Cswap { control, a, b } => state.apply_cswap(control, a, b),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record {
            #[serde(rename = "type")]
            kind: &'static str,
            qubits: Vec<usize>,
        }
        let kind = match self {
            Gate::Hadamard(_) => "h",
            Gate::Cswap { .. } => "cswap",
        };
        Record {
            kind,
            qubits: self.qubits(),
        }
        .serialize(serializer)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    /// Ancilla read out by the final Hadamard, if the circuit has one.
    pub top: Option<usize>,
    /// Ancillas selecting which pair lands in registers 1 and 2.
    pub mid: Vec<usize>,
    /// Qubit indices of each input register, in label order.
    pub registers: Vec<Vec<usize>>,
    pub num_qubits: usize,
}

impl Layout {
    fn new(has_top: bool, mid_count: usize, n: usize, w: usize) -> Self {
        let top = has_top.then_some(0);
        let first_mid = usize::from(has_top);
        let mid: Vec<usize> = (first_mid..first_mid + mid_count).collect();
        let base = first_mid + mid_count;
        let registers = (0..n)
            .map(|r| (base + r * w..base + (r + 1) * w).collect())
            .collect();
        Self {
            top,
            mid,
            registers,
            num_qubits: base + n * w,
        }
    }

    pub fn ancilla_count(&self) -> usize {
        self.mid.len() + usize::from(self.top.is_some())
    }

    /// Qubits measured at the end: top first, then the mid block.
    pub fn measured(&self) -> Vec<usize> {
        self.top.iter().chain(&self.mid).copied().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceCounts {
    pub cswaps: usize,
    pub hadamards: usize,
    pub ancillas: usize,
    pub total_qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitSpec {
    /// Number of input registers.
    pub n: usize,
    /// Qubits per input register.
    pub w: usize,
    pub layout: Layout,
    pub gates: Vec<Gate>,
    pub counts: ResourceCounts,
}

impl CircuitSpec {
    fn new(n: usize, w: usize, layout: Layout, gates: Vec<Gate>) -> Self {
        let counts = tally(&layout, &gates);
        Self {
            n,
            w,
            layout,
            gates,
            counts,
        }
    }

    /// Recount from the gate list and layout.
    pub fn count_resources(&self) -> ResourceCounts {
        tally(&self.layout, &self.gates)
    }

    /// Checks that gates reference valid distinct qubits and that the
    /// cached counts match a recount.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= self.layout.num_qubits) {
                return Err(domain(format!("gate {g:?} references a missing qubit")));
            }
            if qs.len() == 3 && (qs[0] == qs[1] || qs[1] == qs[2] || qs[0] == qs[2]) {
                return Err(domain(format!("gate {g:?} repeats a qubit")));
            }
        }
        if self.count_resources() != self.counts {
            return Err(domain("cached counts disagree with the gate list"));
        }
        Ok(())
    }

    /// Register state: ancillas `|0⟩`, inputs in label order.
    pub fn prepare(&self, inputs: &[StateVector]) -> Result<StateVector> {
        if inputs.len() != self.n {
            return Err(domain(format!(
                "circuit takes {} inputs, got {}",
                self.n,
                inputs.len()
            )));
        }
        if let Some(bad) = inputs.iter().find(|s| s.num_qubits() != self.w) {
            return Err(domain(format!(
                "input of {} qubits in a {}-qubit register",
                bad.num_qubits(),
                self.w
            )));
        }
        let ancillas = self.layout.ancilla_count();
        let mut parts = Vec::with_capacity(inputs.len() + 1);
        if ancillas > 0 {
            parts.push(StateVector::zeros(ancillas)?);
        }
        parts.extend(inputs.iter().cloned());
        StateVector::tensor(&parts)
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.layout.num_qubits {
            return Err(domain("state width does not match circuit layout"));
        }
        self.gates.iter().try_for_each(|g| g.apply(state))
    }

    /// Prepares `inputs` and runs the whole circuit.
    pub fn run(&self, inputs: &[StateVector]) -> Result<StateVector> {
        let mut state = self.prepare(inputs)?;
        self.apply(&mut state)?;
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn tally(layout: &Layout, gates: &[Gate]) -> ResourceCounts {
    let cswaps = gates
        .iter()
        .filter(|g| matches!(g, Gate::Cswap { .. }))
        .count();
    ResourceCounts {
        cswaps,
        hadamards: gates.len() - cswaps,
        ancillas: layout.ancilla_count(),
        total_qubits: layout.num_qubits,
    }
}

fn check_width(w: usize) -> Result<()> {
    if w == 0 {
        return Err(domain("register width must be at least 1"));
    }
    Ok(())
}

fn check_multiswap_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(domain(format!(
            "multi-state circuit needs a power of two >= 4 inputs, got {n}; pad first"
        )));
    }
    Ok(())
}

/// Mid-ancilla count `3·log2(n/2)` of the recursive circuit.
pub fn mid_ancillas(n: usize) -> usize {
    3 * (n / 2).trailing_zeros() as usize
}

fn register_swap(gates: &mut Vec<Gate>, control: usize, a: &[usize], b: &[usize]) {
    gates.extend(a.iter().zip(b).map(|(&a, &b)| Gate::Cswap { control, a, b }));
}

/// Two-state SWAP test on `w`-qubit registers.
pub fn build_swap_test(w: usize) -> Result<CircuitSpec> {
    check_width(w)?;
    let layout = Layout::new(true, 0, 2, w);
    let top = 0;
    let mut gates = vec![Gate::Hadamard(top)];
    register_swap(&mut gates, top, &layout.registers[0], &layout.registers[1]);
    gates.push(Gate::Hadamard(top));
    Ok(CircuitSpec::new(2, w, layout, gates))
}

/// One SWAP test per unordered pair `(i, j)`, `i < j`.
pub fn build_naive_multiswap(n: usize, w: usize) -> Result<Vec<((usize, usize), CircuitSpec)>> {
    if n < 2 {
        return Err(domain(format!("naive battery needs at least 2 inputs, got {n}")));
    }
    let circuit = build_swap_test(w)?;
    Ok((0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|pair| (pair, circuit.clone()))
        .collect())
}

/// Recursive pair-shuffling body. `regs` are the registers handled at this
/// level and `ancillas` the controls: three fresh ones followed by the block
/// shared by both half-size sub-circuits.
fn shuffle_gates(gates: &mut Vec<Gate>, layout: &Layout, regs: &[usize], ancillas: &[usize]) {
    let n = regs.len();
    if n < 4 {
        return;
    }
    let (fresh, shared) = ancillas.split_at(3);
    let half = n / 2;
    shuffle_gates(gates, layout, &regs[..half], shared);
    shuffle_gates(gates, layout, &regs[half..], shared);
    let r = |k: usize| layout.registers[regs[k]].as_slice();
    register_swap(gates, fresh[2], r(0), r(half));
    register_swap(gates, fresh[1], r(0), r(half + 1));
    register_swap(gates, fresh[0], r(1), r(half));
}

fn shuffle_circuit(n: usize, w: usize, with_top: bool) -> Result<(Layout, Vec<Gate>)> {
    check_width(w)?;
    check_multiswap_size(n)?;
    let layout = Layout::new(with_top, mid_ancillas(n), n, w);
    let mut gates: Vec<Gate> = layout.measured().into_iter().map(Gate::Hadamard).collect();
    let regs: Vec<usize> = (0..n).collect();
    shuffle_gates(&mut gates, &layout, &regs, &layout.mid);
    Ok((layout, gates))
}

/// The 4-input pair shuffler: 3 ancillas, `3w` controlled swaps.
pub fn build_u4(w: usize) -> Result<CircuitSpec> {
    build_un(4, w)
}

/// The `n`-input pair shuffler built recursively from two half-size copies
/// sharing one ancilla block plus three fresh ancillas.
pub fn build_un(n: usize, w: usize) -> Result<CircuitSpec> {
    let (layout, gates) = shuffle_circuit(n, w, false)?;
    Ok(CircuitSpec::new(n, w, layout, gates))
}

/// Pair shuffler followed by a SWAP test between registers 1 and 2,
/// controlled by a top ancilla.
pub fn build_multiswap_full(n: usize, w: usize) -> Result<CircuitSpec> {
    let (layout, mut gates) = shuffle_circuit(n, w, true)?;
    let top = 0;
    register_swap(&mut gates, top, &layout.registers[0], &layout.registers[1]);
    gates.push(Gate::Hadamard(top));
    Ok(CircuitSpec::new(n, w, layout, gates))
}

/// Smallest valid multi-state input count for `n` inputs.
pub fn padded_size(n: usize) -> usize {
    n.next_power_of_two().max(4)
}

/// Appends `|0…0⟩` registers up to the next power of two (at least 4).
pub fn pad_inputs(states: &[StateVector], w: usize) -> Result<Vec<StateVector>> {
    if states.len() < 2 {
        return Err(domain("padding needs at least 2 states"));
    }
    if let Some(bad) = states.iter().find(|s| s.num_qubits() != w) {
        return Err(domain(format!(
            "state of {} qubits among width-{w} inputs",
            bad.num_qubits()
        )));
    }
    let mut out = states.to_vec();
    let zero = StateVector::zeros(w)?;
    out.resize(padded_size(states.len()), zero);
    Ok(out)
}

/// Which pair of input labels ends up in registers 1 and 2 for each
/// mid-ancilla outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairMap {
    pub n: usize,
    pub mid_ancillas: usize,
    /// Ordered `(register 1, register 2)` labels, indexed by outcome.
    pub entries: Vec<(usize, usize)>,
    /// Outcome count per unordered pair `(i, j)`, `i < j`.
    pub multiplicity: BTreeMap<(usize, usize), usize>,
}

impl PairMap {
    /// Unordered pair for a mid-ancilla outcome.
    pub fn pair(&self, outcome: usize) -> (usize, usize) {
        let (a, b) = self.entries[outcome];
        (a.min(b), a.max(b))
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> usize {
        self.multiplicity
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0)
    }

    pub fn covers_all_pairs(&self) -> bool {
        self.multiplicity.len() == self.n * (self.n - 1) / 2
            && self.multiplicity.values().all(|&m| m >= 1)
    }
}

/// Largest mid-ancilla block `derive_pair_map` will enumerate.
pub const MAX_PAIR_MAP_ANCILLAS: usize = 24;

/// Traces computational-basis tags through the shuffler.
///
/// After the Hadamard layer the shuffler is a permutation of basis states
/// controlled by the mid ancillas, so each ancilla outcome is one branch
/// that can be followed bit by bit. Register `i` starts with tag `i`.
pub fn derive_pair_map(n: usize) -> Result<PairMap> {
    check_multiswap_size(n)?;
    let d = mid_ancillas(n);
    if d > MAX_PAIR_MAP_ANCILLAS {
        return Err(Error::Resource {
            required: d,
            limit: MAX_PAIR_MAP_ANCILLAS,
        });
    }
    let tag_width = n.trailing_zeros() as usize;
    let circuit = build_un(n, tag_width)?;
    let layout = &circuit.layout;
    let read_tag = |bits: &[bool], r: usize| {
        layout.registers[r]
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | usize::from(bits[q]))
    };

    let mut entries = Vec::with_capacity(1 << d);
    let mut multiplicity = BTreeMap::new();
    for outcome in 0..1usize << d {
        let mut bits = vec![false; layout.num_qubits];
        for (k, &q) in layout.mid.iter().enumerate() {
            bits[q] = (outcome >> (d - 1 - k)) & 1 == 1;
        }
        for (r, reg) in layout.registers.iter().enumerate() {
            for (k, &q) in reg.iter().enumerate() {
                bits[q] = (r >> (tag_width - 1 - k)) & 1 == 1;
            }
        }
        for g in &circuit.gates {
            if let Gate::Cswap { control, a, b } = *g {
                if bits[control] {
                    bits.swap(a, b);
                }
            }
        }
        let mut tags: Vec<usize> = (0..n).map(|r| read_tag(&bits, r)).collect();
        let (first, second) = (tags[0], tags[1]);
        tags.sort_unstable();
        if tags.iter().enumerate().any(|(k, &t)| k != t) {
            return Err(domain(format!(
                "outcome {outcome} does not permute the input registers"
            )));
        }
        entries.push((first, second));
        *multiplicity
            .entry((first.min(second), first.max(second)))
            .or_insert(0) += 1;
    }
    Ok(PairMap {
        n,
        mid_ancillas: d,
        entries,
        multiplicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::StateVector;

    #[test]
    fn swap_test_layout() {
        let c = build_swap_test(1).unwrap();
        assert_eq!(
            c.gates,
            vec![
                Gate::Hadamard(0),
                Gate::Cswap { control: 0, a: 1, b: 2 },
                Gate::Hadamard(0)
            ]
        );
        let r = c.count_resources();
        assert_eq!((r.cswaps, r.ancillas, r.total_qubits), (1, 1, 3));
        assert_eq!(r.hadamards, 2);
        assert_eq!(build_swap_test(3).unwrap().counts.cswaps, 3);
        assert!(build_swap_test(0).is_err());
    }

    #[test]
    fn swap_test_on_identical_states() {
        let phi = StateVector::qubit(0.7, 0.3);
        let c = build_swap_test(1).unwrap();
        let out = c.run(&[phi.clone(), phi]).unwrap();
        let p0 = out.exact_marginal(&[0]).unwrap().probability(0);
        assert!((p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn naive_battery_sizes() {
        let b = build_naive_multiswap(4, 1).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.iter().map(|(_, c)| c.counts.cswaps).sum::<usize>(), 6);
        assert_eq!(build_naive_multiswap(2, 1).unwrap().len(), 1);
        let b = build_naive_multiswap(8, 2).unwrap();
        assert_eq!(b.len(), 28);
        assert_eq!(b.iter().map(|(_, c)| c.counts.cswaps).sum::<usize>(), 56);
        assert!(build_naive_multiswap(1, 1).is_err());
    }

    #[test]
    fn u4_matches_the_three_gate_construction() {
        let c = build_u4(1).unwrap();
        // mid ancillas 0,1,2; registers 3,4,5,6
        assert_eq!(
            c.gates,
            vec![
                Gate::Hadamard(0),
                Gate::Hadamard(1),
                Gate::Hadamard(2),
                Gate::Cswap { control: 2, a: 3, b: 5 },
                Gate::Cswap { control: 1, a: 3, b: 6 },
                Gate::Cswap { control: 0, a: 4, b: 5 },
            ]
        );
        assert_eq!(build_u4(2).unwrap().counts.cswaps, 6);
    }

    #[test]
    fn shuffler_counts() {
        for n in [4usize, 8, 16, 32] {
            for w in 1..=3 {
                let c = build_un(n, w).unwrap();
                c.validate().unwrap();
                let r = c.count_resources();
                assert_eq!(r.cswaps, (3 * n / 2 - 3) * w);
                assert_eq!(r.ancillas, 3 * (n / 2).ilog2() as usize);
            }
        }
        let r = build_un(8, 1).unwrap().count_resources();
        assert_eq!((r.cswaps, r.ancillas, r.total_qubits), (9, 6, 14));
        assert_eq!(build_un(16, 3).unwrap().counts.cswaps, 63);
        assert!(build_un(6, 1).is_err());
        assert!(build_un(2, 1).is_err());
    }

    #[test]
    fn full_multiswap_counts() {
        let r = build_multiswap_full(4, 1).unwrap().count_resources();
        assert_eq!((r.cswaps, r.ancillas, r.total_qubits), (4, 4, 8));
        let r = build_multiswap_full(8, 1).unwrap().count_resources();
        assert_eq!((r.cswaps, r.ancillas), (10, 7));
        let c = build_multiswap_full(8, 2).unwrap();
        assert_eq!(c.counts.cswaps, (3 * 8 / 2 - 2) * 2);
        assert_eq!(c.layout.measured(), (0..7).collect::<Vec<_>>());
        assert_eq!(c.gates.last(), Some(&Gate::Hadamard(0)));
    }

    #[test]
    fn full_multiswap_marginal_normalized() {
        let inputs: Vec<_> = (0..4)
            .map(|k| StateVector::qubit(0.4 * k as f64, 0.2 * k as f64))
            .collect();
        let c = build_multiswap_full(4, 1).unwrap();
        let out = c.run(&inputs).unwrap();
        let total: f64 = out
            .exact_marginal(&c.layout.measured())
            .unwrap()
            .probabilities()
            .iter()
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn padding() {
        let s = |k: usize| StateVector::qubit(k as f64, 0.0);
        let five: Vec<_> = (0..5).map(s).collect();
        let padded = pad_inputs(&five, 1).unwrap();
        assert_eq!(padded.len(), 8);
        assert_eq!(&padded[..5], &five[..]);
        for p in &padded[5..] {
            assert_eq!(p, &StateVector::zeros(1).unwrap());
        }
        let four: Vec<_> = (0..4).map(s).collect();
        assert_eq!(pad_inputs(&four, 1).unwrap(), four);
        assert_eq!(pad_inputs(&four[..2], 1).unwrap().len(), 4);
        assert!(pad_inputs(&four, 2).is_err());
        assert!(pad_inputs(&four[..1], 1).is_err());
    }

    #[test]
    fn pair_map_n4() {
        let m = derive_pair_map(4).unwrap();
        assert_eq!(m.entries.len(), 8);
        assert!(m.covers_all_pairs());
        assert_eq!(m.multiplicity.values().sum::<usize>(), 8);
        // hand trace of the three-gate shuffler, outcome bits (a0 a1 a2)
        assert_eq!(
            m.entries,
            vec![(0, 1), (2, 1), (3, 1), (3, 1), (0, 2), (2, 0), (3, 2), (3, 0)]
        );
        assert_eq!(m.multiplicity(1, 3), 2);
        assert_eq!(m.multiplicity(0, 2), 2);
        assert_eq!(m.multiplicity(0, 1), 1);
    }

    #[test]
    fn pair_map_n4_agrees_with_dense_simulation() {
        let m = derive_pair_map(4).unwrap();
        let c = build_un(4, 2).unwrap();
        let tags: Vec<_> = (0..4).map(|t| StateVector::basis(2, t).unwrap()).collect();
        let out = c.run(&tags).unwrap();
        let reg_qubits: Vec<usize> = c.layout.registers[..2].concat();
        let mut measured = c.layout.mid.clone();
        measured.extend(&reg_qubits);
        let joint = out.exact_marginal(&measured).unwrap();
        for (outcome, &(a, b)) in m.entries.iter().enumerate() {
            let key = (outcome << 4) | (a << 2) | b;
            // each ancilla branch is a single basis state with weight 1/8
            assert!((joint.probability(key) - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_map_coverage_larger() {
        for n in [8usize, 16] {
            let m = derive_pair_map(n).unwrap();
            assert_eq!(m.entries.len(), 1 << mid_ancillas(n));
            assert!(m.covers_all_pairs(), "n={n}");
        }
        assert_eq!(derive_pair_map(8).unwrap().multiplicity.len(), 28);
        assert!(derive_pair_map(12).is_err());
    }

    #[test]
    fn json_dump_shape() {
        let c = build_swap_test(1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["w"], 1);
        assert_eq!(v["gates"][1]["type"], "cswap");
        assert_eq!(v["gates"][1]["qubits"], serde_json::json!([0, 1, 2]));
        assert_eq!(v["counts"]["cswaps"], 1);
        assert_eq!(v["layout"]["top"], 0);
    }
}
