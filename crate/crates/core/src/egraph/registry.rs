use serde::Serialize;
use std::collections::BTreeMap;

use super::quantum::{multi_egraph, per_pair_egraph, MultiCalibration, PairEstimate, Shots};
use super::{brute_force_egraph, kdtree_egraph, EpsilonGraph, PointCloud, QueryStats};
use crate::circuits::build_naive_multiswap;
use crate::error::{domain, Result};

/// Knobs shared by all builders; classical builders ignore them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BuildOptions {
    pub shots: Shots,
    pub seed: u64,
    pub calibration: MultiCalibration,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            shots: Shots::Exact,
            seed: 0,
            calibration: MultiCalibration::Empirical,
        }
    }
}

/// Output of one builder run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphBuild {
    pub graph: Option<EpsilonGraph>,
    /// Per-pair decisions; empty for classical builders.
    pub pairs: Vec<PairEstimate>,
    pub distance_evaluations: u64,
    /// kd-tree only, one entry per point query.
    pub queries: Vec<QueryStats>,
    /// Controlled swaps in one execution of the circuit design
    /// (one full battery for the naive mode).
    pub cswaps_per_round: Option<usize>,
    pub qubits: Option<usize>,
}

impl GraphBuild {
    pub fn graph(&self) -> &EpsilonGraph {
        self.graph.as_ref().expect("builders always set the graph")
    }

    fn with_graph(graph: EpsilonGraph) -> Self {
        Self {
            graph: Some(graph),
            ..Self::default()
        }
    }
}

/// An ε-graph construction strategy.
pub trait GraphBuilder: Send + Sync {
    /// Registry key, also the `--mode` value on the command line.
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Whether `pairs` carries SWAP-test estimates.
    fn is_quantum(&self) -> bool {
        false
    }
    fn build(&self, cloud: &PointCloud, eps: f64, opts: &BuildOptions) -> Result<GraphBuild>;
}

pub struct BruteForce;

impl GraphBuilder for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn description(&self) -> &'static str {
        "all pairwise distances"
    }

    fn build(&self, cloud: &PointCloud, eps: f64, _: &BuildOptions) -> Result<GraphBuild> {
        let (graph, evals) = brute_force_egraph(cloud, eps)?;
        Ok(GraphBuild {
            distance_evaluations: evals,
            ..GraphBuild::with_graph(graph)
        })
    }
}

pub struct KdTreeBuilder;

impl GraphBuilder for KdTreeBuilder {
    fn name(&self) -> &'static str {
        "kdtree"
    }

    fn description(&self) -> &'static str {
        "fixed-radius kd-tree search"
    }

    fn build(&self, cloud: &PointCloud, eps: f64, _: &BuildOptions) -> Result<GraphBuild> {
        let (graph, queries) = kdtree_egraph(cloud, eps)?;
        Ok(GraphBuild {
            distance_evaluations: queries.iter().map(|q| q.distance_evaluations).sum(),
            queries,
            ..GraphBuild::with_graph(graph)
        })
    }
}

pub struct QuantumStandard;

impl GraphBuilder for QuantumStandard {
    fn name(&self) -> &'static str {
        "quantum-standard"
    }

    fn description(&self) -> &'static str {
        "one simulated SWAP test per pair"
    }

    fn is_quantum(&self) -> bool {
        true
    }

    fn build(&self, cloud: &PointCloud, eps: f64, opts: &BuildOptions) -> Result<GraphBuild> {
        let (graph, pairs, circuit) = per_pair_egraph(cloud, eps, opts.shots, opts.seed)?;
        Ok(GraphBuild {
            pairs,
            cswaps_per_round: Some(circuit.count_resources().cswaps),
            qubits: Some(circuit.layout.num_qubits),
            ..GraphBuild::with_graph(graph)
        })
    }
}

/// Same per-pair execution as [`QuantumStandard`]; the round cost is the
/// whole battery of `n(n-1)/2` circuits.
pub struct QuantumNaive;

impl GraphBuilder for QuantumNaive {
    fn name(&self) -> &'static str {
        "quantum-naive"
    }

    fn description(&self) -> &'static str {
        "battery of per-pair SWAP tests"
    }

    fn is_quantum(&self) -> bool {
        true
    }

    fn build(&self, cloud: &PointCloud, eps: f64, opts: &BuildOptions) -> Result<GraphBuild> {
        let (graph, pairs, circuit) = per_pair_egraph(cloud, eps, opts.shots, opts.seed)?;
        let battery = if cloud.len() >= 2 {
            build_naive_multiswap(cloud.len(), circuit.w)?
                .iter()
                .map(|(_, c)| c.count_resources().cswaps)
                .sum()
        } else {
            0
        };
        Ok(GraphBuild {
            pairs,
            cswaps_per_round: Some(battery),
            qubits: Some(circuit.layout.num_qubits),
            ..GraphBuild::with_graph(graph)
        })
    }
}

pub struct QuantumMulti;

impl GraphBuilder for QuantumMulti {
    fn name(&self) -> &'static str {
        "quantum-multi"
    }

    fn description(&self) -> &'static str {
        "multi-state SWAP test over all points"
    }

    fn is_quantum(&self) -> bool {
        true
    }

    fn build(&self, cloud: &PointCloud, eps: f64, opts: &BuildOptions) -> Result<GraphBuild> {
        let (graph, pairs, circuit) =
            multi_egraph(cloud, eps, opts.shots, opts.seed, opts.calibration)?;
        Ok(GraphBuild {
            pairs,
            cswaps_per_round: Some(circuit.count_resources().cswaps),
            qubits: Some(circuit.layout.num_qubits),
            ..GraphBuild::with_graph(graph)
        })
    }
}

/// Builders keyed by name.
pub struct Registry {
    builders: BTreeMap<&'static str, Box<dyn GraphBuilder>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(BruteForce));
        r.register(Box::new(KdTreeBuilder));
        r.register(Box::new(QuantumStandard));
        r.register(Box::new(QuantumNaive));
        r.register(Box::new(QuantumMulti));
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// Adds a builder, replacing any previous one of the same name.
    pub fn register(&mut self, builder: Box<dyn GraphBuilder>) {
        self.builders.insert(builder.name(), builder);
    }

    pub fn get(&self, name: &str) -> Result<&dyn GraphBuilder> {
        self.builders.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            domain(format!(
                "unknown mode `{name}`; expected one of {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn GraphBuilder> {
        self.builders.values().map(|b| b.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::compare_graphs;

    /// Eight unit vectors in the first quadrant; all pairwise distances are
    /// at least 5e-3 away from eps = 0.5.
    fn quadrant_cloud() -> PointCloud {
        let angles = [0.0f64, 0.1, 0.35, 0.5, 0.8, 1.0, 1.3, 1.5];
        PointCloud::new(angles.iter().map(|t| vec![t.cos(), t.sin()]).collect()).unwrap()
    }

    #[test]
    fn default_registry_has_every_mode() {
        let r = Registry::default();
        assert_eq!(
            r.names(),
            vec!["brute", "kdtree", "quantum-multi", "quantum-naive", "quantum-standard"]
        );
        assert!(r.get("nope").is_err());
        assert!(r.get("quantum-multi").unwrap().is_quantum());
        assert!(!r.get("kdtree").unwrap().is_quantum());
    }

    #[test]
    fn exact_quantum_modes_recover_reference() {
        let cloud = quadrant_cloud();
        let r = Registry::default();
        let opts = BuildOptions::default();
        let reference = r.get("brute").unwrap().build(&cloud, 0.5, &opts).unwrap();
        assert!(reference.graph().edge_count() > 0);
        for b in r.iter() {
            let out = b.build(&cloud, 0.5, &opts).unwrap();
            let d = compare_graphs(reference.graph(), out.graph()).unwrap();
            assert_eq!((d.fn_count, d.fp_count), (0, 0), "{}", b.name());
            if b.is_quantum() {
                assert_eq!(out.pairs.len(), 28);
            }
        }
    }

    #[test]
    fn published_calibration_misjudges_by_multiplicity() {
        // the published constant matches multiplicity-2 pairs only: smaller
        // multiplicities lose neighbours, larger ones gain spurious edges
        let cloud = quadrant_cloud();
        let opts = BuildOptions {
            calibration: MultiCalibration::Published,
            ..BuildOptions::default()
        };
        let map = crate::circuits::derive_pair_map(8).unwrap();
        let reference = BruteForce.build(&cloud, 0.5, &opts).unwrap();
        let out = QuantumMulti.build(&cloud, 0.5, &opts).unwrap();
        let d = compare_graphs(reference.graph(), out.graph()).unwrap();
        assert!(d.fn_count + d.fp_count > 0);
        for &(i, j) in &d.false_negatives {
            assert!(map.multiplicity(i, j) < 2);
        }
        for &(i, j) in &d.false_positives {
            assert!(map.multiplicity(i, j) > 2);
        }
    }

    #[test]
    fn finite_shots_are_deterministic() {
        let cloud = quadrant_cloud();
        let opts = BuildOptions {
            shots: Shots::Finite(500),
            seed: 99,
            ..BuildOptions::default()
        };
        for name in ["quantum-standard", "quantum-naive", "quantum-multi"] {
            let b = Registry::default();
            let a = b.get(name).unwrap().build(&cloud, 0.5, &opts).unwrap();
            let c = b.get(name).unwrap().build(&cloud, 0.5, &opts).unwrap();
            assert_eq!(a, c, "{name}");
        }
    }

    #[test]
    fn naive_reports_battery_cost() {
        let out = QuantumNaive
            .build(&quadrant_cloud(), 0.5, &BuildOptions::default())
            .unwrap();
        assert_eq!(out.cswaps_per_round, Some(28));
        let out = QuantumMulti
            .build(&quadrant_cloud(), 0.5, &BuildOptions::default())
            .unwrap();
        assert_eq!(out.cswaps_per_round, Some(10));
        assert_eq!(out.qubits, Some(15));
    }

    #[test]
    fn multi_mode_drops_padding_pairs() {
        let cloud = PointCloud::new(vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0]]).unwrap();
        let out = QuantumMulti.build(&cloud, 1.0, &BuildOptions::default()).unwrap();
        assert_eq!(out.pairs.len(), 3);
        assert!(out.pairs.iter().all(|p| p.estimate.pair.1 < 3));
        let reference = BruteForce.build(&cloud, 1.0, &BuildOptions::default()).unwrap();
        assert_eq!(out.graph(), reference.graph());
    }
}
