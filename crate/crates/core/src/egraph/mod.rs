//! ε-graphs over point clouds.
//!
//! An ε-graph joins two points iff their Euclidean distance is strictly
//! below `eps`. Builders live behind the [`GraphBuilder`] trait and are
//! looked up by name in a [`Registry`]:
//!
//! | name               | method                                            |
//! |--------------------|---------------------------------------------------|
//! | `brute`            | all `n(n-1)/2` distances                          |
//! | `kdtree`           | fixed-radius search in a median-split kd-tree     |
//! | `quantum-standard` | one simulated SWAP test per pair                  |
//! | `quantum-naive`    | same decisions, reported as one battery per round |
//! | `quantum-multi`    | multi-state circuit over all points at once       |
//!
//! Quantum builders amplitude-encode each point, so they see the
//! normalized cloud and the distance `√(2(1 - |u·v|))`. On unit-norm clouds
//! with non-negative pairwise dot products this is the Euclidean distance.

mod io;
mod kdtree;
mod quantum;
mod registry;

pub use io::{read_point_cloud, write_edge_list, EdgeListRow, GraphSummary};
pub use kdtree::{KdTree, QueryStats};
pub use quantum::{encode_point, MultiCalibration, PairEstimate, Shots};
pub use registry::{
    BruteForce, BuildOptions, GraphBuild, GraphBuilder, KdTreeBuilder, QuantumMulti,
    QuantumNaive, QuantumStandard, Registry,
};

use serde::Serialize;
use std::collections::BTreeSet;

use crate::error::{domain, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
    labels: Option<Vec<String>>,
}

impl PointCloud {
    /// All points must share one dimension `>= 1` and be finite. An empty
    /// cloud is allowed when `dim` is given.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        Self::with_dim(points, dim)
    }

    pub fn with_dim(points: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("points need at least one coordinate"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(domain(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(domain(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Self {
            points,
            dim,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(domain("one label per point required"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

/// Squared Euclidean distance. Every classical builder compares this
/// against `eps²` so their decisions agree to the last bit.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonGraph {
    pub n: usize,
    pub eps: f64,
    edges: BTreeSet<(usize, usize)>,
}

impl EpsilonGraph {
    pub fn new(n: usize, eps: f64) -> Self {
        Self {
            n,
            eps,
            edges: BTreeSet::new(),
        }
    }

    /// Adds `{i, j}` in canonical `(min, max)` order. Self-loops and
    /// out-of-range vertices are rejected.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(domain(format!("self-loop on vertex {i}")));
        }
        if i >= self.n || j >= self.n {
            return Err(domain(format!("edge ({i}, {j}) outside {} vertices", self.n)));
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphDiff {
    /// In the reference, missing from the estimate.
    pub false_negatives: BTreeSet<(usize, usize)>,
    /// In the estimate, missing from the reference.
    pub false_positives: BTreeSet<(usize, usize)>,
    pub fn_count: usize,
    pub fp_count: usize,
}

pub fn compare_graphs(reference: &EpsilonGraph, estimate: &EpsilonGraph) -> Result<GraphDiff> {
    if reference.n != estimate.n {
        return Err(domain(format!(
            "graphs have {} and {} vertices",
            reference.n, estimate.n
        )));
    }
    let false_negatives: BTreeSet<_> = reference.edges.difference(&estimate.edges).copied().collect();
    let false_positives: BTreeSet<_> = estimate.edges.difference(&reference.edges).copied().collect();
    Ok(GraphDiff {
        fn_count: false_negatives.len(),
        fp_count: false_positives.len(),
        false_negatives,
        false_positives,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(domain(format!("eps = {eps} must be positive")));
    }
    Ok(())
}

/// Exact ε-graph from all pairwise distances. Returns the graph and the
/// number of distance evaluations.
pub fn brute_force_egraph(cloud: &PointCloud, eps: f64) -> Result<(EpsilonGraph, u64)> {
    check_eps(eps)?;
    let n = cloud.len();
    let eps_sq = eps * eps;
    let mut graph = EpsilonGraph::new(n, eps);
    let mut evaluations = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            evaluations += 1;
            if dist_sq(cloud.point(i), cloud.point(j)) < eps_sq {
                graph.edges.insert((i, j));
            }
        }
    }
    Ok((graph, evaluations))
}

/// Exact ε-graph from one fixed-radius kd-tree query per point. Returns the
/// graph and the per-query statistics.
pub fn kdtree_egraph(cloud: &PointCloud, eps: f64) -> Result<(EpsilonGraph, Vec<QueryStats>)> {
    check_eps(eps)?;
    let tree = KdTree::build(cloud);
    let mut graph = EpsilonGraph::new(cloud.len(), eps);
    let mut stats = Vec::with_capacity(cloud.len());
    for i in 0..cloud.len() {
        let (hits, s) = tree.range_query(cloud.point(i), eps)?;
        for j in hits.into_iter().filter(|&j| j > i) {
            graph.edges.insert((i, j));
        }
        stats.push(s);
    }
    Ok((graph, stats))
}
