use serde::Serialize;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;

use super::{Format, Table};
use crate::egraph::{
    brute_force_egraph, compare_graphs, dist_sq, read_point_cloud, write_edge_list, BuildOptions,
    EdgeListRow, EpsilonGraph, GraphBuild, GraphDiff, GraphSummary, MultiCalibration,
    PointCloud, Registry, Shots,
};
use crate::error::{domain, Result};
use crate::seeding;

/// Stream reserved for generating clouds, away from the per-pair streams.
const CLOUD_STREAM: u64 = u64::MAX;

/// One ε-graph trial. The cloud comes from `points` when given, otherwise
/// `n` random unit vectors in the positive orthant of dimension `dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EgraphConfig {
    pub points: Option<PathBuf>,
    pub n: usize,
    pub dim: usize,
    pub eps: f64,
    pub mode: String,
    pub shots: Shots,
    pub seed: u64,
    pub calibration: MultiCalibration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgraphTrial {
    pub cloud: PointCloud,
    pub reference: EpsilonGraph,
    pub build: GraphBuild,
    pub diff: GraphDiff,
    pub summary: GraphSummary,
    pub pairs: Table,
}

/// `n` unit vectors with coordinates drawn uniformly from `(0, 1]` before
/// normalization. Dot products are positive, so encoded-state distances
/// equal Euclidean ones.
pub fn random_unit_cloud(n: usize, dim: usize, seed: u64) -> Result<PointCloud> {
    if dim == 0 {
        return Err(domain("dim must be at least 1"));
    }
    let mut rng = seeding::stream(seed, CLOUD_STREAM);
    let points = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| 1.0 - rng.random::<f64>()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    PointCloud::with_dim(points, dim)
}

/// Builds the brute-force reference and the `mode` estimate and compares
/// them. Differences are reported, not treated as failures.
pub fn run_egraph_trial(config: &EgraphConfig, registry: &Registry) -> Result<EgraphTrial> {
    let builder = registry.get(&config.mode)?;
    let cloud = match &config.points {
        Some(path) => read_point_cloud(path)?,
        None => random_unit_cloud(config.n, config.dim, config.seed)?,
    };
    let (reference, _) = brute_force_egraph(&cloud, config.eps)?;
    let opts = BuildOptions {
        shots: config.shots,
        seed: config.seed,
        calibration: config.calibration,
    };
    let build = builder.build(&cloud, config.eps, &opts)?;
    let diff = compare_graphs(&reference, build.graph())?;
    let summary = GraphSummary {
        n: cloud.len(),
        eps: config.eps,
        mode: builder.name().to_string(),
        shots: config.shots.to_string(),
        seed: config.seed,
        fn_count: diff.fn_count,
        fp_count: diff.fp_count,
    };

    let mut pairs = Table::new(&[
        "i",
        "j",
        "p_exact",
        "threshold",
        "pair_constant",
        "shots",
        "hits",
        "p_hat",
        "overlap_sq_hat",
        "distance_hat",
        "clamped",
        "neighbour",
        "distance_true",
        "reference_edge",
    ]);
    pairs.meta("mode", builder.name());
    pairs.meta("threshold", "2 pair_constant ((1 - eps^2/2)^2 + 1)/2");
    pairs.meta("distance_hat", "sqrt(2 (1 - sqrt(overlap_sq_hat)))");
    for rec in &build.pairs {
        let (i, j) = rec.estimate.pair;
        let est = &rec.estimate;
        let finite = est.shots_total > 0;
        pairs.push(vec![
            i.into(),
            j.into(),
            rec.p_exact.into(),
            rec.threshold.into(),
            rec.pair_constant.into(),
            finite.then_some(est.shots_total).into(),
            finite.then_some(est.hits).into(),
            est.p_hat.into(),
            est.overlap_sq_hat.into(),
            est.distance_hat.into(),
            est.clamped.into(),
            rec.neighbour.into(),
            dist_sq(cloud.point(i), cloud.point(j)).sqrt().into(),
            reference.contains(i, j).into(),
        ]);
    }
    Ok(EgraphTrial {
        cloud,
        reference,
        build,
        diff,
        summary,
        pairs,
    })
}

impl EgraphTrial {
    /// Edge rows of the estimated graph, with distance estimates for
    /// quantum builds.
    pub fn edge_rows(&self) -> Vec<EdgeListRow> {
        let estimates: BTreeMap<_, _> = self
            .build
            .pairs
            .iter()
            .map(|r| (r.estimate.pair, r.estimate.distance_hat))
            .collect();
        self.build
            .graph()
            .edges()
            .iter()
            .map(|&(i, j)| EdgeListRow {
                i,
                j,
                distance_estimate: estimates.get(&(i, j)).copied(),
            })
            .collect()
    }

    pub fn reference_rows(&self) -> Vec<EdgeListRow> {
        self.reference
            .edges()
            .iter()
            .map(|&(i, j)| EdgeListRow {
                i,
                j,
                distance_estimate: None,
            })
            .collect()
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `out` (estimated edges), `out.reference.csv`,
/// `out.summary.json` and `out.pairs.csv` or `out.pairs.json`. Returns the
/// paths written.
pub fn write_egraph_outputs(trial: &EgraphTrial, out: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let reference = sibling(out, ".reference.csv");
    let summary = sibling(out, ".summary.json");
    let pairs = sibling(
        out,
        match format {
            Format::Csv => ".pairs.csv",
            Format::Json => ".pairs.json",
        },
    );
    write_edge_list(BufWriter::new(File::create(out)?), &trial.edge_rows())?;
    write_edge_list(BufWriter::new(File::create(&reference)?), &trial.reference_rows())?;
    let mut w = BufWriter::new(File::create(&summary)?);
    serde_json::to_writer_pretty(&mut w, &trial.summary)?;
    writeln!(w)?;
    w.flush()?;
    trial.pairs.write(BufWriter::new(File::create(&pairs)?), format)?;
    Ok(vec![out.to_path_buf(), reference, summary, pairs])
}
