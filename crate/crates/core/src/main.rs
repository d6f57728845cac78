use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use swapgraph::egraph::{MultiCalibration, Registry, Shots};
use swapgraph::harness::{self, BoundsSweep, FnRateConfig, Format, ScalingConfig, Table};
use swapgraph::Result;

#[derive(Parser)]
#[command(name = "swapgraph", version, about = "SWAP-test distance and epsilon-graph experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Two-state SWAP tests on random pairs.
    SwapTest {
        #[arg(long, default_value_t = 1)]
        w: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Shots per test, or `inf` for exact probabilities.
        #[arg(long, default_value = "inf")]
        shots: Shots,
    },
    /// Outcome-to-pair map of the multi-state circuit.
    PairMap {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        w: usize,
        /// Also write the full circuit as JSON here.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Per-outcome probability audit of the multi-state circuit.
    Eq1Audit {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// Exact false-negative tail against the Chernoff-Hoeffding bounds.
    Bounds {
        /// Repetition counts N.
        #[arg(long, default_value = "1:200:1")]
        n_list: String,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        alpha_grid: String,
        /// Defaults to alpha + 0.02, alpha + 0.03, ..., 0.99 per alpha.
        #[arg(long)]
        p_grid: Option<String>,
    },
    /// KL, sharpness level and N at the sharpness level.
    Lemma1 {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.9)]
        p: f64,
    },
    /// Repetition and call-count curves over circuit sizes.
    Scaling {
        #[arg(long, default_value = "4,8,16,32,64,128,256,512,1024")]
        n_list: String,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        eps: f64,
        /// Squared overlap of the reference pair in the naive comparison.
        #[arg(long, default_value_t = 0.9)]
        overlap_sq: f64,
    },
    /// Gate and ancilla counts recounted from built circuits.
    Gatecount {
        #[arg(long, default_value = "4,8,16,32")]
        n_list: String,
        #[arg(long, default_value_t = 1)]
        w: usize,
    },
    /// Reference and estimated epsilon-graphs with their difference.
    Egraph {
        /// Point cloud CSV; a random unit-norm cloud is drawn when omitted.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value = "brute")]
        mode: String,
        #[arg(long, default_value = "inf")]
        shots: Shots,
        /// Per-pair constant of the multi-state mode: empirical or published.
        #[arg(long, default_value = "empirical")]
        calibration: MultiCalibration,
    },
    /// Monte Carlo false-negative frequency of a designed pair.
    FnRate {
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        shots: u64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
}

fn emit(table: &Table, common: &Common) -> Result<()> {
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(&mut w, common.format.into())?;
            w.flush()?;
        }
        None => table.write(io::stdout().lock(), common.format.into())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let seed = common.seed;
    let table = match cli.command {
        Command::SwapTest { w, trials, shots } => harness::run_swap_test(&harness::SwapTestConfig {
            w,
            trials,
            shots,
            seed,
        })?,
        Command::PairMap { n, w, circuit } => {
            let (table, spec) = harness::run_pair_map(n, w)?;
            if let Some(path) = circuit {
                std::fs::write(path, spec.to_json()? + "\n")?;
            }
            table
        }
        Command::Eq1Audit { n, trials } => harness::run_eq1_audit(n, trials, seed)?.table,
        Command::Bounds {
            n_list,
            alpha_grid,
            p_grid,
        } => harness::run_bounds_sweep(&BoundsSweep {
            shots: harness::parse_int_grid(&n_list)?,
            alpha: harness::parse_grid(&alpha_grid)?,
            p: p_grid.as_deref().map(harness::parse_grid).transpose()?,
        })?,
        Command::Lemma1 { alpha, p } => harness::run_lemma1_example(alpha, p)?,
        Command::Scaling {
            n_list,
            gamma,
            eps,
            overlap_sq,
        } => harness::run_scaling_curves(&ScalingConfig {
            n_list: to_sizes(&n_list)?,
            gamma,
            eps,
            overlap_sq,
        })?,
        Command::Gatecount { n_list, w } => harness::run_gatecount_report(&to_sizes(&n_list)?, w)?,
        Command::Egraph {
            points,
            n,
            dim,
            eps,
            mode,
            shots,
            calibration,
        } => {
            let config = harness::EgraphConfig {
                points,
                n,
                dim,
                eps,
                mode,
                shots,
                seed,
                calibration,
            };
            let trial = harness::run_egraph_trial(&config, &Registry::default())?;
            match &common.out {
                Some(out) => {
                    harness::write_egraph_outputs(&trial, out, common.format.into())?;
                }
                None => {
                    let mut stdout = io::stdout().lock();
                    serde_json::to_writer_pretty(&mut stdout, &trial.summary)?;
                    writeln!(stdout)?;
                }
            }
            return Ok(());
        }
        Command::FnRate {
            p,
            alpha,
            shots,
            trials,
        } => harness::run_fn_rate(&FnRateConfig {
            p,
            alpha,
            shots,
            trials,
            seed,
        })?,
    };
    emit(&table, common)
}

fn to_sizes(text: &str) -> Result<Vec<usize>> {
    Ok(harness::parse_int_grid(text)?
        .into_iter()
        .map(|n| n as usize)
        .collect())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swapgraph: {e}");
            ExitCode::from(2)
        }
    }
}
