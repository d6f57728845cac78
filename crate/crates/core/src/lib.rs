//! SWAP-test distance estimation and ε-graph construction.
//!
//! * [`statevec`]: dense state-vector simulator (Hadamard, controlled swap,
//!   exact marginals, seeded sampling).
//! * [`circuits`]: builders for the two-state SWAP test, the naive battery,
//!   the recursive multi-state pair shuffler and its final SWAP test.
//! * [`stats`]: probability/overlap/distance conversions, thresholds, the
//!   exact false-negative tail and Chernoff-Hoeffding bounds.
//! * [`egraph`]: point clouds, encodings and the ε-graph builders, selected
//!   by name from a [`egraph::Registry`].
//! * [`harness`]: experiment runners producing CSV/JSON tables.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod egraph;
pub mod error;
pub mod harness;
pub mod seeding;
pub mod statevec;
pub mod stats;

pub use error::{Error, Result};
