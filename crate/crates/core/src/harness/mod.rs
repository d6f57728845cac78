//! Experiment runners. Each returns a [`Table`] whose metadata records the
//! run configuration and the formula behind every theory column, so a table
//! can be rendered as CSV or JSON without further context.
//!
//! All randomness comes from [`crate::seeding`]: trial `t` of a run with
//! master seed `s` draws from stream `t` of `s`, and rows are emitted in
//! parameter order, so reruns are byte-identical.

mod audit;
mod bounds;
mod scaling;
mod table;
mod trial;

pub use audit::{run_eq1_audit, run_pair_map, run_swap_test, Eq1Audit, SwapTestConfig};
pub use bounds::{
    run_bounds_sweep, run_fn_rate, run_lemma1_example, run_pair_fn_rates, BoundsSweep,
    FnRateConfig,
};
pub use scaling::{run_gatecount_report, run_scaling_curves, ScalingConfig};
pub use table::{fmt_real, Cell, Format, Table};
pub use trial::{
    random_unit_cloud, run_egraph_trial, write_egraph_outputs, EgraphConfig, EgraphTrial,
};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::statevec::StateVector;

/// Parses `a,b,c` or the inclusive range `start:stop:step`. Range members
/// are `start + k·step` rounded to 12 decimals, so `0.05:0.95:0.05` yields
/// the 19 values one would write by hand.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let bad = |what: &str| domain(format!("bad grid `{text}`: {what}"));
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(&format!("`{s}` is not a number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("ranges are start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect())
    } else {
        text.split(',').map(num).collect()
    }
}

/// [`parse_grid`] for non-negative integers.
pub fn parse_int_grid(text: &str) -> Result<Vec<u64>> {
    parse_grid(text)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
                Ok(x as u64)
            } else {
                Err(domain(format!("grid value {x} is not a non-negative integer")))
            }
        })
        .collect()
}

/// Haar-random `w`-qubit state from normalized complex Gaussians.
pub fn random_state<R: Rng + ?Sized>(w: usize, rng: &mut R) -> Result<StateVector> {
    let mut amps: Vec<Complex64> = (0..1usize << w)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps)
}

fn config_json<T: Serialize>(config: &T) -> Result<String> {
    Ok(serde_json::to_string(config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        let g = parse_grid("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[18], 0.95);
        assert_eq!(parse_int_grid("1:200:1").unwrap().len(), 200);
        assert!(parse_int_grid("1.5").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("3:1:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn random_states_are_normalized() {
        let mut rng = seeding::stream(1, 0);
        for w in 1..4 {
            let s = random_state(w, &mut rng).unwrap();
            assert_eq!(s.num_qubits(), w);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
