use serde::Serialize;

use super::{config_json, Cell, Table};
use crate::circuits::{build_multiswap_full, build_naive_multiswap, build_un, mid_ancillas};
use crate::error::{domain, Result};
use crate::stats::{
    alpha_eps_multi, alpha_eps_standard, n_gamma, overlap_sq_to_prob, published_pair_constant,
    proposition1_lower, shots_for, theorem1_calls,
};

/// Formula-only sweep over circuit sizes. `overlap_sq` fixes the reference
/// pair used for the multi-vs-naive comparison; it must exceed the squared
/// overlap at distance `eps` so the pair is a neighbour.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub gamma: f64,
    pub eps: f64,
    pub overlap_sq: f64,
}

fn ratio(prev: Option<(usize, f64)>, n: usize, value: f64) -> Cell {
    match prev {
        Some((m, v)) if 2 * m == n => (value / v).into(),
        _ => Cell::Empty,
    }
}

/// Repetition and call-count curves per `n`. Ratio columns compare each
/// row with the row for `n/2` when that row is present.
pub fn run_scaling_curves(config: &ScalingConfig) -> Result<Table> {
    let ScalingConfig {
        gamma,
        eps,
        overlap_sq,
        ..
    } = *config;
    if !(0.0..=1.0).contains(&overlap_sq) {
        return Err(domain(format!("overlap_sq {overlap_sq} outside [0, 1]")));
    }
    let mut t = Table::new(&[
        "n",
        "d_n",
        "alpha_eps_multi",
        "p0ij_min",
        "p0ij_max",
        "n_formula",
        "n_formula_ratio",
        "n_formula_exponent",
        "prop1_curve",
        "prop1_ratio",
        "theorem1_curve",
        "theorem1_ratio",
        "n_formula_ref",
        "naive_shots_per_pair",
        "naive_total",
        "multi_over_naive",
    ]);
    t.meta("config", config_json(config)?);
    t.meta("alpha_eps_multi", "[(1 - eps^2/2)^2 + 1] 2^3 / n^3");
    t.meta("p0ij_min", "2^3 / n^3 (orthogonal pair)");
    t.meta("p0ij_max", "2^4 / n^3 (identical pair)");
    t.meta("n_formula", "ln(1/gamma) / KL(alpha_eps_multi || p0ij_max)");
    t.meta("n_formula_exponent", "log2(n_formula_ratio)");
    t.meta("prop1_curve", "n^3 ln(1/gamma) / ln n");
    t.meta("theorem1_curve", "n^6 / (2^6 gamma^2)");
    t.meta(
        "n_formula_ref",
        "ln(1/gamma) / KL(alpha_eps_multi || 2^3 (1 + overlap_sq) / n^3)",
    );
    t.meta(
        "naive_shots_per_pair",
        "ceil(ln(1/gamma) / KL(alpha_eps || (1 + overlap_sq)/2))",
    );
    t.meta("naive_total", "n(n-1)/2 * naive_shots_per_pair");

    let a_std = alpha_eps_standard(eps)?;
    let p_std = overlap_sq_to_prob(overlap_sq);
    let naive_per_pair = shots_for(gamma, a_std, p_std)?;
    let mut prev: Option<(usize, f64, f64, f64)> = None;
    for &n in &config.n_list {
        let alpha = alpha_eps_multi(eps, n)?;
        let c = published_pair_constant(n);
        let n_formula = n_gamma(gamma, alpha, 2.0 * c)?;
        let prop1 = proposition1_lower(n, gamma)?;
        let thm1 = theorem1_calls(n, gamma)?;
        let n_ref = n_gamma(gamma, alpha, c * (1.0 + overlap_sq))?;
        let nf = n as f64;
        let naive_total = nf * (nf - 1.0) / 2.0 * naive_per_pair as f64;
        let r = ratio(prev.map(|p| (p.0, p.1)), n, n_formula);
        let exponent = r.as_f64().map(f64::log2).into();
        t.push(vec![
            n.into(),
            mid_ancillas(n).into(),
            alpha.into(),
            c.into(),
            (2.0 * c).into(),
            n_formula.into(),
            r,
            exponent,
            prop1.into(),
            ratio(prev.map(|p| (p.0, p.2)), n, prop1),
            thm1.into(),
            ratio(prev.map(|p| (p.0, p.3)), n, thm1),
            n_ref.into(),
            naive_per_pair.into(),
            naive_total.into(),
            (n_ref / naive_total).into(),
        ]);
        prev = Some((n, n_formula, prop1, thm1));
    }
    Ok(t)
}

/// Gate and ancilla counts recounted from constructed circuits, next to the
/// closed forms they should equal.
pub fn run_gatecount_report(n_list: &[usize], w: usize) -> Result<Table> {
    let mut t = Table::new(&[
        "n",
        "w",
        "un_cswaps",
        "un_cswaps_formula",
        "un_ancillas",
        "un_ancillas_formula",
        "full_cswaps",
        "full_hadamards",
        "full_ancillas",
        "full_qubits",
        "naive_circuits",
        "naive_cswaps",
        "naive_cswaps_formula",
        "naive_ancillas",
        "counts_match",
    ]);
    t.meta("w", w);
    t.meta("un_cswaps_formula", "(3n/2 - 3) w");
    t.meta("un_ancillas_formula", "3 log2(n/2)");
    t.meta("naive_cswaps_formula", "n(n-1)/2 w");
    t.meta("naive_ancillas", "one per circuit");
    for &n in n_list {
        let un = build_un(n, w)?.count_resources();
        let full = build_multiswap_full(n, w)?.count_resources();
        let battery = build_naive_multiswap(n, w)?;
        let naive_cswaps: usize = battery.iter().map(|(_, c)| c.count_resources().cswaps).sum();
        let naive_ancillas = battery
            .iter()
            .map(|(_, c)| c.count_resources().ancillas)
            .max()
            .unwrap_or(0);
        let un_formula = (3 * n / 2 - 3) * w;
        let anc_formula = mid_ancillas(n);
        let naive_formula = n * (n - 1) / 2 * w;
        let ok = un.cswaps == un_formula
            && un.ancillas == anc_formula
            && full.cswaps == un_formula + w
            && full.ancillas == anc_formula + 1
            && battery.len() == n * (n - 1) / 2
            && naive_cswaps == naive_formula;
        t.push(vec![
            n.into(),
            w.into(),
            un.cswaps.into(),
            un_formula.into(),
            un.ancillas.into(),
            anc_formula.into(),
            full.cswaps.into(),
            full.hadamards.into(),
            full.ancillas.into(),
            full.total_qubits.into(),
            battery.len().into(),
            naive_cswaps.into(),
            naive_formula.into(),
            naive_ancillas.into(),
            ok.into(),
        ]);
    }
    Ok(t)
}
