//! Binomial probabilities in log space.
//!
//! Point masses use Loader's saddle-point form (Stirling remainder plus the
//! deviance term `bd0`), which keeps relative error near machine precision
//! for any `n` without forming huge binomial coefficients. Tails are summed
//! term by term in log space and stop once the remaining terms cannot move
//! the result.

use std::f64::consts::PI;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln(n!) - ln(sqrt(2πn) (n/e)^n)`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    let x = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return ln_fact - (x + 0.5) * x.ln() + x - 0.5 * LN_2PI;
    }
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance `x ln(x/m) + m - x`, evaluated without cancellation near x = m.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln P(X = k)` for `X ~ Bin(n, q)`, with `q_c = 1 - q` passed separately.
pub fn ln_pmf(k: u64, n: u64, q: f64, q_c: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if q == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q_c == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return if q < 0.1 {
            -bd0(nf, nf * q_c) - nf * q
        } else {
            nf * q_c.ln()
        };
    }
    if k == n {
        return if q_c < 0.1 {
            -bd0(nf, nf * q) - nf * q_c
        } else {
            nf * q.ln()
        };
    }
    let kf = k as f64;
    let lc = stirlerr(n)
        - stirlerr(k)
        - stirlerr(n - k)
        - bd0(kf, nf * q)
        - bd0(nf - kf, nf * q_c);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Sums `ln_pmf` over `ks` (which must walk away from the mode) until the
/// terms stop contributing.
fn ln_sum_monotone(ks: impl Iterator<Item = u64>, n: u64, q: f64, q_c: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for k in ks {
        let t = ln_pmf(k, n, q, q_c);
        if t == f64::NEG_INFINITY {
            break;
        }
        // remaining terms shrink geometrically; 1e-20 relative is below f64 resolution
        if acc > f64::NEG_INFINITY && t < acc - 46.0 {
            break;
        }
        acc = log_add(acc, t);
    }
    acc
}

/// `ln P(X >= k)` for `X ~ Bin(n, q)`.
pub fn ln_upper_tail(k: u64, n: u64, q: f64, q_c: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n {
        return f64::NEG_INFINITY;
    }
    let mode = (((n + 1) as f64) * q).floor() as u64;
    if k > mode {
        ln_sum_monotone(k..=n, n, q, q_c)
    } else {
        // the tail holds at least the median mass here, so 1 - lower is safe
        let lower = ln_sum_monotone((0..k).rev(), n, q, q_c).exp();
        (-lower).ln_1p()
    }
}
