use std::f64::consts::{E, LN_2};

use super::bounds::{BoundReport, Relation};
use crate::polybasis::binomial;

/// Grid evaluations of the three auxiliary inequalities used in the proofs.
pub fn inequality_suite() -> Vec<BoundReport> {
    let mut out = binomial_growth();
    out.extend(log_minimum());
    out.extend(power_versus_exponential());
    out
}

/// `binom(m+n, m) ≤ m^n (e/n)^n exp(n²/m)` for `m, n ∈ 1..=20`.
fn binomial_growth() -> Vec<BoundReport> {
    let mut out = Vec::new();
    for m in 1..=20u64 {
        for n in 1..=20u64 {
            let exact = binomial(m + n, m).expect("small binomial") as f64;
            let (mf, nf) = (m as f64, n as f64);
            let bound = mf.powf(nf) * (E / nf).powf(nf) * (nf * nf / mf).exp();
            out.push(BoundReport::new("binomial-growth", &[("m", mf), ("n", nf)], bound, exact, Relation::AtMost));
        }
    }
    out
}

/// `min_{x>0} [x log 2 - 2q log x] ≥ 2q(1 - log 3q)` for `q ∈ {0.1, …, 10}`.
///
/// The measured value is the smaller of a dense log-spaced grid minimum and
/// the exact minimum at `x = 2q / log 2`.
fn log_minimum() -> Vec<BoundReport> {
    let grid: Vec<f64> = (0..=40_000).map(|k| 10f64.powf(-4.0 + k as f64 * 1e-4)).collect();
    (1..=100)
        .map(|k| {
            let q = k as f64 / 10.0;
            let f = |x: f64| LN_2 * x - 2.0 * q * x.ln();
            let grid_min = grid.iter().map(|&x| f(x)).fold(f64::INFINITY, f64::min);
            let measured = grid_min.min(f(2.0 * q / LN_2));
            let bound = 2.0 * q * (1.0 - (3.0 * q).ln());
            BoundReport::new("log-minimum", &[("q", q)], bound, measured, Relation::AtLeast)
        })
        .collect()
}

/// `2^{3 - d^ε} ≤ 8 (3q)^{2q} / (e^{2q} d^{2qε})` on `d ∈ 1..=100`,
/// `ε ∈ {0.1, …, 0.9}`, `q ∈ {0.5, …, 10}`.
fn power_versus_exponential() -> Vec<BoundReport> {
    let mut out = Vec::new();
    for d in 1..=100u32 {
        for ke in 1..=9 {
            let eps = ke as f64 / 10.0;
            for kq in 1..=20 {
                let q = kq as f64 / 2.0;
                let df = d as f64;
                let lhs = 2f64.powf(3.0 - df.powf(eps));
                let rhs = 8.0 * (3.0 * q).powf(2.0 * q) / (E.powf(2.0 * q) * df.powf(2.0 * q * eps));
                out.push(BoundReport::new(
                    "power-vs-exponential",
                    &[("d", df), ("eps", eps), ("q", q)],
                    rhs,
                    lhs,
                    Relation::AtMost,
                ));
            }
        }
    }
    out
}
