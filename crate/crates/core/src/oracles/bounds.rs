use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measures::{gegenbauer_boundary_kernel, AnalyticChristoffel};
use crate::christoffel::MomentMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::symmetric_operator_norm;
use crate::polybasis::basis_size;
use crate::thresholding::{c_r_constant, omega_p};

/// Direction of the inequality a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `measured ≤ bound`.
    AtMost,
    /// `measured ≥ bound`.
    AtLeast,
}

/// One evaluation of a bound against the quantity it controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub bound: f64,
    pub measured: f64,
    pub relation: Relation,
    pub satisfied: bool,
    /// Distance to violation; negative when violated.
    pub slack: f64,
}

impl BoundReport {
    pub fn new(name: &str, inputs: &[(&str, f64)], bound: f64, measured: f64, relation: Relation) -> Self {
        let slack = match relation {
            Relation::AtMost => bound - measured,
            Relation::AtLeast => measured - bound,
        };
        BoundReport {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            bound,
            measured,
            relation,
            satisfied: slack >= 0.0,
            slack,
        }
    }
}

/// Upper bound on `Λ` at distance `δ` outside the support: `2^{3 - δd/(δ + diam)}`.
pub fn outside_upper_bound(delta: f64, diameter: f64, d: u32) -> Result<f64> {
    if !(delta > 0.0) || !(diameter > 0.0) {
        return Err(invalid("delta and diameter must be positive"));
    }
    Ok(2f64.powf(3.0 - delta * d as f64 / (delta + diameter)))
}

fn ratio_cubic(d: f64, p: f64) -> f64 {
    (d + 1.0) * (d + 2.0) * (d + 3.0) / ((d + p + 1.0) * (d + p + 2.0) * (2.0 * d + p + 6.0))
}

/// Lower bound on `Λ` at a point whose `δ`-ball lies in the support.
pub fn inside_lower_bound(delta: f64, p: usize, r: f64, c: f64, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::OutOfHypothesis { what: "inside lower bound", d, min: 2 });
    }
    if !(delta > 0.0) || !(c > 0.0) || !(r >= 0.0) {
        return Err(invalid("delta and C must be positive, r nonnegative"));
    }
    let pr = p as f64 + r;
    let s = basis_size(p, d)? as f64;
    Ok(c * omega_p(p) * delta.powf(pr) / 2f64.powf(pr) / s * ratio_cubic(d as f64, p as f64))
}

/// Upper bound `m(d)` on `sup_{x ∈ S} κ(x, x)`.
pub fn sup_kernel_bound(d: u32, p: usize, r: f64, c: f64, rolling_radius: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::OutOfHypothesis { what: "sup kernel bound", d, min: 2 });
    }
    if !(c > 0.0) || !(rolling_radius > 0.0) || !(r >= 0.0) {
        return Err(invalid("C and R must be positive, r nonnegative"));
    }
    let pr = p as f64 + r;
    let s = basis_size(p, d)? as f64;
    let rr = rolling_radius.powf(pr);
    let interior = 4f64.powf(pr) * s / (c * omega_p(p) * rr) / ratio_cubic(d as f64, p as f64);
    let boundary =
        2f64.powf(p as f64 + 2.0 * r) * c_r_constant(p, r) / (c * rr) * gegenbauer_boundary_kernel(p, d, r);
    Ok(interior + boundary)
}

/// `max(√(16m/(3n) log(s/α)), 16m/(3n) log(s/α))`.
pub fn concentration_bound(m: f64, n: u64, s: usize, alpha: f64) -> Result<f64> {
    if !(m > 0.0) || n == 0 || s == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("need m > 0, n ≥ 1, s ≥ 1 and alpha in (0, 1)"));
    }
    Ok(concentration_bound_unchecked(m, n as f64, s as f64 / alpha))
}

pub(crate) fn concentration_bound_unchecked(m: f64, n: f64, s_over_alpha: f64) -> f64 {
    let t = 16.0 * m / (3.0 * n) * s_over_alpha.ln();
    t.sqrt().max(t)
}

/// `‖M - I‖` in operator norm; `M` must be expressed in a basis orthonormal
/// for the population measure.
pub fn technical_gap(m: &MomentMatrix) -> f64 {
    let s = m.size();
    symmetric_operator_norm(&(m.entries() - DMatrix::identity(s, s)))
}

/// Deterministic sweeps of the interior, exterior and supremum bounds against
/// the exact Christoffel functions of the ball measures.
pub fn bound_sandwich_suite() -> Result<Vec<BoundReport>> {
    let mut jobs = Vec::new();
    for p in 1..=3usize {
        for r in 0..=2u32 {
            for d in 1..=8u32 {
                jobs.push((p, r, d));
            }
        }
    }
    let chunks: Vec<Result<Vec<BoundReport>>> = jobs.par_iter().map(|&(p, r, d)| sweep(p, r, d)).collect();
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn sweep(p: usize, r: u32, d: u32) -> Result<Vec<BoundReport>> {
    let rf = r as f64;
    let model = AnalyticChristoffel::new(p, d, rf)?;
    let c = c_r_constant(p, rf);
    let diag: Vec<f64> = vec![1.0 / (p as f64).sqrt(); p];
    let mut e1 = vec![0.0; p];
    e1[0] = 1.0;
    let mut out = Vec::new();
    let base = |delta: f64, dir: usize| [("p", p as f64), ("r", rf), ("d", d as f64), ("delta", delta), ("direction", dir as f64)];

    for &delta in &[0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0] {
        for (k, u) in [&e1, &diag].into_iter().enumerate() {
            let x: Vec<f64> = u.iter().map(|v| v * (1.0 + delta)).collect();
            out.push(BoundReport::new(
                "outside-upper",
                &base(delta, k),
                outside_upper_bound(delta, 2.0, d)?,
                model.christoffel(&x)?,
                Relation::AtMost,
            ));
        }
    }

    if d >= 2 && p <= 2 {
        for &delta in &[1.0, 0.75, 0.5, 0.25] {
            for (k, u) in [&e1, &diag].into_iter().enumerate() {
                let x: Vec<f64> = u.iter().map(|v| v * (1.0 - delta)).collect();
                out.push(BoundReport::new(
                    "inside-lower",
                    &base(delta, k),
                    inside_lower_bound(delta, p, rf, c, d)?,
                    model.christoffel(&x)?,
                    Relation::AtLeast,
                ));
            }
        }
    }

    if d >= 2 {
        let mut worst = 0.0f64;
        for x in ball_grid(p) {
            worst = worst.max(model.kernel_diag(&x)?);
        }
        out.push(BoundReport::new(
            "sup-kernel",
            &[("p", p as f64), ("r", rf), ("d", d as f64), ("C", c), ("R", 1.0)],
            sup_kernel_bound(d, p, rf, c, 1.0)?,
            worst,
            Relation::AtMost,
        ));
    }
    Ok(out)
}

/// Dense points of the closed unit ball: a Cartesian grid of the interior
/// plus a quasi-uniform set on the sphere.
pub(crate) fn ball_grid(p: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let per_axis = match p {
        1 => 2001usize,
        2 => 101,
        _ => 31,
    };
    let step = 2.0 / (per_axis - 1) as f64;
    let total = per_axis.pow(p as u32);
    for code in 0..total {
        let mut c = code;
        let x: Vec<f64> = (0..p)
            .map(|_| {
                let i = c % per_axis;
                c /= per_axis;
                -1.0 + i as f64 * step
            })
            .collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            pts.push(x);
        }
    }
    match p {
        1 => {}
        2 => pts.extend((0..720).map(|k| {
            let t = k as f64 * std::f64::consts::TAU / 720.0;
            vec![t.cos(), t.sin()]
        })),
        3 => {
            let m = 2000;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            pts.extend((0..m).map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                let rho = (1.0 - z * z).sqrt();
                let t = golden * k as f64;
                vec![rho * t.cos(), rho * t.sin(), z]
            }));
        }
        _ => {}
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn outside_examples() {
        assert_eq!(outside_upper_bound(1.0, 1.0, 6).unwrap(), 1.0);
        assert_eq!(outside_upper_bound(0.3, 2.0, 0).unwrap(), 8.0);
        for d in 0..20 {
            assert!(outside_upper_bound(0.5, 1.0, d + 1).unwrap() < outside_upper_bound(0.5, 1.0, d).unwrap());
            assert!(outside_upper_bound(0.6, 1.0, d + 1).unwrap() < outside_upper_bound(0.5, 1.0, d + 1).unwrap());
        }
        assert!(outside_upper_bound(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn inside_examples() {
        let v = inside_lower_bound(1.0, 1, 0.0, 0.5, 2).unwrap();
        assert!((v - PI.sqrt() / 11.0).abs() < 1e-14);
        assert!(v <= 4.0 / 9.0);
        assert!(matches!(inside_lower_bound(1.0, 1, 0.0, 0.5, 1), Err(Error::OutOfHypothesis { .. })));
    }

    // Second transcription of the sup bound, written from the display.
    fn sup_again(d: f64, p: f64, r: f64, c: f64, rr: f64) -> f64 {
        let binom = |n: f64, k: f64| libm::tgamma(n + 1.0) / (libm::tgamma(k + 1.0) * libm::tgamma(n - k + 1.0));
        let s = binom(d + p, d);
        let omega = 2.0 * PI.powf((p + 1.0) / 2.0) / libm::tgamma(p / 2.0 + 1.0);
        let cr = libm::tgamma(p / 2.0 + r + 1.0) / (PI.powf(p / 2.0) * libm::tgamma(r + 1.0));
        4f64.powf(p + r) * s / (c * omega * rr.powf(p + r)) * (d + p + 1.0) * (d + p + 2.0) * (2.0 * d + p + 6.0)
            / ((d + 1.0) * (d + 2.0) * (d + 3.0))
            + 2f64.powf(p + 2.0 * r) * cr / (c * rr.powf(p + r))
                * (2.0 * binom(p + d + 2.0 * r + 1.0, d) - binom(p + d + 2.0 * r, d))
    }

    #[test]
    fn sup_bound_dual_transcription() {
        for (d, p, r, c, rr) in [(2u32, 1usize, 0.0, 0.5, 1.0), (5, 2, 1.0, 0.3, 0.7), (8, 3, 2.0, 2.0, 1.5)] {
            let a = sup_kernel_bound(d, p, r, c, rr).unwrap();
            let b = sup_again(d as f64, p as f64, r, c, rr);
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
        assert!(sup_kernel_bound(1, 1, 0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn sup_bound_growth_order() {
        for (p, r) in [(1usize, 0u32), (2, 0), (1, 1), (2, 1)] {
            let rf = r as f64;
            let c = c_r_constant(p, rf);
            let ratio = sup_kernel_bound(64, p, rf, c, 1.0).unwrap() / sup_kernel_bound(32, p, rf, c, 1.0).unwrap();
            let want = 2f64.powi(p as i32 + 2 * r as i32 + 1);
            assert!((ratio / want - 1.0).abs() < 0.2, "p={p} r={r}: {ratio} vs {want}");
        }
    }

    #[test]
    fn sup_bound_dominates_boundary_value() {
        for p in 1..=3 {
            for d in 2..=8 {
                let b = sup_kernel_bound(d, p, 0.0, c_r_constant(p, 0.0), 1.0).unwrap();
                assert!(b >= gegenbauer_boundary_kernel(p, d, 0.0));
            }
        }
    }

    #[test]
    fn concentration_examples() {
        let b = concentration_bound_unchecked(3.0, 16.0, std::f64::consts::E);
        assert!((b - 1.0).abs() < 1e-15);
        let a = concentration_bound(1.0, 1_000_000, 100, 0.05).unwrap();
        assert!((a - 6.37e-3).abs() < 1e-5);
        let twice = concentration_bound(1.0, 2_000_000, 100, 0.05).unwrap();
        assert!((twice / a - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(concentration_bound(1.0, 10, 5, 1.0).is_err());
    }

    #[test]
    fn gap_examples() {
        use crate::christoffel::Provenance;
        let id = MomentMatrix::new(DMatrix::identity(3, 3), Provenance::Empirical { n: 1 }).unwrap();
        assert_eq!(technical_gap(&id), 0.0);
        let m = MomentMatrix::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.3])),
            Provenance::Empirical { n: 1 },
        )
        .unwrap();
        assert!((technical_gap(&m) - 0.3).abs() < 1e-15);
    }
}
