//! The constants of the degree/threshold selection scheme, the practical
//! degree rule, and support estimates as Christoffel sublevel sets.
//!
//! With rate slack `ε` and risk `α`, the scheme picks
//!
//! ```text
//! d_n = ⌊(C R^{p+r} n / (4 C_{p,r,α}))^{1/(p+2r+2)}⌋
//! γ_n = 12 · K^{e/ε} / d_n^e,   e = p(2-ε) + (1-ε) r,   K = 3e / (2εe₀)
//! ```
//!
//! where `e₀` is Euler's number. `C_{p,r,α}` contains `exp((p+2r+1)²)`, so the
//! sample sizes at which the guarantees apply are astronomical beyond `p = 2`.

use std::f64::consts::{E, PI};

use libm::tgamma;
use serde::{Deserialize, Serialize};

use crate::christoffel::ChristoffelModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundingBox, Raster};
use crate::oracles::sup_kernel_bound;
use crate::points::PointSet;

/// `2 π^{(p+1)/2} / Γ(p/2 + 1)`, the constant written `ω_p` in the bounds.
///
/// This is *not* the area of the unit sphere `S^p`; see [`sphere_area`].
pub fn omega_p(p: usize) -> f64 {
    let p = p as f64;
    2.0 * PI.powf((p + 1.0) / 2.0) / tgamma(p / 2.0 + 1.0)
}

/// Surface area of the unit sphere `S^p ⊂ R^{p+1}`, `2 π^{(p+1)/2} / Γ((p+1)/2)`.
pub fn sphere_area(p: usize) -> f64 {
    let p = p as f64;
    2.0 * PI.powf((p + 1.0) / 2.0) / tgamma((p + 1.0) / 2.0)
}

/// Normalizing constant of the density `(1 - ‖z‖²)^r` on the unit ball of `R^p`.
pub fn c_r_constant(p: usize, r: f64) -> f64 {
    let p = p as f64;
    tgamma(p / 2.0 + r + 1.0) / (PI.powf(p / 2.0) * tgamma(r + 1.0))
}

/// The constant `C_{p,r,α}` that sets the degree growth of the scheme.
pub fn cpra(p: usize, r: f64, alpha: f64) -> Result<f64> {
    if p == 0 {
        return Err(invalid("dimension p must be at least 1"));
    }
    if !(r >= 0.0) {
        return Err(invalid("r must be nonnegative"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha must lie in (0, 1)"));
    }
    let pf = p as f64;
    let a = pf + 2.0 * r + 1.0;
    let first = 2f64.powf(pf + 1.0) * c_r_constant(p, r) * (E / a).powf(a) * (a * a).exp();
    let second = 4f64.powf(pf) * (pf + 2.0) * (pf + 3.0) * (pf + 8.0) / (24.0 * omega_p(p))
        * (E / pf).powf(pf)
        * (pf * pf).exp();
    let tail = pf + pf * (1.0 - pf.ln()) + pf * pf - alpha.ln();
    let value = 4f64.powf(r + 2.0) / 3.0 * (first + second) * tail;
    if !value.is_finite() {
        return Err(Error::Overflow(format!("C_{{p,r,alpha}} at p = {p}, r = {r}")));
    }
    Ok(value)
}

/// Geometry and density constants of the scheme, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SchemeParams {
    p: usize,
    r: f64,
    c: f64,
    rolling_radius: f64,
    eps: f64,
    alpha: f64,
    diameter: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    p: usize,
    r: f64,
    c: f64,
    rolling_radius: f64,
    eps: f64,
    alpha: f64,
    diameter: f64,
}

impl TryFrom<RawParams> for SchemeParams {
    type Error = Error;
    fn try_from(v: RawParams) -> Result<Self> {
        SchemeParams::new(v.p, v.r, v.c, v.rolling_radius, v.eps, v.alpha, v.diameter)
    }
}

impl From<SchemeParams> for RawParams {
    fn from(v: SchemeParams) -> Self {
        RawParams {
            p: v.p,
            r: v.r,
            c: v.c,
            rolling_radius: v.rolling_radius,
            eps: v.eps,
            alpha: v.alpha,
            diameter: v.diameter,
        }
    }
}

impl SchemeParams {
    /// `c` is the density constant (`L(δ) ≥ c δ^r`), `rolling_radius` the
    /// radius of the ball rolling inside and outside the support.
    pub fn new(
        p: usize,
        r: f64,
        c: f64,
        rolling_radius: f64,
        eps: f64,
        alpha: f64,
        diameter: f64,
    ) -> Result<Self> {
        if p == 0 {
            return Err(invalid("dimension p must be at least 1"));
        }
        let checks = [
            (r >= 0.0 && r.is_finite(), "r must be finite and nonnegative"),
            (c > 0.0 && c.is_finite(), "C must be finite and positive"),
            (rolling_radius > 0.0 && rolling_radius.is_finite(), "R must be finite and positive"),
            (eps > 0.0 && eps < 1.0, "epsilon must lie in (0, 1)"),
            (alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)"),
            (diameter > 0.0 && diameter.is_finite(), "diameter must be finite and positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(invalid(msg));
            }
        }
        Ok(SchemeParams { p, r, c, rolling_radius, eps, alpha, diameter })
    }

    /// Conservative stand-ins when the true constants are unknown: `r = 0`,
    /// `C` a tenth of the uniform density on the box, `R` a tenth of the box
    /// diagonal, and the diagonal as diameter. These are guesses, not estimates.
    pub fn heuristic(bbox: &BoundingBox, eps: f64, alpha: f64) -> Result<Self> {
        let diag = bbox.diagonal();
        SchemeParams::new(bbox.dim(), 0.0, 0.1 / bbox.volume(), 0.1 * diag, eps, alpha, diag)
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn rolling_radius(&self) -> f64 {
        self.rolling_radius
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `e = p(2-ε) + (1-ε) r`, the decay exponent of the threshold in `d`.
    pub fn rate_exponent(&self) -> f64 {
        self.p as f64 * (2.0 - self.eps) + (1.0 - self.eps) * self.r
    }

    /// `3e / (2εe₀)`.
    fn rate_base(&self) -> f64 {
        3.0 * self.rate_exponent() / (2.0 * self.eps * E)
    }

    fn pr(&self) -> f64 {
        self.p as f64 + self.r
    }

    /// `γ_n` as a function of the degree: `12 K^{e/ε} / d^e`.
    pub fn threshold(&self, d: u32) -> f64 {
        let e = self.rate_exponent();
        12.0 * self.rate_base().powf(e / self.eps) / (d as f64).powf(e)
    }

    /// The threshold for a fixed degree with concentration slack `β`:
    /// `8(1+β) K^{e/ε} / d^e`.
    pub fn threshold_with_slack(&self, d: u32, beta: f64) -> f64 {
        let e = self.rate_exponent();
        8.0 * (1.0 + beta) * self.rate_base().powf(e / self.eps) / (d as f64).powf(e)
    }

    /// `E_{p,r,ε}(d, β)`, bounded and decreasing in `d`.
    pub fn e_function(&self, d: f64, beta: f64) -> f64 {
        let p = self.p as f64;
        let pr = self.pr();
        let e = self.rate_exponent();
        let lead = (1.0 + beta) * (p + 2.0) * (p + 3.0) * (p + 8.0) / (3.0 * self.c * (1.0 - beta) * omega_p(self.p));
        lead.powf(1.0 / pr) * self.rate_base().powf(e / (self.eps * pr)) * ((1.0 + p / d).exp() / p).powf(p / pr)
    }

    /// `diam / (d^{1-ε} - 1)`; undefined at `d ≤ 1`.
    pub fn delta1(&self, d: u32) -> Option<f64> {
        let denom = (d as f64).powf(1.0 - self.eps) - 1.0;
        (d >= 2 && denom > 0.0).then(|| self.diameter / denom)
    }

    /// `2 E(d, β) / d^{1-ε}`.
    pub fn delta2(&self, d: u32, beta: f64) -> Option<f64> {
        (d >= 1).then(|| 2.0 / (d as f64).powf(1.0 - self.eps) * self.e_function(d as f64, beta))
    }

    /// Degree from which the error radius is below `R`.
    pub fn degree_floor(&self) -> f64 {
        let inv = 1.0 / (1.0 - self.eps);
        let a = (self.diameter / self.rolling_radius + 1.0).powf(inv);
        let b = (2.0 / self.rolling_radius * self.e_function(1.0, 0.5)).powf(inv);
        2f64.max(a).max(b)
    }

    fn sample_scale(&self) -> f64 {
        self.c * self.rolling_radius.powf(self.pr())
    }

    pub fn n0(&self, cpra: f64) -> f64 {
        let exp = self.p as f64 + 2.0 * self.r + 2.0;
        4.0 * (self.degree_floor() + 1.0).powf(exp) * cpra / self.sample_scale()
    }

    pub fn n1(&self, cpra: f64) -> f64 {
        2f64.powf(self.p as f64 + 2.0 * self.r + 4.0) * cpra / self.sample_scale()
    }
}

/// Everything the scheme derives for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeOutputs {
    pub n: f64,
    pub degree: u32,
    /// `None` when the degree is 0.
    pub threshold: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// `max(δ1, δ2)`, defined from degree 2 on.
    pub delta: Option<f64>,
    pub cpra: f64,
    pub n0: f64,
    pub n1: f64,
    pub degree_floor: f64,
    /// Sup-kernel bound at the selected degree (degree ≥ 2 only).
    pub sup_kernel_bound: Option<f64>,
    /// Degree ≤ 1: the error radius is undefined and the guarantees do not apply.
    pub below_theory: bool,
    pub meets_n0: bool,
    pub meets_n1: bool,
}

/// Applies the scheme at sample size `n`.
pub fn select_scheme(n: u64, params: &SchemeParams) -> Result<SchemeOutputs> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    select_scheme_real(n as f64, params)
}

/// As [`select_scheme`] but with a real sample size, so that the theory can
/// be examined at sizes far beyond any integer type.
pub fn select_scheme_real(n: f64, params: &SchemeParams) -> Result<SchemeOutputs> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(invalid("sample size must be finite and at least 1"));
    }
    let cpra = cpra(params.p, params.r, params.alpha)?;
    let exp = params.p as f64 + 2.0 * params.r + 2.0;
    let base = (params.sample_scale() * n / (4.0 * cpra)).powf(1.0 / exp);
    // Absorb the last-ulp error of the root so exact powers land on their integer.
    let floor = (base * (1.0 + 1e-12)).floor();
    if floor > u32::MAX as f64 {
        return Err(Error::Overflow(format!("degree at n = {n:e}")));
    }
    let degree = floor as u32;
    let threshold = (degree >= 1).then(|| params.threshold(degree));
    let delta1 = params.delta1(degree);
    let delta2 = params.delta2(degree, 0.5);
    let delta = match (delta1, delta2) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let sup = if degree >= 2 {
        Some(sup_kernel_bound(degree, params.p, params.r, params.c, params.rolling_radius)?)
    } else {
        None
    };
    let n0 = params.n0(cpra);
    let n1 = params.n1(cpra);
    Ok(SchemeOutputs {
        n,
        degree,
        threshold,
        delta1,
        delta2,
        delta,
        cpra,
        n0,
        n1,
        degree_floor: params.degree_floor(),
        sup_kernel_bound: sup,
        below_theory: degree <= 1,
        meets_n0: n >= n0,
        meets_n1: n >= n1,
    })
}

/// `⌊2 n^{1/4}⌋`, computed exactly in integers.
pub fn practical_degree(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    // 2 n^{1/4} ≥ d  ⇔  d⁴ ≤ 16 n.
    let target = 16u128 * n as u128;
    let mut d = (2.0 * (n as f64).powf(0.25)).floor() as u128;
    while d.pow(4) > target {
        d -= 1;
    }
    while (d + 1).pow(4) <= target {
        d += 1;
    }
    Ok(d as u32)
}

/// Smallest Christoffel value over `sample`; using it as the threshold keeps
/// every sample point inside the estimate.
pub fn min_score_threshold(model: &ChristoffelModel, sample: &PointSet) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    Ok(model.scores(sample)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// The closed sublevel set `{x : Λ(x) ≥ γ}`.
#[derive(Debug, Clone, Copy)]
pub struct SupportEstimate<'a> {
    model: &'a ChristoffelModel,
    threshold: f64,
}

pub fn estimate_support(model: &ChristoffelModel, gamma: f64) -> Result<SupportEstimate<'_>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("threshold must be finite and positive"));
    }
    Ok(SupportEstimate { model, threshold: gamma })
}

impl<'a> SupportEstimate<'a> {
    pub fn model(&self) -> &'a ChristoffelModel {
        self.model
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.model.christoffel(x)? >= self.threshold)
    }

    /// Membership of every cell center of the grid.
    pub fn rasterize(&self, bbox: &BoundingBox, resolution: &[usize]) -> Result<Raster> {
        if bbox.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch { expected: self.model.dim(), found: bbox.dim() });
        }
        let gamma = self.threshold;
        Raster::from_predicate_with(bbox, resolution, || self.model.evaluator(), |ev, x| {
            ev.christoffel(x).map(|v| v >= gamma).unwrap_or(false)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christoffel::{fit, FitOptions};

    fn params(p: usize, r: f64) -> SchemeParams {
        SchemeParams::new(p, r, c_r_constant(p, r), 1.0, 0.5, 0.5, 2.0).unwrap()
    }

    #[test]
    fn omega_values() {
        assert!((omega_p(2) - 2.0 * PI.powf(1.5)).abs() < 1e-12);
        assert!((omega_p(2) - 11.13665).abs() < 1e-5);
        assert!((omega_p(1) - 4.0 * PI.sqrt()).abs() < 1e-12);
        assert!((omega_p(4) - PI.powf(2.5)).abs() < 1e-12);
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn c_r_values() {
        assert!((c_r_constant(2, 0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((c_r_constant(1, 1.0) - 0.75).abs() < 1e-15);
        assert!((c_r_constant(1, 0.0) - 0.5).abs() < 1e-15);
    }

    // Second transcription, written from the display term by term.
    fn cpra_again(p: usize, r: f64, alpha: f64) -> f64 {
        let p_ = p as f64;
        let k = p_ + 2.0 * r + 1.0;
        let gamma_ratio = tgamma(p_ / 2.0 + r + 1.0) / tgamma(r + 1.0) / PI.powf(p_ / 2.0);
        let omega = 2.0 * PI.powf((p_ + 1.0) / 2.0) / tgamma(p_ / 2.0 + 1.0);
        let t1 = 2f64.powf(p_ + 1.0) * gamma_ratio * (k + k * k - k * k.ln()).exp();
        let t2 = 4f64.powf(p_) * (p_ + 2.0) * (p_ + 3.0) * (p_ + 8.0) / (24.0 * omega)
            * (p_ + p_ * p_ - p_ * p_.ln()).exp();
        4f64.powf(r + 2.0) / 3.0 * (t1 + t2) * (2.0 * p_ - p_ * p_.ln() + p_ * p_ - alpha.ln())
    }

    #[test]
    fn cpra_dual_transcription() {
        for (p, r, a) in [(1, 0.0, 0.5), (1, 1.0, 0.1), (2, 0.0, 0.05), (2, 1.0, 0.5)] {
            let x = cpra(p, r, a).unwrap();
            let y = cpra_again(p, r, a);
            assert!((x - y).abs() <= 1e-12 * x, "p={p} r={r}: {x} vs {y}");
        }
    }

    #[test]
    fn cpra_structure_in_alpha() {
        let bracket = |a: f64| cpra(1, 0.0, a).unwrap() / (3.0 - a.ln());
        assert!((bracket(0.5) - bracket(0.5 / E)).abs() <= 1e-12 * bracket(0.5));
        let diff = cpra(1, 0.0, 0.5 / E).unwrap() - cpra(1, 0.0, 0.5).unwrap();
        assert!((diff - bracket(0.5)).abs() <= 1e-10 * diff);
        let mut prev = 0.0;
        for a in [0.9, 0.5, 0.1, 0.01, 1e-6] {
            let v = cpra(2, 1.0, a).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(matches!(cpra(40, 0.0, 0.5), Err(Error::Overflow(_))));
        assert!(cpra(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn degree_one_exactly_at_unit_ratio() {
        let prm = params(1, 0.0);
        let c = cpra(1, 0.0, 0.5).unwrap();
        let n = 4.0 * c / (prm.c() * prm.rolling_radius().powf(1.0));
        let out = select_scheme_real(n, &prm).unwrap();
        assert_eq!(out.degree, 1);
        assert!(out.below_theory);
        assert!(out.delta1.is_none() && out.delta.is_none());
    }

    #[test]
    fn thresholds_agree_at_half_slack() {
        for (p, r) in [(1, 0.0), (2, 1.0), (3, 2.0)] {
            let prm = params(p, r);
            for d in 1..40 {
                let ratio = prm.threshold(d) / prm.threshold_with_slack(d, 0.5);
                assert!((ratio - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn threshold_times_power_is_constant() {
        let prm = params(2, 1.0);
        let e = prm.rate_exponent();
        let want = 12.0 * ((3.0 * 2.0 * 1.5 + 3.0 * 0.5 * 1.0) / (2.0 * 0.5 * E)).powf(e / 0.5);
        for d in 1..60u32 {
            let v = prm.threshold(d) * (d as f64).powf(e);
            assert!((v - want).abs() <= 1e-10 * want);
            assert!(prm.threshold(d + 1) < prm.threshold(d));
        }
    }

    #[test]
    fn radii_scale_like_power_of_degree() {
        let prm = params(2, 0.0);
        let e1 = prm.delta1(2).unwrap() * (2f64.powf(0.5) - 1.0);
        for d in 2..=50u32 {
            let df = d as f64;
            assert!((prm.delta1(d).unwrap() * (df.powf(0.5) - 1.0) - e1).abs() < 1e-12);
            let k = prm.delta2(d, 0.5).unwrap() * df.powf(0.5) / 2.0 / prm.e_function(df, 0.5);
            assert!((k - 1.0).abs() < 1e-12);
            assert!(prm.e_function(df + 1.0, 0.5) < prm.e_function(df, 0.5));
        }
        assert!(prm.delta1(1).is_none());
    }

    #[test]
    fn degree_monotone_in_n() {
        let prm = params(1, 0.0);
        let mut prev = 0;
        for k in 3..=9 {
            let out = select_scheme(10u64.pow(k), &prm).unwrap();
            assert!(out.degree >= prev);
            prev = out.degree;
        }
        let mut prev = 0;
        for k in 0..200 {
            // Far enough out the degree leaves the u32 range.
            let Ok(out) = select_scheme_real(10f64.powf(k as f64 * 0.25), &prm) else {
                assert!(k > 40);
                break;
            };
            assert!(out.degree >= prev);
            prev = out.degree;
        }
    }

    #[test]
    fn applicability_chain() {
        // n ≥ n0 ⇒ d_n ≥ D ⇒ δ_n ≤ R.
        for (p, r) in [(1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)] {
            let prm = SchemeParams::new(p, r, c_r_constant(p, r), 1.0, 0.5, 0.1, 2.0).unwrap();
            let c = cpra(p, r, 0.1).unwrap();
            let n0 = prm.n0(c);
            for scale in [1.0, 1.5, 10.0, 1e3] {
                let out = select_scheme_real(n0 * scale, &prm).unwrap();
                assert!(out.meets_n0);
                assert!(out.degree as f64 >= out.degree_floor, "p={p} r={r}");
                assert!(out.delta.unwrap() <= prm.rolling_radius());
            }
            assert!(!select_scheme_real(n0 * 0.5, &prm).unwrap().meets_n0);
        }
    }

    #[test]
    fn second_radius_matches_closed_form() {
        let prm = params(2, 1.0);
        let (p, r, eps, c) = (2.0, 1.0, 0.5, prm.c());
        for d in [2u32, 5, 17] {
            let df = d as f64;
            let direct = 2.0 / df.powf(1.0 - eps)
                * ((p + 2.0) * (p + 3.0) * (p + 8.0) / (c * omega_p(2))).powf(1.0 / (p + r))
                * ((3.0 * p * (2.0 - eps) + 3.0 * (1.0 - eps) * r) / (2.0 * eps * E))
                    .powf((p * (2.0 - eps) + (1.0 - eps) * r) / (eps * (p + r)))
                * ((1.0 + p / df).exp() / p).powf(p / (p + r));
            let via_e = prm.delta2(d, 0.5).unwrap();
            assert!((direct - via_e).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn practical_degrees() {
        assert_eq!(practical_degree(10_000).unwrap(), 20);
        assert_eq!(practical_degree(1).unwrap(), 2);
        assert_eq!(practical_degree(625).unwrap(), 10);
        assert_eq!(practical_degree(624).unwrap(), 9);
        assert_eq!(practical_degree(500).unwrap(), 9);
        assert_eq!(practical_degree(32_000).unwrap(), 26);
        assert!(practical_degree(0).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(SchemeParams::new(2, 0.0, 1.0, 1.0, 1.0, 0.5, 1.0).is_err());
        assert!(SchemeParams::new(2, -1.0, 1.0, 1.0, 0.5, 0.5, 1.0).is_err());
        assert!(SchemeParams::new(2, 0.0, 0.0, 1.0, 0.5, 0.5, 1.0).is_err());
        assert!(SchemeParams::new(0, 0.0, 1.0, 1.0, 0.5, 0.5, 1.0).is_err());
        let ok = SchemeParams::new(2, 0.0, 1.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        let text = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<SchemeParams>(&text).unwrap(), ok);
        let bad = text.replace("\"eps\":0.5", "\"eps\":1.5");
        assert!(serde_json::from_str::<SchemeParams>(&bad).is_err());
    }

    #[test]
    fn min_score_and_membership() {
        let pts = PointSet::new(1, vec![-1.0, 1.0]).unwrap();
        let opts = FitOptions { standardize: false, ..FitOptions::default() };
        let m = fit(&pts, 1, &opts).unwrap();
        let g = min_score_threshold(&m, &pts).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        let est = estimate_support(&m, g).unwrap();
        assert!(est.contains(&[-1.0]).unwrap() && est.contains(&[1.0]).unwrap());
        assert!(!est.contains(&[1.5]).unwrap());
        let single = PointSet::new(1, vec![3.0]).unwrap();
        let m0 = fit(&single, 0, &opts).unwrap();
        assert_eq!(min_score_threshold(&m0, &single).unwrap(), 1.0);
        assert!(min_score_threshold(&m, &PointSet::empty(1).unwrap()).is_err());
        assert!(estimate_support(&m, 0.0).is_err());
        assert!(estimate_support(&m, f64::NAN).is_err());
    }

    #[test]
    fn threshold_extremes() {
        let pts: Vec<f64> = (0..300).flat_map(|i| {
            let t = i as f64 * 2.399;
            let rad = ((i as f64 + 0.5) / 300.0).sqrt();
            [rad * t.cos(), rad * t.sin()]
        }).collect();
        let m = fit(&PointSet::new(2, pts).unwrap(), 3, &FitOptions::default()).unwrap();
        let bbox = BoundingBox::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap();
        let empty = estimate_support(&m, 1.0 + 1e-9).unwrap().rasterize(&bbox, &[40, 40]).unwrap();
        assert_eq!(empty.count(), 0);
        let full = estimate_support(&m, 1e-300).unwrap().rasterize(&bbox, &[40, 40]).unwrap();
        assert_eq!(full.count(), 1600);
    }
}
