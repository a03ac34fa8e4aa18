use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConcentrationSettings, ExperimentConfig, ExperimentKind};
use super::report::{ReportBody, RunReport};
use super::stats::{derive_seed, log_log_slope, median, quantile};
use crate::christoffel::{build_moment_matrix, fit, FitOptions, JitterPolicy, Solver};
use crate::error::{invalid, Error, Result};
use crate::oracles::{concentration_bound, gegenbauer_boundary_kernel, technical_gap, AnalyticChristoffel};
use crate::points::PointSet;

/// Slack for rounding in the deterministic per-replicate inequality.
pub const MAJORANT_SLACK: f64 = 1e-8;

/// `n` i.i.d. draws from `ν_r`, density `c_r (1 - ‖z‖²)^r` on the unit ball.
///
/// The direction is a normalized Gaussian and `‖z‖²` is `Beta(p/2, r+1)`.
pub fn sample_ball_measure(p: usize, r: f64, n: usize, seed: u64) -> Result<PointSet> {
    if p == 0 || !(r >= 0.0 && r.is_finite()) {
        return Err(invalid("need p ≥ 1 and a finite r ≥ 0"));
    }
    let radial = Beta::new(p as f64 / 2.0, r + 1.0).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * p);
    let mut g = vec![0.0; p];
    for _ in 0..n {
        let norm = loop {
            g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        let rho = radial.sample(&mut rng).sqrt();
        coords.extend(g.iter().map(|v| rho * v / norm));
    }
    PointSet::new(p, coords)
}

/// Points of `[-radius, radius]^p` on a regular grid with `per_axis` points
/// per axis, restricted to the ball of that radius.
pub fn ball_evaluation_grid(p: usize, per_axis: usize, radius: f64) -> Vec<Vec<f64>> {
    let step = 2.0 * radius / (per_axis - 1) as f64;
    let total = per_axis.pow(p as u32);
    (0..total)
        .map(|mut code| {
            (0..p)
                .map(|_| {
                    let i = code % per_axis;
                    code /= per_axis;
                    -radius + i as f64 * step
                })
                .collect::<Vec<f64>>()
        })
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    /// `sup |Λ_n - Λ| / Λ` over the grid.
    pub rel_error: f64,
    /// `‖M_n - I‖` in the orthonormal basis of the population measure.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub p: usize,
    pub r: f64,
    pub degree: u32,
    pub n: u64,
    pub basis_size: usize,
    /// Supremum of the population kernel diagonal, attained on the sphere.
    pub m: f64,
    pub bound: f64,
    pub alpha: f64,
    /// Fraction of replicates with `rel_error ≤ bound`.
    pub coverage: f64,
    pub median_rel_error: f64,
    pub q90_rel_error: f64,
    pub max_rel_error: f64,
    pub median_gap: f64,
    /// Replicates with `rel_error > gap + MAJORANT_SLACK`.
    pub majorant_violations: usize,
    pub replicates: Vec<ReplicateOutcome>,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct ConcentrationCsvRow {
    pub p: usize,
    pub r: f64,
    pub degree: u32,
    pub n: u64,
    pub reps: usize,
    pub m: f64,
    pub bound: f64,
    pub coverage: f64,
    pub median_rel_error: f64,
    pub q90_rel_error: f64,
    pub max_rel_error: f64,
    pub median_gap: f64,
    pub majorant_violations: usize,
    pub wall_time_s: f64,
}

impl ConcentrationRow {
    pub fn flat(&self) -> ConcentrationCsvRow {
        ConcentrationCsvRow {
            p: self.p,
            r: self.r,
            degree: self.degree,
            n: self.n,
            reps: self.replicates.len(),
            m: self.m,
            bound: self.bound,
            coverage: self.coverage,
            median_rel_error: self.median_rel_error,
            q90_rel_error: self.q90_rel_error,
            max_rel_error: self.max_rel_error,
            median_gap: self.median_gap,
            majorant_violations: self.majorant_violations,
            wall_time_s: self.wall_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub degree: u32,
    /// Log-log slope of the median relative error against `n`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub grid_points: usize,
    pub rows: Vec<ConcentrationRow>,
    pub slopes: Vec<SlopeFit>,
}

/// One replicate: draw from `ν_r`, fit without standardization, and compare
/// the empirical and exact Christoffel functions on the grid.
pub fn concentration_replicate(
    exact: &AnalyticChristoffel,
    grid: &[Vec<f64>],
    population: &[f64],
    n: usize,
    seed: u64,
) -> Result<ReplicateOutcome> {
    let p = exact.measure().dim();
    let r = exact.measure().exponent() as f64;
    let d = exact.basis().degree();
    let sample = sample_ball_measure(p, r, n, seed)?;
    let opts = FitOptions { standardize: false, jitter: JitterPolicy::Off, solver: Solver::Qr };
    let model = fit(&sample, d, &opts)?;
    let mut ev = model.evaluator();
    let mut rel_error = 0.0f64;
    for (x, lam) in grid.iter().zip(population) {
        rel_error = rel_error.max((ev.christoffel(x)? - lam).abs() / lam);
    }
    let moments = build_moment_matrix(&sample, exact.basis())?;
    let gap = technical_gap(&moments.transformed(&exact.orthonormal_transform())?);
    Ok(ReplicateOutcome { rel_error, gap })
}

fn study_row(s: &ConcentrationSettings, degree: u32, n: u64, base_seed: u64, grid: &[Vec<f64>]) -> Result<ConcentrationRow> {
    let start = Instant::now();
    let exact = AnalyticChristoffel::new(s.p, degree, s.r)?;
    let population: Vec<f64> = grid.iter().map(|x| exact.christoffel(x)).collect::<Result<_>>()?;
    let size = exact.basis().len();
    let m = gegenbauer_boundary_kernel(s.p, degree, s.r);
    let bound = concentration_bound(m, n, size, s.alpha)?;
    let replicates: Vec<ReplicateOutcome> = (0..s.reps as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(base_seed, &[s.p as u64, degree as u64, n, k]);
            concentration_replicate(&exact, grid, &population, n as usize, seed)
        })
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = replicates.iter().map(|o| o.rel_error).collect();
    let gaps: Vec<f64> = replicates.iter().map(|o| o.gap).collect();
    let covered = errs.iter().filter(|&&e| e <= bound).count();
    Ok(ConcentrationRow {
        p: s.p,
        r: s.r,
        degree,
        n,
        basis_size: size,
        m,
        bound,
        alpha: s.alpha,
        coverage: covered as f64 / replicates.len() as f64,
        median_rel_error: median(&errs).ok_or(Error::InsufficientSample { needed: 1, got: 0 })?,
        q90_rel_error: quantile(&errs, 0.9).expect("nonempty"),
        max_rel_error: errs.iter().copied().fold(0.0, f64::max),
        median_gap: median(&gaps).expect("nonempty"),
        majorant_violations: replicates.iter().filter(|o| o.rel_error > o.gap + MAJORANT_SLACK).count(),
        replicates,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Monte-Carlo check of the concentration bound on `ν_r`, where the
/// population Christoffel function is known exactly. The supremum is taken
/// over a grid of the ball of radius `grid_radius`, not the whole support.
pub fn run_concentration_study(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.kind != ExperimentKind::Concentration {
        return Err(invalid("config kind must be concentration"));
    }
    cfg.validate()?;
    let s = cfg.concentration.as_ref().expect("validated");
    let grid = ball_evaluation_grid(s.p, s.grid_per_axis, s.grid_radius);
    let mut ns = cfg.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let base = cfg.seeds[0];
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &d in &s.degrees {
        let block: Vec<ConcentrationRow> =
            ns.iter().map(|&n| study_row(s, d, n, base, &grid)).collect::<Result<_>>()?;
        let x: Vec<f64> = block.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = block.iter().map(|r| r.median_rel_error).collect();
        slopes.push(SlopeFit { degree: d, slope: log_log_slope(&x, &y) });
        rows.extend(block);
    }
    let body = ConcentrationReport { grid_points: grid.len(), rows, slopes };
    Ok(RunReport::new(cfg.clone(), ReportBody::Concentration(body)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::ball_jacobi_moment;
    use crate::polybasis::MultiIndex;

    #[test]
    fn sampler_matches_moments() {
        for (p, r) in [(1usize, 0.0), (2, 0.0), (2, 2.0), (3, 1.0)] {
            let n = 200_000;
            let s = sample_ball_measure(p, r, n, 11).unwrap();
            assert!(s.iter().all(|x| x.iter().map(|v| v * v).sum::<f64>() <= 1.0));
            let measure = crate::oracles::BallJacobiMeasure::new(p, r).unwrap();
            let mut e = vec![0u32; p];
            e[0] = 2;
            let want = ball_jacobi_moment(&MultiIndex::new(e).unwrap(), &measure).unwrap();
            let got = s.iter().map(|x| x[0] * x[0]).sum::<f64>() / n as f64;
            // Var(x²) ≤ 1, so the Monte-Carlo error is below 4/√n.
            assert!((got - want).abs() < 4.0 / (n as f64).sqrt(), "p={p} r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn grid_stays_in_ball() {
        let g = ball_evaluation_grid(2, 50, 0.95);
        assert!(g.len() > 1800 && g.len() < 2000);
        assert_eq!(ball_evaluation_grid(1, 50, 0.95).len(), 50);
    }

    #[test]
    fn majorant_holds_per_replicate() {
        let exact = AnalyticChristoffel::new(2, 3, 0.0).unwrap();
        let grid = ball_evaluation_grid(2, 20, 0.95);
        let pop: Vec<f64> = grid.iter().map(|x| exact.christoffel(x).unwrap()).collect();
        for seed in 0..10 {
            let o = concentration_replicate(&exact, &grid, &pop, 2000, seed).unwrap();
            assert!(o.rel_error <= o.gap + MAJORANT_SLACK, "{o:?}");
            assert!(o.rel_error > 0.0);
        }
    }

    #[test]
    fn study_runs() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Concentration);
        cfg.n_grid = vec![1000, 4000];
        cfg.concentration = Some(ConcentrationSettings {
            p: 1,
            r: 1.0,
            degrees: vec![2],
            reps: 100,
            alpha: 0.1,
            grid_per_axis: 50,
            grid_radius: 0.95,
        });
        let report = run_concentration_study(&cfg).unwrap();
        let ReportBody::Concentration(body) = &report.body else { panic!() };
        assert_eq!(body.rows.len(), 2);
        for row in &body.rows {
            assert_eq!(row.majorant_violations, 0);
            assert!(row.coverage >= 0.9);
        }
        assert!(body.slopes[0].slope.unwrap() < 0.0);
    }
}
