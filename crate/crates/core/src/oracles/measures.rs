use nalgebra::DMatrix;

use crate::christoffel::{factorize, JitterPolicy, MomentMatrix, Provenance};
use crate::error::{invalid, Error, Result};
use crate::linalg::LowerTriangular;
use crate::polybasis::{binomial, generalized_binomial, MonomialBasis, MultiIndex};
use crate::thresholding::c_r_constant;

/// The probability measure with density `c_r (1 - ‖z‖²)^r` on the unit ball of `R^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallJacobiMeasure {
    dim: usize,
    exponent: u32,
}

impl BallJacobiMeasure {
    /// Only integer exponents have closed-form moments here.
    pub fn new(p: usize, r: f64) -> Result<Self> {
        if p == 0 {
            return Err(invalid("dimension p must be at least 1"));
        }
        if !(r >= 0.0) || r.fract() != 0.0 || r > u32::MAX as f64 {
            return Err(Error::UnsupportedExponent(r));
        }
        Ok(BallJacobiMeasure { dim: p, exponent: r as u32 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn density_constant(&self) -> f64 {
        c_r_constant(self.dim, self.exponent as f64)
    }

    pub fn density(&self, z: &[f64]) -> f64 {
        let sq: f64 = z.iter().map(|v| v * v).sum();
        if sq > 1.0 {
            0.0
        } else {
            self.density_constant() * (1.0 - sq).powi(self.exponent as i32)
        }
    }

    pub fn id(&self) -> String {
        format!("ball-jacobi(p={}, r={})", self.dim, self.exponent)
    }
}

/// `∫ z^α dν_r`.
///
/// Zero unless every exponent is even. For `α = 2β` it equals
/// `Π_i (2β_i - 1)!! / Π_{j<|β|} (p + 2r + 2 + 2j)`, which follows from
/// integrating in polar coordinates: the sphere part gives a ratio of Gamma
/// functions of the half-exponents, the radial part a Beta integral.
pub fn ball_jacobi_moment(alpha: &MultiIndex, measure: &BallJacobiMeasure) -> Result<f64> {
    if alpha.dim() != measure.dim {
        return Err(Error::DimensionMismatch { expected: measure.dim, found: alpha.dim() });
    }
    if alpha.exponents().iter().any(|e| e % 2 == 1) {
        return Ok(0.0);
    }
    // Pair numerator and denominator factors so the running product stays near 1.
    let mut numer: Vec<f64> = Vec::new();
    for &e in alpha.exponents() {
        let half = e / 2;
        numer.extend((0..half).map(|k| 2.0 * k as f64 + 1.0));
    }
    numer.sort_by(f64::total_cmp);
    let base = measure.dim as f64 + 2.0 * measure.exponent as f64 + 2.0;
    Ok(numer.iter().enumerate().map(|(j, a)| a / (base + 2.0 * j as f64)).product())
}

/// Moment matrix of `ν_r` in the monomial basis of degree `d`.
pub fn analytic_moment_matrix(p: usize, d: u32, r: f64) -> Result<MomentMatrix> {
    let measure = BallJacobiMeasure::new(p, r)?;
    let basis = MonomialBasis::new(p, d)?;
    moment_matrix_for(&measure, &basis)
}

fn moment_matrix_for(measure: &BallJacobiMeasure, basis: &MonomialBasis) -> Result<MomentMatrix> {
    let s = basis.len();
    let idx = basis.indices();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..=i {
            let v = ball_jacobi_moment(&idx[i].add(&idx[j])?, measure)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    MomentMatrix::new(m, Provenance::Analytic { measure: measure.id() })
}

/// The Christoffel function of `ν_r`, factorized once for repeated evaluation.
#[derive(Debug, Clone)]
pub struct AnalyticChristoffel {
    measure: BallJacobiMeasure,
    basis: MonomialBasis,
    moments: MomentMatrix,
    factor: LowerTriangular,
}

impl AnalyticChristoffel {
    pub fn new(p: usize, d: u32, r: f64) -> Result<Self> {
        let measure = BallJacobiMeasure::new(p, r)?;
        let basis = MonomialBasis::new(p, d)?;
        let moments = moment_matrix_for(&measure, &basis)?;
        let (factor, _) = factorize(&moments, JitterPolicy::Off)?;
        Ok(AnalyticChristoffel { measure, basis, moments, factor })
    }

    pub fn measure(&self) -> &BallJacobiMeasure {
        &self.measure
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn moments(&self) -> &MomentMatrix {
        &self.moments
    }

    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    /// Rows are the monomial coefficients of the orthonormal polynomials of `ν_r`.
    pub fn orthonormal_transform(&self) -> DMatrix<f64> {
        self.factor.inverse()
    }

    pub fn kernel_diag(&self, x: &[f64]) -> Result<f64> {
        let mut v = self.basis.eval(x)?;
        self.factor.forward_solve(&mut v);
        Ok(v.iter().map(|t| t * t).sum())
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.kernel_diag(x)?)
    }
}

/// `Λ_{ν_r,d}(x)` from the exact moment matrix.
pub fn christoffel_analytic(p: usize, d: u32, r: f64, x: &[f64]) -> Result<f64> {
    AnalyticChristoffel::new(p, d, r)?.christoffel(x)
}

/// `κ_{ν_r,d}(x, x)` on the unit sphere: `2 binom(p+d+2r+1, d) - binom(p+d+2r, d)`.
pub fn gegenbauer_boundary_kernel(p: usize, d: u32, r: f64) -> f64 {
    let a = p as f64 + d as f64 + 2.0 * r;
    2.0 * generalized_binomial(a + 1.0, d) - generalized_binomial(a, d)
}

/// The boundary kernel in exact integers, once with lower index `d` and once
/// with the complementary lower index `p + 2r + 1` (resp. `p + 2r`). The two
/// spellings are equal; `None` on overflow.
pub fn boundary_kernel_spellings(p: u64, d: u64, r: u64) -> Option<(u128, u128)> {
    let top = p + d + 2 * r;
    let by_degree = 2 * binomial(top + 1, d)? - binomial(top, d)?;
    let by_complement = 2 * binomial(top + 1, p + 2 * r + 1)? - binomial(top, p + 2 * r)?;
    Some((by_degree, by_complement))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec()).unwrap()
    }

    // Adaptive Simpson on [a, b] to absolute tolerance `tol`.
    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    fn quad_moment(p: usize, r: u32, alpha: &[u32]) -> f64 {
        let c = c_r_constant(p, r as f64);
        match p {
            1 => adaptive(&|x: f64| c * x.powi(alpha[0] as i32) * (1.0 - x * x).powi(r as i32), -1.0, 1.0, 1e-13),
            2 => {
                // The angular integrand is periodic, so a single Simpson panel
                // over the full period can look converged when it is not.
                let step = 2.0 * std::f64::consts::PI / 7.0;
                let inner = |rho: f64| {
                    let g = |t: f64| (rho * t.cos()).powi(alpha[0] as i32) * (rho * t.sin()).powi(alpha[1] as i32);
                    let ring: f64 = (0..7).map(|k| adaptive(&g, k as f64 * step, (k + 1) as f64 * step, 1e-14)).sum();
                    ring * c * (1.0 - rho * rho).powi(r as i32) * rho
                };
                adaptive(&inner, 0.0, 1.0, 1e-12)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for p in 1..=2usize {
            for r in 0..=2u32 {
                let m = BallJacobiMeasure::new(p, r as f64).unwrap();
                for alpha in MonomialBasis::new(p, 6).unwrap().indices() {
                    let exact = ball_jacobi_moment(alpha, &m).unwrap();
                    let quad = quad_moment(p, r, alpha.exponents());
                    assert!((exact - quad).abs() < 1e-8, "p={p} r={r} alpha={alpha:?}: {exact} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn moment_examples() {
        let m = BallJacobiMeasure::new(1, 0.0).unwrap();
        assert_eq!(ball_jacobi_moment(&mi(&[0]), &m).unwrap(), 1.0);
        assert!((ball_jacobi_moment(&mi(&[2]), &m).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(ball_jacobi_moment(&mi(&[3]), &m).unwrap(), 0.0);
        let m2 = BallJacobiMeasure::new(2, 0.0).unwrap();
        assert_eq!(ball_jacobi_moment(&mi(&[2, 0]), &m2).unwrap(), 0.25);
        assert_eq!(ball_jacobi_moment(&mi(&[1, 2]), &m2).unwrap(), 0.0);
        assert!(BallJacobiMeasure::new(2, 0.5).is_err());
        assert!(matches!(analytic_moment_matrix(2, 2, 1.5), Err(Error::UnsupportedExponent(_))));
    }

    #[test]
    fn analytic_matrices() {
        let m = analytic_moment_matrix(1, 1, 0.0).unwrap();
        assert!((m.entries() - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 3.0])).abs().max() < 1e-16);
        let m = analytic_moment_matrix(2, 1, 0.0).unwrap();
        assert_eq!(m.entries(), &DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.25, 0.25])));
        for (p, d, r) in [(2, 4, 1.0), (3, 3, 2.0)] {
            let m = analytic_moment_matrix(p, d, r).unwrap();
            assert!(m.entries().clone().symmetric_eigenvalues().min() > 0.0);
        }
    }

    #[test]
    fn monte_carlo_disk_second_moment() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (mut acc, mut n) = (0.0, 0);
        while n < 200_000 {
            let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if x * x + y * y <= 1.0 {
                acc += x * x;
                n += 1;
            }
        }
        assert!((acc / n as f64 - 0.25).abs() < 1e-3);
    }

    #[test]
    fn legendre_spot_values() {
        assert!((christoffel_analytic(1, 1, 0.0, &[0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((christoffel_analytic(1, 1, 0.0, &[1.0]).unwrap() - 0.25).abs() < 1e-12);
        assert!((christoffel_analytic(1, 2, 0.0, &[0.0]).unwrap() - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_kernel_examples() {
        assert_eq!(gegenbauer_boundary_kernel(1, 1, 0.0), 4.0);
        assert_eq!(gegenbauer_boundary_kernel(1, 0, 0.0), 1.0);
        assert_eq!(gegenbauer_boundary_kernel(2, 2, 0.0), 14.0);
        let k = AnalyticChristoffel::new(2, 2, 0.0).unwrap().kernel_diag(&[1.0, 0.0]).unwrap();
        assert!((k - 14.0).abs() < 1e-10);
        assert_eq!(boundary_kernel_spellings(2, 2, 0), Some((14, 14)));
    }

    #[test]
    fn rotational_symmetry() {
        let a = AnalyticChristoffel::new(2, 5, 1.0).unwrap();
        for k in 0..24 {
            let t = k as f64 * 0.2618 + 0.1;
            for rad in [0.0, 0.3, 0.9, 1.4] {
                let u = a.christoffel(&[rad * t.cos(), rad * t.sin()]).unwrap();
                let v = a.christoffel(&[rad, 0.0]).unwrap();
                assert!((u - v).abs() <= 1e-9 * v);
            }
        }
    }
}
