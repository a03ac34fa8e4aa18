use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, LowerTriangular};
use crate::points::PointSet;
use crate::polybasis::MonomialBasis;

/// Where a moment matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Empirical { n: usize },
    Analytic { measure: String },
}

/// Gram matrix `∫ v vᵀ dμ` of the monomial basis under some measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    entries: DMatrix<f64>,
    provenance: Provenance,
}

impl MomentMatrix {
    pub fn new(entries: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if !entries.is_square() {
            return Err(invalid("moment matrix must be square"));
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid(format!("moment matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(MomentMatrix { entries, provenance })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// `T M Tᵀ`, the same moments expressed in the basis with coefficient rows `T`.
    pub fn transformed(&self, t: &DMatrix<f64>) -> Result<MomentMatrix> {
        if t.ncols() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: t.ncols() });
        }
        let mut m = t * &self.entries * t.transpose();
        let sym = (&m + m.transpose()) * 0.5;
        m.copy_from(&sym);
        Ok(MomentMatrix { entries: m, provenance: self.provenance.clone() })
    }
}

/// `(1/n) Σ v(X_i) v(X_i)ᵀ`, summed in index order.
pub fn build_moment_matrix(sample: &PointSet, basis: &MonomialBasis) -> Result<MomentMatrix> {
    if sample.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: sample.dim() });
    }
    if sample.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    let s = basis.len();
    let mut acc = DMatrix::<f64>::zeros(s, s);
    let mut v = vec![0.0; s];
    for x in sample.iter() {
        basis.eval_unchecked(x, &mut v);
        for j in 0..s {
            let vj = v[j];
            let mut col = acc.column_mut(j);
            for i in j..s {
                col[i] += v[i] * vj;
            }
        }
    }
    let n = sample.len() as f64;
    for j in 0..s {
        for i in j..s {
            let val = acc[(i, j)] / n;
            acc[(i, j)] = val;
            acc[(j, i)] = val;
        }
    }
    Ok(MomentMatrix { entries: acc, provenance: Provenance::Empirical { n: sample.len() } })
}

/// What to do when a factorization hits a non-positive pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum JitterPolicy {
    Off,
    /// Retry with `λ I` added, `λ = 1e-12 · trace / s`, growing tenfold per try.
    Auto { max_tries: u32 },
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy::Auto { max_tries: 6 }
    }
}

pub(crate) fn initial_jitter(trace: f64, s: usize) -> f64 {
    1e-12 * trace / s as f64
}

/// Cholesky factor of `M` (or of `M + λI` under the auto policy) and the `λ` used.
pub fn factorize(m: &MomentMatrix, policy: JitterPolicy) -> Result<(LowerTriangular, f64)> {
    let first = match cholesky(m.entries(), 0.0) {
        Ok(l) => return Ok((l, 0.0)),
        Err(pivot) => pivot,
    };
    let singular = |pivot| Error::SingularMomentMatrix { size: m.size(), pivot };
    let JitterPolicy::Auto { max_tries } = policy else {
        return Err(singular(first));
    };
    let mut lambda = initial_jitter(m.trace(), m.size());
    let mut last = first;
    for _ in 0..max_tries {
        match cholesky(m.entries(), lambda) {
            Ok(l) => return Ok((l, lambda)),
            Err(pivot) => last = pivot,
        }
        lambda *= 10.0;
    }
    Err(singular(last))
}

/// `T = L⁻¹` for `M = L Lᵀ`; row `j` holds the monomial coefficients of the
/// `j`-th orthonormal polynomial.
pub fn orthonormal_transform(m: &MomentMatrix) -> Result<DMatrix<f64>> {
    let (l, _) = factorize(m, JitterPolicy::Off)?;
    Ok(l.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polybasis::enumerate_basis;

    fn pts(dim: usize, c: &[f64]) -> PointSet {
        PointSet::new(dim, c.to_vec()).unwrap()
    }

    #[test]
    fn two_point_moments() {
        let m = build_moment_matrix(&pts(1, &[-1.0, 1.0]), &enumerate_basis(1, 1).unwrap()).unwrap();
        assert_eq!(m.entries(), &DMatrix::identity(2, 2));
        assert_eq!(m.provenance(), &Provenance::Empirical { n: 2 });
    }

    #[test]
    fn degree_zero_is_mass() {
        let m = build_moment_matrix(&pts(2, &[0.3, 4.0, -2.0, 1.0, 7.0, 7.0]), &enumerate_basis(2, 0).unwrap())
            .unwrap();
        assert_eq!(m.entries(), &DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn single_point_is_rank_one() {
        let b = enumerate_basis(2, 2).unwrap();
        let x = [0.5, -2.0];
        let m = build_moment_matrix(&pts(2, &x), &b).unwrap();
        let v = nalgebra::DVector::from_vec(b.eval(&x).unwrap());
        assert_eq!(m.entries(), &(&v * v.transpose()));
        assert!(matches!(factorize(&m, JitterPolicy::Off), Err(Error::SingularMomentMatrix { size: 6, .. })));
    }

    #[test]
    fn empty_sample_is_rejected() {
        let b = enumerate_basis(2, 1).unwrap();
        assert!(build_moment_matrix(&PointSet::empty(2).unwrap(), &b).is_err());
        assert!(build_moment_matrix(&pts(1, &[1.0]), &b).is_err());
    }

    #[test]
    fn factorize_examples() {
        let id = MomentMatrix::new(DMatrix::identity(4, 4), Provenance::Empirical { n: 1 }).unwrap();
        let (l, j) = factorize(&id, JitterPolicy::Off).unwrap();
        assert_eq!(l.to_matrix(), DMatrix::identity(4, 4));
        assert_eq!(j, 0.0);

        let legendre = MomentMatrix::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 3.0]),
            Provenance::Analytic { measure: "uniform[-1,1]".into() },
        )
        .unwrap();
        let (l, _) = factorize(&legendre, JitterPolicy::Off).unwrap();
        assert!((l.get(1, 1) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let t = orthonormal_transform(&legendre).unwrap();
        assert!((t[(1, 1)] - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(t[(0, 0)], 1.0);
        let back = legendre.transformed(&t).unwrap();
        assert!((back.entries() - DMatrix::identity(2, 2)).abs().max() < 1e-10);
        assert_eq!(orthonormal_transform(&id).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn auto_jitter_recovers_rank_deficient_matrix() {
        let b = enumerate_basis(2, 2).unwrap();
        let m = build_moment_matrix(&pts(2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]), &b).unwrap();
        assert!(factorize(&m, JitterPolicy::Off).is_err());
        let (l, jitter) = factorize(&m, JitterPolicy::Auto { max_tries: 6 }).unwrap();
        assert!(jitter > 0.0);
        assert_eq!(l.size(), 6);
        assert!(orthonormal_transform(&m).is_err());
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(MomentMatrix::new(m, Provenance::Empirical { n: 1 }).is_err());
    }

    #[test]
    fn moments_are_bit_reproducible() {
        let b = enumerate_basis(2, 4).unwrap();
        let c: Vec<f64> = (0..400).map(|i| ((i as f64) * 0.7368).sin()).collect();
        let a = build_moment_matrix(&pts(2, &c), &b).unwrap();
        let again = build_moment_matrix(&pts(2, &c), &b).unwrap();
        assert!(a.entries().iter().zip(again.entries().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
