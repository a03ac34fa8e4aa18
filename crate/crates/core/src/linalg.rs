//! Dense kernels used by the estimator: a packed lower-triangular factor,
//! Cholesky with a relative pivot test, and a row-streamed Householder QR.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Lower-triangular matrix stored row by row, `n(n+1)/2` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl LowerTriangular {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; row_start(n)];
        for i in 0..n {
            data[row_start(i) + i] = 1.0;
        }
        LowerTriangular { n, data }
    }

    /// Builds a factor from packed rows. The diagonal must be strictly positive.
    pub fn from_packed(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != row_start(n) {
            return Err(invalid(format!(
                "packed factor of size {n} needs {} entries, got {}",
                row_start(n),
                data.len()
            )));
        }
        let l = LowerTriangular { n, data };
        if (0..n).any(|i| !(l.get(i, i) > 0.0) || !l.get(i, i).is_finite()) {
            return Err(invalid("factor diagonal must be finite and strictly positive"));
        }
        if l.data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("factor entries must be finite"));
        }
        Ok(l)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[row_start(i) + j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Overwrites `b` with `L⁻¹ b`.
    pub fn forward_solve(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let acc = dot(&row[..i], &b[..i]);
            b[i] = (b[i] - acc) / row[i];
        }
    }

    /// `L⁻¹` as a dense matrix, column by column.
    pub fn inverse(&self) -> DMatrix<f64> {
        let mut inv = DMatrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.forward_solve(&mut e);
            inv.column_mut(j).copy_from_slice(&e);
        }
        inv
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative pivot tolerance for an `n × n` factorization.
pub(crate) fn pivot_tolerance(n: usize) -> f64 {
    16.0 * n.max(1) as f64 * f64::EPSILON
}

/// Cholesky factor of `a + shift·I`, reading only the lower triangle of `a`.
///
/// Fails with the index of the first pivot that is not positive or is below
/// `16 n ε` relative to its diagonal entry.
pub fn cholesky(a: &DMatrix<f64>, shift: f64) -> std::result::Result<LowerTriangular, usize> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
    let tol = pivot_tolerance(n);
    let mut data = vec![0.0; row_start(n)];
    for i in 0..n {
        let ri = row_start(i);
        for j in 0..=i {
            let rj = row_start(j);
            let acc = dot(&data[ri..ri + j], &data[rj..rj + j]);
            if i == j {
                let diag = a[(i, i)] + shift;
                let pivot = diag - acc;
                if !(pivot > tol * diag) || !pivot.is_finite() {
                    return Err(i);
                }
                data[ri + i] = pivot.sqrt();
            } else {
                data[ri + j] = (a[(i, j)] - acc) / data[rj + j];
            }
        }
    }
    Ok(LowerTriangular { n, data })
}

/// Upper-triangular `R` of a tall matrix `A` (with `RᵀR = AᵀA`), built by
/// streaming the rows of `A` through blocked Householder updates.
///
/// Rows are consumed in the order they are pushed, so the result is
/// bit-reproducible for a fixed input order.
#[derive(Debug, Clone)]
pub struct QrAccumulator {
    s: usize,
    r: Vec<f64>,
    // Pending rows, column-major with `cap` slots per column.
    block: Vec<f64>,
    cap: usize,
    filled: usize,
    rows: usize,
}

const BLOCK_ROWS: usize = 256;

impl QrAccumulator {
    pub fn new(s: usize) -> Self {
        QrAccumulator {
            s,
            r: vec![0.0; s * s],
            block: vec![0.0; s * BLOCK_ROWS],
            cap: BLOCK_ROWS,
            filled: 0,
            rows: 0,
        }
    }

    /// Continues from an existing triangular factor; further rows are stacked below it.
    pub fn from_upper(upper: &UpperTriangular) -> Self {
        let mut acc = QrAccumulator::new(upper.s);
        acc.r.copy_from_slice(&upper.r);
        acc.rows = upper.rows;
        acc
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.s);
        for (k, v) in row.iter().enumerate() {
            self.block[k * self.cap + self.filled] = *v;
        }
        self.filled += 1;
        self.rows += 1;
        if self.filled == self.cap {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let (s, cap, b) = (self.s, self.cap, self.filled);
        if b == 0 {
            return;
        }
        for k in 0..s {
            let (head, tail) = self.block.split_at_mut((k + 1) * cap);
            let colk = &head[k * cap..k * cap + b];
            let sigma: f64 = colk.iter().map(|v| v * v).sum();
            if sigma == 0.0 {
                continue;
            }
            let x0 = self.r[k * s + k];
            let norm = (x0 * x0 + sigma).sqrt();
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let v0 = x0 - alpha;
            let vtv = v0 * v0 + sigma;
            for (off, colj) in tail.chunks_exact_mut(cap).enumerate() {
                let j = k + 1 + off;
                let colj = &mut colj[..b];
                let w = v0 * self.r[k * s + j] + dot(colk, colj);
                let f = 2.0 * w / vtv;
                self.r[k * s + j] -= f * v0;
                for (c, v) in colj.iter_mut().zip(colk) {
                    *c -= f * v;
                }
            }
            self.r[k * s + k] = alpha;
        }
        self.filled = 0;
    }

    pub fn finish(mut self) -> UpperTriangular {
        self.flush();
        UpperTriangular { s: self.s, r: self.r, rows: self.rows }
    }
}

/// Result of [`QrAccumulator::finish`]; row-major `s × s`, upper triangle used.
#[derive(Debug, Clone)]
pub struct UpperTriangular {
    s: usize,
    r: Vec<f64>,
    rows: usize,
}

impl UpperTriangular {
    pub fn size(&self) -> usize {
        self.s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > j {
            0.0
        } else {
            self.r[i * self.s + j]
        }
    }

    /// Squared Euclidean norm of column `k` of the original tall matrix.
    pub fn column_norm_sq(&self, k: usize) -> f64 {
        (0..=k).map(|i| self.get(i, k).powi(2)).sum()
    }

    /// Appends the rows `sqrt(shift)·I`, i.e. factors `AᵀA + shift·I`.
    pub fn shifted(&self, shift: f64) -> UpperTriangular {
        let mut acc = QrAccumulator::from_upper(self);
        let root = shift.sqrt();
        let mut row = vec![0.0; self.s];
        for k in 0..self.s {
            row[k] = root;
            acc.push_row(&row);
            row[k] = 0.0;
        }
        let mut out = acc.finish();
        out.rows = self.rows;
        out
    }

    /// `L = Rᵀ · scale` with the signs fixed so that the diagonal is positive.
    ///
    /// Fails with the first column whose diagonal is negligible against the
    /// column norm, which signals numerical rank deficiency.
    pub fn to_lower(&self, scale: f64) -> std::result::Result<LowerTriangular, usize> {
        let s = self.s;
        let tol = pivot_tolerance(s);
        let mut data = vec![0.0; row_start(s)];
        for k in 0..s {
            let rkk = self.get(k, k);
            let norm = self.column_norm_sq(k).sqrt();
            if !(rkk.abs() > tol * norm) || !rkk.is_finite() {
                return Err(k);
            }
            let sign = rkk.signum();
            for i in k..s {
                data[row_start(i) + k] = sign * self.get(k, i) * scale;
            }
        }
        Ok(LowerTriangular { n: s, data })
    }
}

/// Eigenvalues of a symmetric matrix in ascending order, with eigenvectors as columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Spectral norm of a symmetric matrix: its largest absolute eigenvalue.
pub fn symmetric_operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
