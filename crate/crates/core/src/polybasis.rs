//! Multi-indices and the monomial basis of polynomials of degree at most `d`
//! in `p` variables.
//!
//! The basis is ordered by total degree, and within a degree by descending
//! lexicographic order of the exponent tuple. For `p = 2, d = 2` this is
//! `1, x, y, x², xy, y²`. The order is prefix-stable: the basis of degree `d`
//! is a prefix of the basis of degree `d + 1`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tag written into serialized models to identify the ordering above.
pub const ORDER_TAG: &str = "graded-desc-lex";

/// Exponent tuple `(α_1, …, α_p)` of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(invalid("multi-index must have at least one component"));
        }
        Ok(MultiIndex(exponents))
    }

    pub fn zero(p: usize) -> Self {
        MultiIndex(vec![0; p.max(1)])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise sum; used to index moments of products of monomials.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i at every step.
        let g = gcd(acc, i);
        let num = (n as u128 - k as u128 + i) / (i / g);
        acc = (acc / g).checked_mul(num)?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of monomials of degree at most `d` in `p` variables, `binom(d+p, d)`.
pub fn basis_size(p: usize, d: u32) -> Result<usize> {
    if p == 0 {
        return Err(invalid("dimension p must be at least 1"));
    }
    binomial(d as u64 + p as u64, d as u64)
        .and_then(|s| usize::try_from(s).ok())
        .ok_or(Error::SizeOverflow { p, d })
}

/// Generalized binomial coefficient `a (a-1) … (a-k+1) / k!` for real `a`.
pub fn generalized_binomial(a: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        let i = i as f64;
        acc *= (a - i) / (i + 1.0);
    }
    acc
}

/// The ordered monomial basis of `Π_d^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    dim: usize,
    degree: u32,
    indices: Vec<MultiIndex>,
    // For j > 0: (parent index, coordinate) with α_j = α_parent + e_coordinate.
    steps: Vec<(usize, usize)>,
}

/// Refuses bases with more monomials than this; evaluation buffers and the
/// `s × s` factor would not fit in memory long before.
const MAX_BASIS_SIZE: usize = 1 << 16;

impl MonomialBasis {
    pub fn new(p: usize, d: u32) -> Result<Self> {
        let s = basis_size(p, d)?;
        if s > MAX_BASIS_SIZE {
            return Err(Error::SizeOverflow { p, d });
        }
        let mut indices = Vec::with_capacity(s);
        let mut prefix = Vec::with_capacity(p);
        for k in 0..=d {
            push_degree(p, k, &mut prefix, &mut indices);
        }
        debug_assert_eq!(indices.len(), s);

        let position: HashMap<&[u32], usize> =
            indices.iter().enumerate().map(|(j, a)| (a.exponents(), j)).collect();
        let mut steps = Vec::with_capacity(s);
        steps.push((0, 0));
        let mut parent = vec![0u32; p];
        for alpha in &indices[1..] {
            let coord = alpha.0.iter().position(|&e| e > 0).expect("nonzero index");
            parent.copy_from_slice(&alpha.0);
            parent[coord] -= 1;
            steps.push((position[parent.as_slice()], coord));
        }
        Ok(MonomialBasis { dim: p, degree: d, indices, steps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Writes `v_d(x)` into `out`, which must have length `s(d)`.
    ///
    /// Each monomial is its parent times one coordinate, so a point costs one
    /// multiplication per basis element.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: out.len() });
        }
        self.eval_unchecked(x, out);
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for j in 1..out.len() {
            let (parent, coord) = self.steps[j];
            out[j] = out[parent] * x[coord];
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

// Appends all indices of total degree `k` in descending lexicographic order.
fn push_degree(slots: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if slots == 1 {
        prefix.push(k);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for a in (0..=k).rev() {
        prefix.push(a);
        push_degree(slots - 1, k - a, prefix, out);
        prefix.pop();
    }
}

pub fn enumerate_basis(p: usize, d: u32) -> Result<MonomialBasis> {
    MonomialBasis::new(p, d)
}

pub fn eval_monomials(basis: &MonomialBasis, x: &[f64]) -> Result<Vec<f64>> {
    basis.eval(x)
}
