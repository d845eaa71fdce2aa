//! Small dense linear-algebra helpers shared by the numerical modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric real matrix.
///
/// Construction either checks symmetry ([`SymMatrix::new`]) or enforces it by
/// averaging with the transpose ([`SymMatrix::symmetrize`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

/// Relative tolerance used by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
                what: "symmetric matrix columns",
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "symmetric matrix",
            });
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Returns `(m + mᵀ) / 2`.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `B · self · Bᵀ`, re-symmetrized.
    pub fn congruence(&self, b: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrize(b * &self.0 * b.transpose())
    }

    /// Copy with the main diagonal zeroed.
    pub fn off_diagonal(&self) -> DMatrix<f64> {
        let mut e = self.0.clone();
        e.fill_diagonal(0.0);
        e
    }

    /// Sum of squared off-diagonal entries.
    pub fn off_diagonal_sq(&self) -> f64 {
        off_diagonal_sq(&self.0)
    }
}

impl core::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

pub fn off_diagonal_sq(m: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc
}

/// Joint off-diagonality cost `Σ_k Σ_{i≠j} (V C_k Vᵀ)_{ij}²`.
pub fn joint_off_diagonal_cost(v: &DMatrix<f64>, set: &[SymMatrix]) -> f64 {
    let vt = v.transpose();
    set.iter()
        .map(|c| off_diagonal_sq(&(v * c.as_matrix() * &vt)))
        .sum()
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues in descending order.
/// Column `i` of the returned matrix is the eigenvector for value `i`.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vecs)
}

/// 2-norm condition number via singular values. Infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Normalized Amari index of a square product `P = V·A`.
///
/// Zero exactly when `P` is a scaled permutation; bounded by one.
pub fn amari_index(p: &DMatrix<f64>) -> f64 {
    let n = p.nrows();
    assert_eq!(n, p.ncols(), "Amari index needs a square matrix");
    if n < 2 {
        return 0.0;
    }
    let abs = p.map(f64::abs);
    let mut rows = 0.0;
    for i in 0..n {
        let row = abs.row(i);
        let max = row.max();
        if max > 0.0 {
            rows += row.sum() / max - 1.0;
        } else {
            rows += (n - 1) as f64;
        }
    }
    let mut cols = 0.0;
    for j in 0..n {
        let col = abs.column(j);
        let max = col.max();
        if max > 0.0 {
            cols += col.sum() / max - 1.0;
        } else {
            cols += (n - 1) as f64;
        }
    }
    (rows + cols) / (2.0 * n as f64 * (n as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn amari_zero_for_scaled_permutation() {
        let p = dmatrix![0.0, 3.0, 0.0; -2.0, 0.0, 0.0; 0.0, 0.0, 0.5];
        assert_eq!(amari_index(&p), 0.0);
    }

    #[test]
    fn amari_positive_for_mixing() {
        let p = dmatrix![1.0, 0.5; 0.3, 1.0];
        // rows: 0.5 + 0.3, cols: 0.3 + 0.5, normalized by 2*2*1
        assert!((amari_index(&p) - 1.6 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_check_rejects_asymmetry() {
        assert!(SymMatrix::new(dmatrix![1.0, 2.0; 2.1, 1.0]).is_err());
        assert!(SymMatrix::new(dmatrix![1.0, 2.0; 2.0, 1.0]).is_ok());
    }

    #[test]
    fn eigen_sorted_descending() {
        let (vals, vecs) = sym_eigen_desc(&dmatrix![1.0, 0.0; 0.0, 3.0]);
        assert_eq!(vals, alloc::vec![3.0, 1.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
