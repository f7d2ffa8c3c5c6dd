//! Real-symmetric operators and dense eigen-solves.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Real-symmetric matrix stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianOperator {
    dim: usize,
    data: Vec<f64>,
}

impl HermitianOperator {
    /// Requires exact symmetry.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be ≥ 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, found: data.len() });
        }
        let op = HermitianOperator { dim, data };
        let asym = op.max_asymmetry();
        if asym != 0.0 {
            return Err(Error::Asymmetric(asym));
        }
        if op.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(op)
    }

    /// Averages `(a + aᵀ)/2` without checking.
    pub fn symmetrized(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, found: data.len() });
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let m = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = m;
                data[j * dim + i] = m;
            }
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::Dimension { expected: dim, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    /// Builds from `(row, col, value)` entries; either triangle may be given,
    /// repeated entries accumulate.
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be ≥ 1".into()));
        }
        let mut data = vec![0.0; dim * dim];
        for &(r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::Dimension { expected: dim, found: r.max(c) + 1 });
            }
            data[r * dim + c] += v;
            if r != c {
                data[c * dim + r] += v;
            }
        }
        Self::from_row_major(dim, data)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        let trips: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d, &trips)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `vᵀ H v`.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        self.matvec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Nonzero upper-triangle entries including the diagonal.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Off-diagonal pairs `(k, l)`, `k < l`, with `h_kl ≠ 0`.
    pub fn sparsity(&self) -> Vec<(usize, usize)> {
        self.triplets()
            .into_iter()
            .filter(|&(i, j, _)| i != j)
            .map(|(i, j, _)| (i, j))
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.sparsity().is_empty()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Largest |eigenvalue|.
    pub fn spectral_norm(&self) -> f64 {
        eigenvalues(self).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.to_matrix()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Lowest eigenpair. The vector is normalized and its first component with
/// magnitude above 1e-12 is positive.
pub fn exact_ground(h: &HermitianOperator) -> (f64, Vec<f64>) {
    if h.dim == 1 {
        return (h.data[0], vec![1.0]);
    }
    let eig = SymmetricEigen::new(h.to_matrix());
    let (imin, &emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let mut v: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
    (emin, v)
}

/// Count of eigenvalues below `lambda` for a symmetric tridiagonal matrix
/// (Sturm sequence).
pub fn tridiagonal_count_below(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let o2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - lambda - if i == 0 { 0.0 } else { o2 / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by
/// bisection within `[lo, hi]`.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tridiagonal_count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_ground() {
        let h = HermitianOperator::diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let (e, v) = exact_ground(&h);
        assert_eq!(e, 1.0);
        assert!((v[1] - 1.0).abs() < 1e-14 && v[0].abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetry() {
        let r = HermitianOperator::from_rows(&[vec![1.0, 2.0], vec![2.5, 0.0]]);
        assert!(matches!(r, Err(Error::Asymmetric(_))));
    }

    #[test]
    fn sturm_count_matches_dense() {
        let d = [2.0, -1.0, 0.5, 3.0];
        let o = [0.3, -0.7, 1.1];
        let mut trips = Vec::new();
        for i in 0..4 {
            trips.push((i, i, d[i]));
        }
        for i in 0..3 {
            trips.push((i, i + 1, o[i]));
        }
        let ev = eigenvalues(&HermitianOperator::from_triplets(4, &trips).unwrap());
        for (k, &e) in ev.iter().enumerate() {
            let b = tridiagonal_eigenvalue(&d, &o, k, -10.0, 10.0);
            assert!((b - e).abs() < 1e-12);
        }
    }
}
