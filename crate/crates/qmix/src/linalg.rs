//! Small dense real-matrix helpers: weight-space covariances, information
//! matrices, constraint systems. Symmetric eigenproblems are delegated to
//! the Hermitian solver.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, HermitianMatrix};

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * f).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Solve the square system self * x = b by partial-pivot elimination.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col].abs() < 1e-14 {
                return Err(Error::RankDeficient {
                    rank: col,
                    expected: n,
                    hint: "singular linear system",
                });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            x[col] /= a[col * n + col];
            for r in 0..col {
                x[r] -= a[r * n + col] * x[col];
            }
        }
        Ok(x)
    }
}

/// Eigendecomposition of a symmetric real matrix (ascending eigenvalues,
/// orthonormal columns).
pub fn sym_eig(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let h = HermitianMatrix::new(n, m.data.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
    let eig = eig_hermitian(&h)?;
    // Real symmetric input keeps the solver real; imaginary parts are exact zeros.
    let mut vecs = RMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            vecs.set(i, j, eig.vectors[i * n + j].re);
        }
    }
    Ok((eig.eigenvalues, vecs))
}

/// Symmetric pseudo-inverse: eigenvalues below `tol * max|w|` are dropped.
pub fn sym_pinv(m: &RMat, tol: f64) -> Result<RMat> {
    let (w, v) = sym_eig(m)?;
    let wmax = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let n = m.rows;
    let mut out = RMat::zeros(n, n);
    for k in 0..n {
        if w[k].abs() <= tol * wmax.max(1e-300) {
            continue;
        }
        let inv = 1.0 / w[k];
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] += inv * v.get(i, k) * v.get(j, k);
            }
        }
    }
    Ok(out)
}

/// Symmetric PSD square root.
pub fn sym_sqrt(m: &RMat) -> Result<RMat> {
    let (w, v) = sym_eig(m)?;
    let n = m.rows;
    let mut out = RMat::zeros(n, n);
    for k in 0..n {
        if w[k] < -1e-10 {
            return Err(Error::NotPsd {
                min_eigenvalue: w[k],
            });
        }
        let s = w[k].max(0.0).sqrt();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] += s * v.get(i, k) * v.get(j, k);
            }
        }
    }
    Ok(out)
}

/// Projector onto the orthogonal complement of (1, ..., 1) in R^m.
pub fn zero_sum_projector(m: usize) -> RMat {
    let mut p = RMat::identity(m);
    let inv = 1.0 / m as f64;
    for i in 0..m {
        for j in 0..m {
            p.data[i * m + j] -= inv;
        }
    }
    p
}

/// Orthonormal basis of the zero-sum subspace as the columns of an
/// m x (m-1) matrix (Helmert construction, deterministic).
pub fn zero_sum_basis(m: usize) -> RMat {
    let mut w = RMat::zeros(m, m - 1);
    for j in 1..m {
        let norm = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            w.set(i, j - 1, norm);
        }
        w.set(j, j - 1, -(j as f64) * norm);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = RMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = a.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_projected_diagonal() {
        // P (diag) P pseudo-inverted stays supported on the zero-sum subspace
        let m = 3;
        let p = zero_sum_projector(m);
        let d = RMat::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 5.0, 0.0],
            vec![0.0, 0.0, 10.0],
        ]);
        let proj = p.matmul(&d).matmul(&p);
        let pinv = sym_pinv(&proj, 1e-12).unwrap();
        let ident_on_s = pinv.matmul(&proj);
        assert!(ident_on_s.sub(&p).frobenius_norm() < 1e-10);
    }

    #[test]
    fn zero_sum_basis_is_orthonormal() {
        for m in 2..6 {
            let w = zero_sum_basis(m);
            let gram = w.transpose().matmul(&w);
            assert!(gram.sub(&RMat::identity(m - 1)).frobenius_norm() < 1e-12);
            // columns sum to zero
            for j in 0..m - 1 {
                let s: f64 = (0..m).map(|i| w.get(i, j)).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let g = RMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let r = sym_sqrt(&g).unwrap();
        assert!(r.matmul(&r).sub(&g).frobenius_norm() < 1e-12);
    }
}
