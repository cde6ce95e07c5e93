//! Dense complex Hermitian matrix algebra.
//!
//! Everything downstream (mixtures, effective states, logarithmic
//! derivatives, Holevo operators) is built on the types in this module:
//! [`HermitianMatrix`] for generic Hermitian operators, [`DensityMatrix`]
//! for unit-trace positive operators, and [`Eigendecomposition`] as the
//! spectral workhorse.
//!
//! The eigensolver reduces the matrix to real tridiagonal form with complex
//! Householder reflections, absorbs the sub-diagonal phases into the
//! accumulated unitary, and finishes with implicitly shifted QL sweeps.
//! Matrices here are small and dense, so no blocking or sparsity is
//! attempted.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance applied at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default cap on composite (tensor-product) dimensions.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Composite dimension cap; `QMIX_DIM_CAP` overrides the default of 4096.
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QMIX_DIM_CAP")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

/// A dense complex Hermitian matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Build from row-major entries, enforcing Hermiticity.
    ///
    /// Asymmetry up to [`HERMITICITY_TOL`] is repaired by averaging with the
    /// adjoint; anything larger is rejected as a logic error upstream.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: if dim == 0 { 0 } else { entries.len() / dim },
                cols: dim,
            });
        }
        let mut asymmetry = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i].conj();
                asymmetry = asymmetry.max((a - b).norm());
            }
        }
        if asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        let mut m = Self { dim, entries };
        m.symmetrize_in_place();
        Ok(m)
    }

    /// Construct from a closure over (row, col); entries are symmetrized.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::new(dim, entries)
    }

    /// Zero matrix.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Rank-one projector |v><v| / <v|v>.
    pub fn projector(v: &[Complex64]) -> Result<Self> {
        let dim = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidArgument("projector of a zero vector".into()));
        }
        Self::from_fn(dim, |i, j| v[i] * v[j].conj() / norm2)
    }

    pub(crate) fn from_raw_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        let mut m = Self { dim, entries };
        m.symmetrize_in_place();
        m
    }

    fn symmetrize_in_place(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.entries[i * n + i] = Complex64::new(self.entries[i * n + i].re, 0.0);
            for j in 0..i {
                let avg = 0.5 * (self.entries[i * n + j] + self.entries[j * n + i].conj());
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// Trace (real by Hermiticity).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_raw_unchecked(self.dim, entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Scale by a real factor (keeps Hermiticity).
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Real linear combination of same-dimension Hermitian matrices.
    pub fn linear_combination(terms: &[(f64, &Self)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, m)| m.dim)
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (c, m) in terms {
            if m.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim,
                });
            }
            for (e, z) in entries.iter_mut().zip(&m.entries) {
                *e += z * *c;
            }
        }
        Ok(Self::from_raw_unchecked(dim, entries))
    }

    /// tr(AB) for Hermitian A, B (real by symmetry).
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) * other.get(j, i)).re;
            }
        }
        Ok(acc)
    }

    /// Coordinates in the orthonormal Hermitian operator basis of
    /// [`hs_operator_basis`]; real because the matrix is Hermitian.
    pub fn basis_coords(&self) -> Vec<f64> {
        let n = self.dim;
        let mut coords = Vec::with_capacity(n * n);
        // Diagonal part: identity direction, then the traceless ladder.
        let sum: f64 = (0..n).map(|i| self.get(i, i).re).sum();
        coords.push(sum / (n as f64).sqrt());
        for k in 1..n {
            let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let partial: f64 = (0..k).map(|i| self.get(i, i).re).sum();
            coords.push(norm * (partial - k as f64 * self.get(k, k).re));
        }
        // Off-diagonal part: symmetric then antisymmetric for each i < j.
        let s2 = std::f64::consts::SQRT_2;
        for i in 0..n {
            for j in i + 1..n {
                let z = self.get(i, j);
                coords.push(s2 * z.re);
                coords.push(-s2 * z.im);
            }
        }
        coords
    }

    /// Inverse of [`HermitianMatrix::basis_coords`].
    pub fn from_basis_coords(dim: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), dim * dim);
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut idx = 0usize;
        let c0 = coords[idx] / (dim as f64).sqrt();
        idx += 1;
        for e in (0..dim).map(|i| i * dim + i) {
            entries[e] += Complex64::new(c0, 0.0);
        }
        for k in 1..dim {
            let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let c = coords[idx];
            idx += 1;
            for i in 0..k {
                entries[i * dim + i] += Complex64::new(c * norm, 0.0);
            }
            entries[k * dim + k] += Complex64::new(-c * norm * k as f64, 0.0);
        }
        let inv_s2 = 1.0 / std::f64::consts::SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                let x = coords[idx];
                let y = coords[idx + 1];
                idx += 2;
                let z = Complex64::new(x * inv_s2, -y * inv_s2);
                entries[i * dim + j] = z;
                entries[j * dim + i] = z.conj();
            }
        }
        Self::from_raw_unchecked(dim, entries)
    }

    /// Max-abs entry of the commutator [A, B].
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let n = self.dim;
        let ab = matmul(&self.entries, &other.entries, n);
        let ba = matmul(&other.entries, &self.entries, n);
        // i[A,B] is Hermitian; its largest |eigenvalue| is the operator norm.
        let comm: Vec<Complex64> = ab
            .iter()
            .zip(&ba)
            .map(|(x, y)| Complex64::new(0.0, 1.0) * (x - y))
            .collect();
        let h = HermitianMatrix::from_raw_unchecked(n, comm);
        let eig = eig_hermitian(&h)?;
        Ok(eig.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs())))
    }
}

/// Raw complex matrix product (row-major, both n x n).
pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// tr(ABC) for raw row-major n x n matrices.
pub(crate) fn trace_triple(
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    n: usize,
) -> Complex64 {
    let bc = matmul(b, c, n);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[i * n + j] * bc[j * n + i];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix: `A = V diag(w) V†`.
///
/// Eigenvalues are sorted ascending; the columns of `V` are an orthonormal
/// set (an arbitrary orthonormal basis inside degenerate clusters).
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    /// Eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Row-major matrix whose k-th column is the k-th eigenvector.
    pub vectors: Vec<Complex64>,
    dim: usize,
}

impl Eigendecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The k-th eigenvector as an owned column.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.vectors[i * self.dim + k])
            .collect()
    }

    /// V diag(w) V†, for verification.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            let w = self.eigenvalues[k];
            for i in 0..n {
                let vik = self.vectors[i * n + k];
                for j in 0..n {
                    entries[i * n + j] += w * vik * self.vectors[j * n + k].conj();
                }
            }
        }
        HermitianMatrix::from_raw_unchecked(n, entries)
    }

    /// V† M V expressed in the eigenbasis (raw row-major output).
    pub(crate) fn to_eigenbasis(&self, m: &HermitianMatrix) -> Vec<Complex64> {
        let n = self.dim;
        // tmp = M V
        let tmp = matmul(&m.entries, &self.vectors, n);
        // out = V† tmp
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let vki = self.vectors[k * n + i].conj();
                for j in 0..n {
                    out[i * n + j] += vki * tmp[k * n + j];
                }
            }
        }
        out
    }

    /// V B V† back from the eigenbasis (raw row-major input).
    pub(crate) fn from_eigenbasis(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let tmp = matmul(&self.vectors, b, n);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let t = tmp[i * n + k];
                for j in 0..n {
                    out[i * n + j] += t * self.vectors[j * n + k].conj();
                }
            }
        }
        out
    }
}

/// Maximum QL sweeps per eigenvalue; the total budget is 64 * dim.
const QL_SWEEP_BUDGET: usize = 64;

/// Eigendecomposition of a Hermitian matrix.
///
/// Householder tridiagonalization, phase absorption to a real tridiagonal,
/// then implicit QL with shifts. Deterministic for identical input.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Eigendecomposition> {
    let n = m.dim;
    if n == 0 {
        return Ok(Eigendecomposition {
            eigenvalues: vec![],
            vectors: vec![],
            dim: 0,
        });
    }
    let mut a = m.entries.clone();
    let mut q = HermitianMatrix::identity(n).entries;

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0f64;
        for i in k + 1..n {
            norm2 += a[i * n + k].norm_sqr();
        }
        if norm2 == 0.0 {
            continue;
        }
        let x1 = a[(k + 1) * n + k];
        let norm = norm2.sqrt();
        let phase = if x1.norm() > 0.0 {
            x1 / x1.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;

        // v spans rows k+1..n; Householder P = I - tau v v†.
        let mlen = n - k - 1;
        let mut v = vec![Complex64::new(0.0, 0.0); mlen];
        v[0] = x1 - alpha;
        for i in 1..mlen {
            v[i] = a[(k + 1 + i) * n + k];
        }
        let vtv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vtv == 0.0 {
            continue;
        }
        let tau = 2.0 / vtv;

        // p = tau * B v over the trailing block B = a[k+1.., k+1..].
        let mut p = vec![Complex64::new(0.0, 0.0); mlen];
        for i in 0..mlen {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..mlen {
                acc += a[(k + 1 + i) * n + (k + 1 + j)] * v[j];
            }
            p[i] = tau * acc;
        }
        let vtp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = 0.5 * tau * vtp.re;
        // q_vec = p - kappa v; B <- B - v q† - q v†.
        let qv: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..mlen {
            for j in 0..mlen {
                let delta = v[i] * qv[j].conj() + qv[i] * v[j].conj();
                a[(k + 1 + i) * n + (k + 1 + j)] -= delta;
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + (k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = Complex64::new(0.0, 0.0);
            a[k * n + i] = Complex64::new(0.0, 0.0);
        }
        // Q <- Q (I - tau v v†) on columns k+1..n.
        for row in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..mlen {
                acc += q[row * n + (k + 1 + j)] * v[j];
            }
            acc *= tau;
            for j in 0..mlen {
                q[row * n + (k + 1 + j)] -= acc * v[j].conj();
            }
        }
    }

    // Absorb sub-diagonal phases so the tridiagonal matrix becomes real.
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0f64; n];
    let mut col_phase = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let ec = a[(i + 1) * n + i];
        let mag = ec.norm();
        e[i] = mag;
        let phase = if mag > 0.0 {
            ec / mag
        } else {
            Complex64::new(1.0, 0.0)
        };
        col_phase[i + 1] = col_phase[i] * phase;
    }
    for row in 0..n {
        for j in 0..n {
            q[row * n + j] *= col_phase[j];
        }
    }

    // Implicit QL with shifts on the real tridiagonal (d, e).
    // e[i] couples d[i] and d[i+1]; e[n-1] is a sentinel.
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut split = l;
            while split < n - 1 {
                let dd = d[split].abs() + d[split + 1].abs();
                if e[split].abs() <= f64::EPSILON * dd {
                    break;
                }
                split += 1;
            }
            if split == l {
                break;
            }
            iter += 1;
            if iter > QL_SWEEP_BUDGET {
                return Err(Error::EigenFailure { dim: n });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[split] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..split).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[split] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..n {
                    f = q[row * n + i + 1].re;
                    let fi = q[row * n + i + 1].im;
                    let qre = q[row * n + i].re;
                    let qim = q[row * n + i].im;
                    q[row * n + i + 1] = Complex64::new(s * qre + c * f, s * qim + c * fi);
                    q[row * n + i] = Complex64::new(c * qre - s * f, c * qim - s * fi);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[split] = 0.0;
        }
    }

    // Sort ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = q[row * n + old_col];
        }
    }
    Ok(Eigendecomposition {
        eigenvalues,
        vectors,
        dim: n,
    })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &HermitianMatrix) -> Result<f64> {
    let eig = eig_hermitian(m)?;
    Ok(eig.eigenvalues.iter().map(|w| w.abs()).sum())
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    let eig = eig_hermitian(m)?;
    Ok(*eig
        .eigenvalues
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?)
}

/// Kronecker product a ⊗ b, guarded by the composite-dimension cap.
pub fn tensor_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (da, db) = (a.dim, b.dim);
    let dim = da.checked_mul(db).ok_or(Error::DimensionCap {
        dim: usize::MAX,
        cap: dim_cap(),
    })?;
    if dim > dim_cap() {
        return Err(Error::DimensionCap {
            dim,
            cap: dim_cap(),
        });
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    entries[(i * db + k) * dim + (j * db + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    Ok(HermitianMatrix::from_raw_unchecked(dim, entries))
}

/// Orthonormal basis of the real vector space of dim x dim Hermitian
/// matrices under the Hilbert-Schmidt inner product tr(AB): the normalized
/// identity, the diagonal Gell-Mann ladder, then symmetric/antisymmetric
/// off-diagonal pairs. Matches [`HermitianMatrix::basis_coords`].
pub fn hs_operator_basis(dim: usize) -> Vec<HermitianMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for b in 0..dim * dim {
        let mut coords = vec![0.0; dim * dim];
        coords[b] = 1.0;
        basis.push(HermitianMatrix::from_basis_coords(dim, &coords));
    }
    basis
}

/// A unit-trace positive semi-definite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

/// Trace tolerance for density matrices.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of the smallest eigenvalue.
pub const DENSITY_PSD_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validate trace and positivity of a Hermitian matrix.
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        let lo = min_eigenvalue(&base)?;
        if lo < -DENSITY_PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: lo });
        }
        Ok(Self { base })
    }

    /// For matrices positive by construction; still checks the trace.
    pub(crate) fn new_psd_by_construction(base: HermitianMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        Ok(Self { base })
    }

    /// Pure state |v><v| (the vector is normalized internally).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        Self::new_psd_by_construction(HermitianMatrix::projector(v)?)
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            base: HermitianMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.base
    }
}

/// Average over all distinct orderings of the tensor product of `parts`.
///
/// Equal parts (bitwise identical entries) are treated as indistinguishable,
/// so the result is the uniform permutation average and is invariant under
/// relabeling of the input order.
pub fn symmetrize(parts: &[DensityMatrix]) -> Result<DensityMatrix> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("symmetrize of no parts".into()));
    }
    let d = parts[0].dim();
    for p in parts {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
    }
    let total = d
        .checked_pow(parts.len() as u32)
        .ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap: dim_cap(),
        })?;
    if total > dim_cap() {
        return Err(Error::DimensionCap {
            dim: total,
            cap: dim_cap(),
        });
    }

    // Class id per slot: equal matrices share an id.
    let mut class_of = vec![0usize; parts.len()];
    let mut reps: Vec<&DensityMatrix> = Vec::new();
    for (slot, p) in parts.iter().enumerate() {
        match reps.iter().position(|r| r.base == p.base) {
            Some(id) => class_of[slot] = id,
            None => {
                reps.push(p);
                class_of[slot] = reps.len() - 1;
            }
        }
    }

    // Distinct arrangements = multiset permutations of the class ids.
    class_of.sort_unstable();
    let mut acc = vec![Complex64::new(0.0, 0.0); total * total];
    let mut count = 0usize;
    loop {
        let mut prod = reps[class_of[0]].base.clone();
        for &id in &class_of[1..] {
            prod = tensor_product(&prod, &reps[id].base)?;
        }
        for (a, z) in acc.iter_mut().zip(prod.entries.iter()) {
            *a += z;
        }
        count += 1;
        if !next_multiset_permutation(&mut class_of) {
            break;
        }
    }
    let inv = 1.0 / count as f64;
    for z in acc.iter_mut() {
        *z *= inv;
    }
    DensityMatrix::new_psd_by_construction(HermitianMatrix::from_raw_unchecked(total, acc))
}

/// Advance to the next lexicographic multiset permutation; false at the end.
fn next_multiset_permutation(ids: &mut [usize]) -> bool {
    let n = ids.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && ids[i - 1] >= ids[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while ids[j] <= ids[i - 1] {
        j -= 1;
    }
    ids.swap(i - 1, j);
    ids[i..].reverse();
    true
}
