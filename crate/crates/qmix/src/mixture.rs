//! Linear and generalized quantum finite mixtures.
//!
//! A linear mixture is ρ_λ = Σ_r λ_r ρ_r with λ on the unit (M-1)-simplex.
//! The generalized form ρ_λ = Σ_α c_α(λ) ρ_α with polynomial coefficient
//! functions covers the N-copy expansion of a linear mixture, where the
//! components become permutation-symmetrized tensor products indexed by
//! occupation-number vectors and the coefficients are multinomials.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::exact;
use crate::hermitian::{dim_cap, min_eigenvalue, symmetrize, DensityMatrix, HermitianMatrix};
use crate::linalg::{sym_eig, zero_sum_basis, RMat};

/// Tolerance on the simplex-sum invariant of a weight vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default tolerance on the smallest restricted singular value below which a
/// mixture is reported unidentifiable.
pub const IDENTIFIABILITY_TOL: f64 = 1e-9;

/// A point on the unit (M-1)-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    /// Validate and construct. Entries may undershoot 0 or overshoot 1 by at
    /// most 1e-12 (they are clamped); the sum must be 1 within 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, WEIGHT_SUM_TOL)
    }

    /// Same as [`WeightVector::new`] with a caller-chosen tolerance; entries
    /// are clamped into [0, 1] and the sum renormalized after validation.
    pub fn with_tolerance(mut weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {sum:.15}, not 1"
            )));
        }
        for w in &weights {
            if *w < -tol || *w > 1.0 + tol {
                return Err(Error::InvalidArgument(format!(
                    "weight {w:.15} outside [0, 1]"
                )));
            }
        }
        for w in weights.iter_mut() {
            *w = w.clamp(0.0, 1.0);
        }
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && (sum - 1.0).abs() > 0.0 {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        Ok(Self { weights })
    }

    /// The barycenter (1/M, ..., 1/M).
    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, r: usize) -> f64 {
        self.weights[r]
    }
}

/// A real multivariate polynomial in the weight coordinates, stored as a map
/// from exponent vectors to coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl CoefficientPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, value: f64) -> Self {
        let mut p = Self::zero(nvars);
        if value != 0.0 {
            p.terms.insert(vec![0; nvars], value);
        }
        p
    }

    /// coeff * Π λ_r^{exponents[r]}.
    pub fn monomial(exponents: Vec<u32>, coeff: f64) -> Self {
        let nvars = exponents.len();
        let mut p = Self::zero(nvars);
        if coeff != 0.0 {
            p.terms.insert(exponents, coeff);
        }
        p
    }

    /// The coordinate monomial λ_r.
    pub fn variable(nvars: usize, r: usize) -> Self {
        let mut e = vec![0u32; nvars];
        e[r] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(exps, c)| {
                c * exps
                    .iter()
                    .zip(point)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(0.0);
            *entry += c;
            if *entry == 0.0 {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * factor))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert(0.0);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn is_variable(&self, r: usize) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|(e, &c)| {
                c == 1.0
                    && e.iter()
                        .enumerate()
                        .all(|(i, &x)| if i == r { x == 1 } else { x == 0 })
            })
    }
}

/// Occupation-number vector: how many of N copies sit in each component slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationVector {
    counts: Vec<u32>,
}

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Visit every nonnegative integer composition of `total` into `parts`
/// slots, first slot descending; `buf` is reused across calls.
pub(crate) fn for_each_composition(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    let mut buf = vec![0u32; parts];
    fn recurse(total: u32, slot: usize, buf: &mut [u32], f: &mut impl FnMut(&[u32])) {
        if slot == buf.len() - 1 {
            buf[slot] = total;
            f(buf);
            return;
        }
        for v in (0..=total).rev() {
            buf[slot] = v;
            recurse(total - v, slot + 1, buf, f);
        }
    }
    if parts == 0 {
        return;
    }
    recurse(total, 0, &mut buf, f);
}

/// All compositions of `total` into `parts` slots, in enumeration order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_composition(total, parts, &mut |k| out.push(k.to_vec()));
    out
}

/// A quantum finite mixture ρ_λ = Σ_α c_α(λ) ρ_α with polynomial
/// coefficient functions in M weight parameters.
#[derive(Debug, Clone)]
pub struct GeneralizedMixture {
    components: Vec<DensityMatrix>,
    coefficients: Vec<CoefficientPolynomial>,
    param_count: usize,
}

impl GeneralizedMixture {
    /// Linear mixture ρ_λ = Σ_r λ_r ρ_r.
    pub fn linear(components: Vec<DensityMatrix>) -> Result<Self> {
        let m = components.len();
        if m == 0 {
            return Err(Error::InvalidArgument("mixture with no components".into()));
        }
        let coefficients = (0..m)
            .map(|r| CoefficientPolynomial::variable(m, r))
            .collect();
        Self::generalized(components, coefficients, m)
    }

    /// Generalized mixture; checks shared dimensions and that the
    /// coefficients sum to 1 on the simplex (10 deterministic sample points).
    pub fn generalized(
        components: Vec<DensityMatrix>,
        coefficients: Vec<CoefficientPolynomial>,
        param_count: usize,
    ) -> Result<Self> {
        if components.is_empty() || components.len() != coefficients.len() {
            return Err(Error::InvalidArgument(
                "components and coefficients must be non-empty and matched".into(),
            ));
        }
        let dim = components[0].dim();
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        for p in &coefficients {
            if p.nvars() != param_count {
                return Err(Error::InvalidArgument(format!(
                    "coefficient polynomial has {} variables, expected {param_count}",
                    p.nvars()
                )));
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_c0ef);
        for _ in 0..10 {
            let point = random_simplex_point(param_count, &mut rng);
            let total: f64 = coefficients.iter().map(|p| p.evaluate(&point)).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::ModelInconsistency(format!(
                    "coefficient functions sum to {total:.12} at a simplex point"
                )));
            }
        }
        Ok(Self {
            components,
            coefficients,
            param_count,
        })
    }

    pub fn components(&self) -> &[DensityMatrix] {
        &self.components
    }

    pub fn coefficients(&self) -> &[CoefficientPolynomial] {
        &self.coefficients
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// True when the coefficients are exactly the coordinate monomials.
    pub fn is_linear(&self) -> bool {
        self.components.len() == self.param_count
            && self
                .coefficients
                .iter()
                .enumerate()
                .all(|(r, p)| p.is_variable(r))
    }

    /// The average state ρ_λ = Σ_α c_α(λ) ρ_α.
    ///
    /// Generalized mixtures evaluated outside their valid region can fail
    /// positivity; that is reported as a model inconsistency.
    pub fn average_state(&self, lambda: &WeightVector) -> Result<DensityMatrix> {
        if lambda.len() != self.param_count {
            return Err(Error::DimensionMismatch {
                expected: self.param_count,
                got: lambda.len(),
            });
        }
        let terms: Vec<(f64, &HermitianMatrix)> = self
            .coefficients
            .iter()
            .zip(&self.components)
            .map(|(p, rho)| (p.evaluate(lambda.as_slice()), rho.matrix()))
            .collect();
        let sum = HermitianMatrix::linear_combination(&terms)?;
        let lo = min_eigenvalue(&sum)?;
        if lo < -1e-8 {
            return Err(Error::ModelInconsistency(format!(
                "average state has eigenvalue {lo:.3e}"
            )));
        }
        DensityMatrix::new_psd_by_construction(sum)
    }

    /// Expand to N independent copies in occupation-number form.
    ///
    /// Components become ρ_k = S(ρ_1^{⊗k_1} ⊗ ... ⊗ ρ_M^{⊗k_M}) with
    /// multinomial coefficients c_k(λ) = N! Π λ_r^{k_r} / k_r!, one per
    /// occupation vector; the component count is C(M+N-1, M-1).
    pub fn multicopy_expand(&self, n_copies: u32) -> Result<Self> {
        if !self.is_linear() {
            return Err(Error::Precondition(
                "multicopy expansion requires a linear mixture".into(),
            ));
        }
        if n_copies == 0 {
            return Err(Error::InvalidArgument(
                "the number of copies must be at least 1".into(),
            ));
        }
        let total_dim = self
            .dim()
            .checked_pow(n_copies)
            .filter(|&d| d <= dim_cap())
            .ok_or(Error::DimensionCap {
                dim: usize::MAX,
                cap: dim_cap(),
            })?;
        let _ = total_dim;
        let m = self.param_count;
        let n_fact = exact::factorial(n_copies as u64);
        let mut components = Vec::new();
        let mut coefficients = Vec::new();
        let mut err: Option<Error> = None;
        for_each_composition(n_copies, m, &mut |k| {
            if err.is_some() {
                return;
            }
            let mut parts: Vec<DensityMatrix> = Vec::with_capacity(n_copies as usize);
            for (r, &count) in k.iter().enumerate() {
                for _ in 0..count {
                    parts.push(self.components[r].clone());
                }
            }
            match symmetrize(&parts) {
                Ok(rho_k) => {
                    let denom: num_bigint::BigUint =
                        k.iter().map(|&kr| exact::factorial(kr as u64)).product();
                    let coeff = exact::biguint_ratio_to_f64(&n_fact, &denom);
                    components.push(rho_k);
                    coefficients.push(CoefficientPolynomial::monomial(k.to_vec(), coeff));
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Self::generalized(components, coefficients, m)
    }

    /// Occupation vectors in the same order as [`Self::multicopy_expand`]
    /// lists its components.
    pub fn occupation_vectors(n_copies: u32, m: usize) -> Vec<OccupationVector> {
        compositions(n_copies, m)
            .into_iter()
            .map(OccupationVector::new)
            .collect()
    }
}

/// Uniform simplex point via sorted-uniform spacings.
pub(crate) fn random_simplex_point(m: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut point = Vec::with_capacity(m);
    let mut prev = 0.0;
    for &c in &cuts {
        point.push(c - prev);
        prev = c;
    }
    point.push(1.0 - prev);
    point
}

/// Result of the linear-independence test of the component states,
/// restricted to zero-sum weight directions.
#[derive(Debug, Clone)]
pub struct IdentifiabilityReport {
    /// True when no zero-sum weight direction is annihilated by the state map.
    pub identifiable: bool,
    /// Orthonormal zero-sum directions v with Σ_r v_r ρ_r = 0.
    pub kernel_basis: Vec<Vec<f64>>,
    /// Rank of the restricted state map (at most M-1).
    pub rank: usize,
    /// Smallest restricted singular value, for diagnostics.
    pub min_singular_value: f64,
}

/// Test identifiability: the mixture is identifiable iff v ↦ Σ_r v_r ρ_r has
/// trivial kernel on the zero-sum subspace at tolerance `tol`.
pub fn identifiability(mix: &GeneralizedMixture, tol: f64) -> Result<IdentifiabilityReport> {
    if !mix.is_linear() {
        return Err(Error::Precondition(
            "identifiability is defined for linear mixtures".into(),
        ));
    }
    let m = mix.param_count();
    if m == 1 {
        return Ok(IdentifiabilityReport {
            identifiable: true,
            kernel_basis: vec![],
            rank: 0,
            min_singular_value: f64::INFINITY,
        });
    }
    // Coordinates of each component in the orthonormal Hermitian basis.
    let coords: Vec<Vec<f64>> = mix
        .components()
        .iter()
        .map(|rho| rho.matrix().basis_coords())
        .collect();
    let d2 = coords[0].len();
    let mut b = RMat::zeros(d2, m);
    for (r, col) in coords.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            b.set(i, r, v);
        }
    }
    let w = zero_sum_basis(m);
    let bz = b.matmul(&w); // d2 x (m-1)
    let gram = bz.transpose().matmul(&bz);
    let (eigs, vecs) = sym_eig(&gram)?;
    let mut kernel_basis = Vec::new();
    let mut rank = 0usize;
    let mut min_sv = f64::INFINITY;
    for (idx, &e) in eigs.iter().enumerate() {
        let sv = e.max(0.0).sqrt();
        min_sv = min_sv.min(sv);
        if sv > tol {
            rank += 1;
            continue;
        }
        // Map the restricted kernel vector back to the full weight space.
        let y: Vec<f64> = (0..m - 1).map(|i| vecs.get(i, idx)).collect();
        let mut v = w.matvec(&y);
        // Sign convention: largest-magnitude entry positive.
        let lead = v
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        kernel_basis.push(v);
    }
    Ok(IdentifiabilityReport {
        identifiable: kernel_basis.is_empty(),
        kernel_basis,
        rank,
        min_singular_value: min_sv,
    })
}

/// ρ = (I + r·σ)/2 for a Bloch vector with |r| ≤ 1.
pub fn bloch_to_density(r: [f64; 3]) -> Result<DensityMatrix> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "Bloch vector has length {norm:.15} > 1"
        )));
    }
    let half = 0.5;
    let entries = vec![
        Complex64::new(half * (1.0 + r[2]), 0.0),
        Complex64::new(half * r[0], -half * r[1]),
        Complex64::new(half * r[0], half * r[1]),
        Complex64::new(half * (1.0 - r[2]), 0.0),
    ];
    DensityMatrix::new_psd_by_construction(HermitianMatrix::new(2, entries)?)
}

/// Inverse of [`bloch_to_density`].
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    Ok([
        2.0 * m.get(0, 1).re,
        -2.0 * m.get(0, 1).im,
        m.get(0, 0).re - m.get(1, 1).re,
    ])
}
