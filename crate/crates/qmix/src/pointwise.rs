//! Pointwise (local) estimation theory for the one-copy model ρ_λ.
//!
//! At a fixed interior weight vector the classical Fisher information of any
//! POVM is bounded by the quantum Fisher information H_1(λ), and both live
//! on the zero-sum subspace S once the simplex constraint is accounted for:
//! bounds are stated through the compression P_S (·) P_S and its restricted
//! inverse. The asymptotic Bayesian error is the prior average of that
//! inverse divided by the number of copies.
//!
//! The module also carries the exact finite-N error of the commuting
//! non-orthogonal pair, evaluated through exact integer Beta moments rather
//! than a floating-point binomial expansion (which is catastrophically
//! ill-conditioned for large N).

use num_bigint::{BigInt, BigUint};

use crate::bayes::{qfi_from_sld, sld_for_family, Povm, SldSet, OUTCOME_CUTOFF};
use crate::error::{Error, Result};
use crate::exact;
use crate::hermitian::{eig_hermitian, DensityMatrix, HermitianMatrix};
use crate::linalg::{sym_eig, zero_sum_projector, RMat};
use crate::mixture::{GeneralizedMixture, WeightVector};
use crate::prior::{flat_density, for_each_simplex_node, Prior};

/// Interior cutoff: pointwise quantities diverge at the simplex boundary.
pub const INTERIOR_CUTOFF: f64 = 1e-6;

/// A linear mixture frozen at one interior weight vector, with the state and
/// its parameter derivatives (∂_r ρ_λ = ρ_r for linear mixtures).
#[derive(Debug, Clone)]
pub struct PointwiseModel {
    lambda: WeightVector,
    state: DensityMatrix,
    partials: Vec<HermitianMatrix>,
}

impl PointwiseModel {
    pub fn new(mix: &GeneralizedMixture, lambda: WeightVector) -> Result<Self> {
        if !mix.is_linear() {
            return Err(Error::Precondition(
                "pointwise models are defined for linear mixtures".into(),
            ));
        }
        if lambda.len() != mix.param_count() {
            return Err(Error::DimensionMismatch {
                expected: mix.param_count(),
                got: lambda.len(),
            });
        }
        if lambda.as_slice().iter().any(|&l| l < INTERIOR_CUTOFF) {
            return Err(Error::Precondition(format!(
                "weight vector must be interior (entries >= {INTERIOR_CUTOFF})"
            )));
        }
        let state = mix.average_state(&lambda)?;
        let partials = mix
            .components()
            .iter()
            .map(|rho| rho.matrix().clone())
            .collect();
        Ok(Self {
            lambda,
            state,
            partials,
        })
    }

    pub fn lambda(&self) -> &WeightVector {
        &self.lambda
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn partials(&self) -> &[HermitianMatrix] {
        &self.partials
    }

    pub fn param_count(&self) -> usize {
        self.partials.len()
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

/// Classical Fisher information of a POVM at the model point:
/// F_rs = Σ_χ tr(E_χ ρ_r) tr(E_χ ρ_s) / p(χ|λ). Outcomes below the
/// probability cutoff must carry negligible derivative weight.
pub fn fisher_info(model: &PointwiseModel, povm: &Povm) -> Result<RMat> {
    if povm.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: povm.dim(),
        });
    }
    let m = model.param_count();
    let mut fisher = RMat::zeros(m, m);
    for (chi, e) in povm.elements().iter().enumerate() {
        let p = e.trace_product(model.state.matrix())?;
        let grads: Vec<f64> = model
            .partials
            .iter()
            .map(|d| e.trace_product(d))
            .collect::<Result<_>>()?;
        if p < OUTCOME_CUTOFF {
            let worst = grads.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if worst > 1e-10 {
                return Err(Error::IrregularOutcome {
                    outcome: chi,
                    magnitude: worst,
                });
            }
            continue;
        }
        for r in 0..m {
            for s in 0..m {
                fisher.data[r * m + s] += grads[r] * grads[s] / p;
            }
        }
    }
    Ok(fisher)
}

/// Symmetric logarithmic derivatives of the one-copy family at the model
/// point (the eigenbasis construction with σ = ρ_λ, D_r = ρ_r).
pub fn pointwise_slds(model: &PointwiseModel) -> Result<SldSet> {
    let eig = eig_hermitian(model.state.matrix())?;
    sld_for_family(&eig, &model.partials)
}

/// Quantum Fisher information H_1(λ) of the one-copy model.
pub fn qfi_pointwise(model: &PointwiseModel) -> Result<RMat> {
    let sld = pointwise_slds(model)?;
    qfi_from_sld(model.state.matrix(), &sld.operators)
}

/// A symmetric matrix compressed to the zero-sum subspace S together with
/// its inverse restricted to S.
#[derive(Debug, Clone)]
pub struct ProjectedMatrix {
    /// The original matrix.
    pub full: RMat,
    /// P_S · full · P_S.
    pub projected: RMat,
    /// Inverse of the compression, supported on S.
    pub pseudo_inverse: RMat,
    /// Nonzero eigenvalues of the compression (ascending).
    spectrum: Vec<f64>,
}

impl ProjectedMatrix {
    /// Product of the nonzero eigenvalues (determinant with the projection
    /// kernel removed).
    pub fn pseudo_determinant(&self) -> f64 {
        self.spectrum.iter().product()
    }

    /// Trace of the restricted inverse.
    pub fn inverse_trace(&self) -> f64 {
        self.spectrum.iter().map(|w| 1.0 / w).sum()
    }
}

/// Rank tolerance (relative to the largest eigenvalue) for the compression.
const PROJECTION_RANK_TOL: f64 = 1e-10;

/// Compress a symmetric M x M matrix onto the zero-sum subspace and invert
/// there. The compression must have full rank M-1 on S; anything less
/// signals an unidentifiable direction and the caller should reparametrize.
pub fn project_and_invert(matrix: &RMat) -> Result<ProjectedMatrix> {
    let m = matrix.rows;
    let p = zero_sum_projector(m);
    let projected = p.matmul(matrix).matmul(&p);
    let (w, v) = sym_eig(&projected)?;
    let wmax = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut spectrum = Vec::new();
    let mut pseudo_inverse = RMat::zeros(m, m);
    for k in 0..m {
        if wmax == 0.0 || w[k].abs() <= PROJECTION_RANK_TOL * wmax {
            continue;
        }
        spectrum.push(w[k]);
        let inv = 1.0 / w[k];
        for i in 0..m {
            for j in 0..m {
                pseudo_inverse.data[i * m + j] += inv * v.get(i, k) * v.get(j, k);
            }
        }
    }
    if spectrum.len() != m - 1 {
        return Err(Error::RankDeficient {
            rank: spectrum.len(),
            expected: m - 1,
            hint: "information matrix is singular on the zero-sum subspace; reparametrize",
        });
    }
    Ok(ProjectedMatrix {
        full: matrix.clone(),
        projected,
        pseudo_inverse,
        spectrum,
    })
}

/// Leading-order Bayesian error matrix for large N:
/// (1/N) ∫ π(λ) [P_S H_1(λ) P_S]⁺ dλ, integrated on the open simplex grid.
pub fn asymptotic_bayes_error(
    mix: &GeneralizedMixture,
    prior: &Prior,
    n_copies: u32,
    resolution: usize,
) -> Result<RMat> {
    let m = mix.param_count();
    if prior.param_count() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: prior.param_count(),
        });
    }
    let norm = flat_density(m);
    let mut acc = RMat::zeros(m, m);
    let mut failure: Option<Error> = None;
    let count = for_each_simplex_node(m, resolution, &mut |node| {
        if failure.is_some() {
            return;
        }
        let result = WeightVector::new(node.to_vec())
            .and_then(|lambda| PointwiseModel::new(mix, lambda))
            .and_then(|model| qfi_pointwise(&model))
            .and_then(|h| project_and_invert(&h));
        match result {
            Ok(inv) => {
                let weight = prior.density(node) / norm;
                acc = acc.add(&inv.pseudo_inverse.scale(weight));
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(acc.scale(1.0 / (count as f64 * n_copies as f64)))
}

/// Asymptotic error coefficient for a pair of qubit states in Bloch form
/// (flat prior): the coefficient of 1/N in the single-weight error.
pub fn two_qubit_asymptotic_coefficient(r1: [f64; 3], r2: [f64; 3]) -> f64 {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let sum = [r1[0] + r2[0], r1[1] + r2[1], r1[2] + r2[2]];
    let diff = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let r1sq = dot(&r1, &r1);
    let r2sq = dot(&r2, &r2);
    let num = 6.0 - dot(&sum, &sum) - r1sq - r2sq;
    let den = dot(&diff, &diff) - r1sq * r2sq + dot(&r1, &r2).powi(2);
    num / (6.0 * den)
}

/// The same coefficient expressed through state overlaps:
/// (3 − tr ρ_1² − tr ρ_2² − tr ρ_1 ρ_2) /
/// (6 [tr ρ_1² + tr ρ_2² − tr ρ_1² tr ρ_2² − (2 − tr ρ_1 ρ_2) tr ρ_1 ρ_2]).
pub fn two_qubit_asymptotic_coefficient_traces(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<f64> {
    let p1 = rho1.matrix().trace_product(rho1.matrix())?;
    let p2 = rho2.matrix().trace_product(rho2.matrix())?;
    let o = rho1.matrix().trace_product(rho2.matrix())?;
    let num = 3.0 - p1 - p2 - o;
    let den = p1 + p2 - p1 * p2 - (2.0 - o) * o;
    Ok(num / (6.0 * den))
}

/// Exact finite-N error of the commuting pair ρ_1 = diag(1-ε, ε),
/// ρ_2 = |0><0| under the flat prior (the single-weight error):
///
///   Δ = 1/12 − (1/4) Σ_k B_k² / A_k,
///
/// with A_k = C(N,k) ∫ (ελ)^k (1−ελ)^{N−k} dλ and B_k the same integral
/// weighted by (2λ−1). The Beta moments are expanded binomially over a
/// common integer denominator and evaluated exactly; the only floating-point
/// steps are one conversion per A_k, B_k and the final positive-term sum.
pub fn commuting_exact_error(epsilon: f64, n_copies: u32) -> Result<f64> {
    if !(0.0 < epsilon && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if n_copies == 0 {
        return Err(Error::InvalidArgument(
            "the number of copies must be at least 1".into(),
        ));
    }
    let n = n_copies as u64;
    let (p_raw, s) = exact::f64_to_dyadic(epsilon);
    let p_num = BigInt::from(p_raw);
    let lcm = BigInt::from(exact::lcm_range(1, n + 2));
    // Common denominator for every A_k, B_k: 2^(s N) · lcm(1..N+2).
    let denom = (BigInt::from(1) << (s * n)) * &lcm;

    let mut sum = 0.0f64;
    for k in 0..=n {
        let q = n - k;
        let mut p_pow = BigInt::from(1);
        let mut binom_qj = BigInt::from(1);
        let mut sum_a = BigInt::from(0);
        let mut sum_b = BigInt::from(0);
        for j in 0..=q {
            // term scale: C(q, j) (−p)^j 2^{s(q−j)}
            let base = &binom_qj * &p_pow * (BigInt::from(1) << (s * (q - j)));
            let signed = if j % 2 == 0 { base } else { -base };
            let inv1 = &lcm / BigInt::from(k + j + 1);
            let inv2 = &lcm / BigInt::from(k + j + 2);
            sum_a += &signed * &inv1;
            sum_b += &signed * (BigInt::from(2) * inv2 - inv1);
            if j < q {
                p_pow *= &p_num;
                binom_qj = binom_qj * BigInt::from(q - j) / BigInt::from(j + 1);
            }
        }
        // Fold in C(N,k) ε^k = C(N,k) p^k / 2^(s k); together with the
        // 2^(s q) inside the inner sums this completes the 2^(s N) of the
        // common denominator.
        let c_nk = BigInt::from(exact::binomial(n, k));
        let mut p_k = BigInt::from(1);
        for _ in 0..k {
            p_k *= &p_num;
        }
        let scale = c_nk * p_k;
        let a_num = &scale * sum_a;
        if a_num.sign() != num_bigint::Sign::Plus {
            return Err(Error::ModelInconsistency(format!(
                "Beta moment A_{k} is not positive"
            )));
        }
        let a_k = exact::big_ratio_to_f64(&a_num, &denom);
        if a_k == 0.0 {
            // Deep-tail occupation: A_k underflows f64 and |B_k| <= A_k, so
            // the contribution B_k^2 / A_k <= A_k is far below resolution.
            continue;
        }
        let b_k = exact::big_ratio_to_f64(&(&scale * sum_b), &denom);
        sum += b_k * b_k / a_k;
    }
    Ok(1.0 / 12.0 - 0.25 * sum)
}

/// Closed-form occupation sum Σ_{k,r} k_r² over all occupation vectors of N
/// copies in M slots, cross-checked against brute-force enumeration:
/// (2N+M−1)/(M+1) · (M+N−1)!/((M−1)!(N−1)!).
pub fn occupation_sum_check(m: u32, n: u32) -> u64 {
    assert!(m >= 1 && n >= 1);
    let num =
        BigUint::from(2 * n as u64 + m as u64 - 1) * exact::factorial(m as u64 + n as u64 - 1);
    let den = BigUint::from(m as u64 + 1)
        * exact::factorial(m as u64 - 1)
        * exact::factorial(n as u64 - 1);
    assert!(
        (&num % &den) == BigUint::from(0u32),
        "formula is not integral"
    );
    let formula: u64 = exact::biguint_ratio_to_f64(&(num / den), &BigUint::from(1u32)) as u64;

    let mut brute = 0u64;
    crate::mixture::for_each_composition(n, m as usize, &mut |k| {
        brute += k.iter().map(|&x| (x as u64) * (x as u64)).sum::<u64>();
    });
    assert_eq!(formula, brute, "occupation sum mismatch for M={m}, N={n}");
    formula
}
