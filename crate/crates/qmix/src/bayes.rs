//! The Bayesian estimation engine.
//!
//! For a mixture ρ_λ = Σ_α c_α(λ) ρ_α with prior moments (λ̄, Λ, Λ̃_α), the
//! error matrix of the optimal estimator under a POVM {E_χ} is exactly
//!
//!   Δ = Λ − F(λ̄),   F_rs = Σ_χ tr(E_χ D_r) tr(E_χ D_s) / p(χ),
//!
//! where D_r = Σ_α Λ̃_{α r} ρ_α and p(χ) = tr(E_χ ⟨ρ_λ⟩). F is the Fisher
//! information at λ̄ of the effective-state family
//! σ_λ = ⟨ρ_λ⟩ + (λ−λ̄)ᵀ D, so the quantum Fisher information H(λ̄) of that
//! family bounds every measurement: Δ ≥ Λ − H(λ̄). When the symmetric
//! logarithmic derivatives commute, the bound is attained by their joint
//! eigenprojectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    eig_hermitian, min_eigenvalue, trace_triple, DensityMatrix, Eigendecomposition, HermitianMatrix,
};
use crate::linalg::RMat;
use crate::mixture::{GeneralizedMixture, WeightVector};
use crate::prior::PriorMoments;

/// Relative support cutoff for logarithmic-derivative denominators.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Outcome-probability cutoff below which outcomes are dropped.
pub const OUTCOME_CUTOFF: f64 = 1e-12;
/// Information weight a dropped outcome may carry before it is an error.
const DROPPED_OUTCOME_TOL: f64 = 1e-10;
/// Eigenvalue merge tolerance for projective measurements.
pub const EIGENVALUE_MERGE_TOL: f64 = 1e-9;

/// A mixture together with prior moments: the data the exact Bayesian error
/// identity is built from.
#[derive(Debug, Clone)]
pub struct EffectiveStateModel {
    mixture: GeneralizedMixture,
    moments: PriorMoments,
    mean_state: DensityMatrix,
    direction_operators: Vec<HermitianMatrix>,
}

impl EffectiveStateModel {
    pub fn new(mixture: GeneralizedMixture, moments: PriorMoments) -> Result<Self> {
        let m = mixture.param_count();
        if moments.param_count() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: moments.param_count(),
            });
        }
        if moments.cross.len() != mixture.components().len() {
            return Err(Error::DimensionMismatch {
                expected: mixture.components().len(),
                got: moments.cross.len(),
            });
        }
        let mean_terms: Vec<(f64, &HermitianMatrix)> = moments
            .coeff_mean
            .iter()
            .zip(mixture.components())
            .map(|(&c, rho)| (c, rho.matrix()))
            .collect();
        let mean_state = DensityMatrix::new(HermitianMatrix::linear_combination(&mean_terms)?)?;

        let mut direction_operators = Vec::with_capacity(m);
        for r in 0..m {
            let terms: Vec<(f64, &HermitianMatrix)> = moments
                .cross
                .iter()
                .zip(mixture.components())
                .map(|(v, rho)| (v[r], rho.matrix()))
                .collect();
            let d = HermitianMatrix::linear_combination(&terms)?;
            if d.trace().abs() > 1e-12 {
                return Err(Error::ModelInconsistency(format!(
                    "direction operator {r} has trace {:.3e}",
                    d.trace()
                )));
            }
            direction_operators.push(d);
        }
        Ok(Self {
            mixture,
            moments,
            mean_state,
            direction_operators,
        })
    }

    pub fn mixture(&self) -> &GeneralizedMixture {
        &self.mixture
    }

    pub fn moments(&self) -> &PriorMoments {
        &self.moments
    }

    /// ⟨ρ_λ⟩, the effective state at the prior mean.
    pub fn mean_state(&self) -> &DensityMatrix {
        &self.mean_state
    }

    /// D_r = Σ_α Λ̃_{α r} ρ_α, the gradient of the effective-state family.
    pub fn direction_operators(&self) -> &[HermitianMatrix] {
        &self.direction_operators
    }

    pub fn param_count(&self) -> usize {
        self.mixture.param_count()
    }

    pub fn dim(&self) -> usize {
        self.mixture.dim()
    }
}

/// σ_λ = ⟨ρ_λ⟩ + Σ_r (λ_r − λ̄_r) D_r. Positive for every simplex point by
/// construction of the moments; failure beyond 1e-8 signals broken moments.
pub fn effective_state(
    model: &EffectiveStateModel,
    lambda: &WeightVector,
) -> Result<DensityMatrix> {
    if lambda.len() != model.param_count() {
        return Err(Error::DimensionMismatch {
            expected: model.param_count(),
            got: lambda.len(),
        });
    }
    let mut terms: Vec<(f64, &HermitianMatrix)> = vec![(1.0, model.mean_state.matrix())];
    for (r, d) in model.direction_operators.iter().enumerate() {
        terms.push((lambda.get(r) - model.moments.mean.get(r), d));
    }
    let sigma = HermitianMatrix::linear_combination(&terms)?;
    let lo = min_eigenvalue(&sigma)?;
    if lo < -1e-8 {
        return Err(Error::ModelInconsistency(format!(
            "effective state has eigenvalue {lo:.3e}; prior moments are inconsistent"
        )));
    }
    DensityMatrix::new_psd_by_construction(sigma)
}

/// The symmetric logarithmic derivatives of the effective-state family at
/// the prior mean, one per weight parameter.
#[derive(Debug, Clone)]
pub struct SldSet {
    /// L_r solving (L_r σ + σ L_r)/2 = D_r on the support of ⟨ρ_λ⟩.
    pub operators: Vec<HermitianMatrix>,
    /// Projector onto the support of the mean state.
    pub support_projector: HermitianMatrix,
    /// Rank of the mean state at the support cutoff.
    pub support_dim: usize,
}

/// Compute the SLDs in the eigenbasis of the mean state:
/// L_r = 2 Σ_{nm} ⟨φ_n|D_r|φ_m⟩ / (ν_n + ν_m) |φ_n⟩⟨φ_m| over pairs with
/// ν_n + ν_m above the support cutoff.
pub fn sld_at_mean(model: &EffectiveStateModel) -> Result<SldSet> {
    let eig = eig_hermitian(model.mean_state.matrix())?;
    sld_for_family(&eig, &model.direction_operators)
}

/// SLD construction shared by the Bayesian and pointwise paths: `eig` is the
/// spectral decomposition of the base state, `gradients` its parameter
/// derivatives.
pub(crate) fn sld_for_family(
    eig: &Eigendecomposition,
    gradients: &[HermitianMatrix],
) -> Result<SldSet> {
    let n = eig.dim();
    let nu_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = SUPPORT_CUTOFF * nu_max;
    let mut operators = Vec::with_capacity(gradients.len());
    for (r, d) in gradients.iter().enumerate() {
        let g = eig.to_eigenbasis(d);
        let mut l_eig = vec![Complex64::new(0.0, 0.0); n * n];
        for row in 0..n {
            for col in 0..n {
                let denom = eig.eigenvalues[row].max(0.0) + eig.eigenvalues[col].max(0.0);
                let num = g[row * n + col];
                if denom > cutoff {
                    l_eig[row * n + col] = 2.0 * num / denom;
                } else if num.norm() > 1e-8 {
                    return Err(Error::SingularModel {
                        row,
                        col,
                        param: r,
                        magnitude: num.norm(),
                    });
                }
            }
        }
        let l = HermitianMatrix::from_raw_unchecked(n, eig.from_eigenbasis(&l_eig));
        operators.push(l);
    }
    // Support projector from the retained eigenvectors.
    let mut proj = vec![Complex64::new(0.0, 0.0); n * n];
    let mut support_dim = 0usize;
    for k in 0..n {
        if eig.eigenvalues[k] <= cutoff {
            continue;
        }
        support_dim += 1;
        for i in 0..n {
            let vik = eig.vectors[i * n + k];
            for j in 0..n {
                proj[i * n + j] += vik * eig.vectors[j * n + k].conj();
            }
        }
    }
    Ok(SldSet {
        operators,
        support_projector: HermitianMatrix::from_raw_unchecked(n, proj),
        support_dim,
    })
}

/// Quantum Fisher information at the prior mean:
/// H_rs = Re tr(L_r L_s ⟨ρ_λ⟩). Symmetric and PSD.
pub fn qfi_at_mean(model: &EffectiveStateModel) -> Result<RMat> {
    let sld = sld_at_mean(model)?;
    qfi_from_sld(model.mean_state.matrix(), &sld.operators)
}

pub(crate) fn qfi_from_sld(state: &HermitianMatrix, slds: &[HermitianMatrix]) -> Result<RMat> {
    let m = slds.len();
    let n = state.dim();
    let mut h = RMat::zeros(m, m);
    for r in 0..m {
        for s in r..m {
            let v = trace_triple(slds[r].entries(), slds[s].entries(), state.entries(), n).re;
            h.set(r, s, v);
            h.set(s, r, v);
        }
    }
    Ok(h)
}

/// A positive operator-valued measure: PSD elements summing to identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.dim())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = HermitianMatrix::zeros(dim);
        for (i, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let lo = min_eigenvalue(e)?;
            if lo < -1e-10 {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has eigenvalue {lo:.3e}"
                )));
            }
            sum = sum.add(e)?;
        }
        let defect = sum.sub(&HermitianMatrix::identity(dim))?;
        let max_dev = defect.entries().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if max_dev > 1e-10 {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {max_dev:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// The trivial one-outcome measurement.
    pub fn identity(dim: usize) -> Self {
        Self {
            elements: vec![HermitianMatrix::identity(dim)],
        }
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// The error matrix and its companions for a model and POVM.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Δ = Λ − F(λ̄).
    pub delta: RMat,
    /// Prior covariance Λ.
    pub lambda_cov: RMat,
    /// Fisher information of the outcome distribution at λ̄.
    pub fisher_at_mean: RMat,
    /// Quantum Fisher information at λ̄ (measurement independent).
    pub qfi_at_mean: RMat,
    /// Total mean square error tr Δ.
    pub mse: f64,
}

/// Outcome probabilities and information weights of a POVM on the model:
/// (p(χ), t_χ) with t_{χ r} = tr(E_χ D_r).
fn outcome_table(model: &EffectiveStateModel, povm: &Povm) -> Result<Vec<(f64, Vec<f64>)>> {
    if povm.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: povm.dim(),
        });
    }
    let mut table = Vec::with_capacity(povm.len());
    for e in povm.elements() {
        let p = e.trace_product(model.mean_state.matrix())?;
        let t: Vec<f64> = model
            .direction_operators
            .iter()
            .map(|d| e.trace_product(d))
            .collect::<Result<_>>()?;
        table.push((p, t));
    }
    Ok(table)
}

/// Exact Bayesian error matrix Δ = Λ − Σ_χ t_χ t_χᵀ / p(χ) for the optimal
/// estimator. Outcomes with probability below the cutoff are dropped and
/// must carry negligible information weight.
pub fn bayes_error(model: &EffectiveStateModel, povm: &Povm) -> Result<ErrorReport> {
    let m = model.param_count();
    let mut fisher = RMat::zeros(m, m);
    for (chi, (p, t)) in outcome_table(model, povm)?.into_iter().enumerate() {
        if p < OUTCOME_CUTOFF {
            let worst = t.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if worst > DROPPED_OUTCOME_TOL {
                return Err(Error::IrregularOutcome {
                    outcome: chi,
                    magnitude: worst,
                });
            }
            continue;
        }
        for r in 0..m {
            for s in 0..m {
                fisher.data[r * m + s] += t[r] * t[s] / p;
            }
        }
    }
    let lambda_cov = model.moments.covariance.clone();
    let delta = lambda_cov.sub(&fisher);
    let mse = delta.trace();
    Ok(ErrorReport {
        qfi_at_mean: qfi_at_mean(model)?,
        delta,
        lambda_cov,
        fisher_at_mean: fisher,
        mse,
    })
}

/// The optimal (posterior mean) estimate for one outcome:
/// λ_χ = λ̄ + t_χ / p(χ). Always a probability vector.
pub fn optimal_estimator(
    model: &EffectiveStateModel,
    povm: &Povm,
    outcome: usize,
) -> Result<WeightVector> {
    let table = outcome_table(model, povm)?;
    let (p, t) = table
        .get(outcome)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome {outcome} out of range")))?;
    estimate_from_weights(model, *p, t, outcome)
}

pub(crate) fn estimate_from_weights(
    model: &EffectiveStateModel,
    p: f64,
    t: &[f64],
    outcome: usize,
) -> Result<WeightVector> {
    if p < OUTCOME_CUTOFF {
        return Err(Error::ZeroProbabilityOutcome {
            outcome,
            probability: p,
        });
    }
    let est: Vec<f64> = model
        .moments
        .mean
        .as_slice()
        .iter()
        .zip(t)
        .map(|(&mean, &tr)| mean + tr / p)
        .collect();
    WeightVector::with_tolerance(est, 1e-9)
}

/// Per-outcome optimal estimates; outcomes below the probability cutoff map
/// to `None` (used by the Monte Carlo layer).
pub fn estimator_table(
    model: &EffectiveStateModel,
    povm: &Povm,
) -> Result<Vec<Option<WeightVector>>> {
    let table = outcome_table(model, povm)?;
    table
        .into_iter()
        .enumerate()
        .map(|(chi, (p, t))| {
            if p < OUTCOME_CUTOFF {
                Ok(None)
            } else {
                estimate_from_weights(model, p, &t, chi).map(Some)
            }
        })
        .collect()
}

/// Projective measurement attaining the minimal error for the weight
/// combination aᵀλ: the eigenprojectors of L_a = Σ_r a_r L_r, with
/// eigenvalues merged at tolerance 1e-9 (kernel directions end up in the
/// zero-eigenvalue element).
pub fn optimal_measurement(model: &EffectiveStateModel, direction: &[f64]) -> Result<Povm> {
    if direction.len() != model.param_count() {
        return Err(Error::DimensionMismatch {
            expected: model.param_count(),
            got: direction.len(),
        });
    }
    let sld = sld_at_mean(model)?;
    let terms: Vec<(f64, &HermitianMatrix)> = direction
        .iter()
        .zip(&sld.operators)
        .map(|(&a, l)| (a, l))
        .collect();
    let l_a = HermitianMatrix::linear_combination(&terms)?;
    if l_a.frobenius_norm() < 1e-12 {
        return Err(Error::NoInformation);
    }
    eigenprojector_povm(&l_a)
}

/// POVM of projectors onto the (merged) eigenspaces of a Hermitian operator.
pub fn eigenprojector_povm(op: &HermitianMatrix) -> Result<Povm> {
    let n = op.dim();
    let eig = eig_hermitian(op)?;
    let mut elements = Vec::new();
    let mut k = 0usize;
    while k < n {
        let mut stop = k + 1;
        while stop < n
            && (eig.eigenvalues[stop] - eig.eigenvalues[stop - 1]).abs() <= EIGENVALUE_MERGE_TOL
        {
            stop += 1;
        }
        let mut proj = vec![Complex64::new(0.0, 0.0); n * n];
        for col in k..stop {
            for i in 0..n {
                let vic = eig.vectors[i * n + col];
                for j in 0..n {
                    proj[i * n + j] += vic * eig.vectors[j * n + col].conj();
                }
            }
        }
        elements.push(HermitianMatrix::from_raw_unchecked(n, proj));
        k = stop;
    }
    Povm::new(elements)
}

/// Joint eigenprojectors of the full SLD family. Requires the SLDs to
/// commute (the attainable regime); the resulting von Neumann measurement
/// attains Δ = Λ − H(λ̄) in every weight direction simultaneously.
pub fn sld_projective_povm(model: &EffectiveStateModel) -> Result<Povm> {
    let sld = sld_at_mean(model)?;
    let scale = sld
        .operators
        .iter()
        .map(|l| l.frobenius_norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for r in 0..sld.operators.len() {
        for s in r + 1..sld.operators.len() {
            let c = sld.operators[r].commutator_norm(&sld.operators[s])?;
            if c > 1e-8 * scale * scale {
                return Err(Error::Precondition(format!(
                    "logarithmic derivatives {r} and {s} do not commute (norm {c:.3e}); \
                     no joint projective measurement exists"
                )));
            }
        }
    }
    joint_eigenprojectors(&sld.operators, model.dim())
}

/// Simultaneous eigenprojectors of a commuting Hermitian family, obtained by
/// recursive refinement of invariant subspaces.
fn joint_eigenprojectors(family: &[HermitianMatrix], dim: usize) -> Result<Povm> {
    // Subspaces tracked as orthonormal column sets.
    let mut subspaces: Vec<Vec<Vec<Complex64>>> = vec![(0..dim)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect()];
    for op in family {
        let mut refined = Vec::new();
        for basis in subspaces {
            let k = basis.len();
            if k == 1 {
                refined.push(basis);
                continue;
            }
            // Compress the operator to the subspace.
            let mut compressed = vec![Complex64::new(0.0, 0.0); k * k];
            for a in 0..k {
                for b in 0..k {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..dim {
                        for j in 0..dim {
                            acc += basis[a][i].conj() * op.get(i, j) * basis[b][j];
                        }
                    }
                    compressed[a * k + b] = acc;
                }
            }
            let h = HermitianMatrix::from_raw_unchecked(k, compressed);
            let eig = eig_hermitian(&h)?;
            let mut start = 0usize;
            while start < k {
                let mut stop = start + 1;
                while stop < k
                    && (eig.eigenvalues[stop] - eig.eigenvalues[stop - 1]).abs()
                        <= EIGENVALUE_MERGE_TOL
                {
                    stop += 1;
                }
                let mut cluster = Vec::with_capacity(stop - start);
                for col in start..stop {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    for (a, basis_vec) in basis.iter().enumerate() {
                        let coeff = eig.vectors[a * k + col];
                        for (vi, bi) in v.iter_mut().zip(basis_vec) {
                            *vi += coeff * bi;
                        }
                    }
                    cluster.push(v);
                }
                refined.push(cluster);
                start = stop;
            }
        }
        subspaces = refined;
    }
    let elements: Vec<HermitianMatrix> = subspaces
        .into_iter()
        .map(|basis| {
            let mut proj = vec![Complex64::new(0.0, 0.0); dim * dim];
            for v in &basis {
                for i in 0..dim {
                    for j in 0..dim {
                        proj[i * dim + j] += v[i] * v[j].conj();
                    }
                }
            }
            HermitianMatrix::from_raw_unchecked(dim, proj)
        })
        .collect();
    Povm::new(elements)
}

/// Closed-form flat-prior MSE for a mixture of M orthogonal states and N
/// copies: (M-1) / ((M+1)(M+N)).
pub fn orthogonal_mse(m: u32, n: u32) -> f64 {
    (m as f64 - 1.0) / ((m as f64 + 1.0) * (m as f64 + n as f64))
}

/// MSE of a mixture of mutually orthogonal components under any prior:
/// tr Λ − Σ_α |Λ̃_α|² / ⟨c_α⟩ (the quantum bound is attained).
pub fn orthogonal_mse_general(mix: &GeneralizedMixture, moments: &PriorMoments) -> Result<f64> {
    let comps = mix.components();
    for a in 0..comps.len() {
        for b in a + 1..comps.len() {
            let overlap = comps[a].matrix().trace_product(comps[b].matrix())?;
            if overlap.abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "components {a} and {b} are not orthogonal (tr ρ_a ρ_b = {overlap:.3e})"
                )));
            }
        }
    }
    let mut info = 0.0;
    for (v, &mean_c) in moments.cross.iter().zip(&moments.coeff_mean) {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if mean_c <= 0.0 {
            return Err(Error::ModelInconsistency(
                "a coefficient mean is not positive".into(),
            ));
        }
        info += norm2 / mean_c;
    }
    Ok(moments.covariance.trace() - info)
}
