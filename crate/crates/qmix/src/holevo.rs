//! The Holevo bound and the unidentifiable-mixture pipeline.
//!
//! For an identifiable model with independent parameters (one weight
//! eliminated), the Holevo functional is
//!
//!   C^H(G) = min_X { tr(G Re Z[X]) + tr|√G Im Z[X] √G| },
//!   Z_rs[X] = tr(ρ_λ X_r X_s),
//!
//! minimized over Hermitian tuples X with tr(ρ_λ X_r) = 0 and
//! tr(∂_r ρ_λ X_s) = δ_rs. The constraints are linear in the orthonormal
//! Hermitian operator basis, so the solution set is a least-norm particular
//! tuple plus a shared null space; when the null space is empty the bound is
//! closed-form, otherwise the residual freedom is searched by a
//! derivative-free simplex descent (the objective is convex in X).
//!
//! Unidentifiable mixtures are first rotated by an orthogonal map of weight
//! space into informative parameters ξ (along which the state moves) and
//! redundant parameters η (along which it does not); the error then splits
//! into a prior variance of η that no measurement reduces plus the
//! asymptotic ξ term.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bayes::{qfi_from_sld, sld_for_family};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, matmul, trace_norm, DensityMatrix, HermitianMatrix};
use crate::linalg::{sym_eig, sym_sqrt, zero_sum_basis, RMat};
use crate::mixture::{GeneralizedMixture, WeightVector};
use crate::pointwise::{pointwise_slds, project_and_invert, qfi_pointwise, PointwiseModel};
use crate::prior::{flat_density, for_each_simplex_node, prior_moments, Prior};

/// Rank tolerance for the constraint system and the reparametrization map.
const SINGULAR_TOL: f64 = 1e-9;
/// Relative eigenvalue floor below which a Gram eigenvalue is an exact zero
/// (the f64 noise floor with margin); squared singular tolerances fall
/// below the noise and cannot be used directly.
const GRAM_ZERO_FLOOR: f64 = 1e-12;

/// A state together with the derivatives of a family along independent
/// parameters; the arena the Holevo machinery works in.
#[derive(Debug, Clone)]
pub struct HolevoModel {
    state: DensityMatrix,
    partials: Vec<HermitianMatrix>,
}

impl HolevoModel {
    /// Eliminate one weight of a linear-mixture model: the independent
    /// derivatives become ρ_r − ρ_drop for r ≠ drop_index.
    pub fn from_pointwise(model: &PointwiseModel, drop_index: usize) -> Result<Self> {
        let m = model.param_count();
        if drop_index >= m {
            return Err(Error::InvalidArgument(format!(
                "drop index {drop_index} out of range for {m} weights"
            )));
        }
        let dropped = &model.partials()[drop_index];
        let partials = model
            .partials()
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != drop_index)
            .map(|(_, rho)| rho.sub(dropped))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state: model.state().clone(),
            partials,
        })
    }

    /// A family already expressed in independent parameters (for example the
    /// informative block of a reparametrized unidentifiable mixture).
    pub fn from_family(state: DensityMatrix, partials: Vec<HermitianMatrix>) -> Result<Self> {
        for (t, d) in partials.iter().enumerate() {
            if d.dim() != state.dim() {
                return Err(Error::DimensionMismatch {
                    expected: state.dim(),
                    got: d.dim(),
                });
            }
            if d.trace().abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "parameter derivative {t} has trace {:.3e}",
                    d.trace()
                )));
            }
        }
        Ok(Self { state, partials })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn partials(&self) -> &[HermitianMatrix] {
        &self.partials
    }

    /// Number of independent parameters.
    pub fn param_count(&self) -> usize {
        self.partials.len()
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

/// Solution set of the Holevo constraints: a least-norm particular tuple and
/// an orthonormal basis of the shared homogeneous solution space.
#[derive(Debug, Clone)]
pub struct XFamily {
    /// One particular X_r per independent parameter.
    pub particular: Vec<HermitianMatrix>,
    /// Orthonormal Hermitian operators spanning the null space of the
    /// constraint map (shared by every X_r).
    pub null_basis: Vec<HermitianMatrix>,
    /// Total residual freedom: param_count · null_basis.len().
    pub free_dim: usize,
}

/// Solve tr(ρ X_r) = 0, tr(∂_r ρ X_s) = δ_rs in the orthonormal Hermitian
/// operator basis: least-norm particular solutions plus the common null
/// space. Inconsistent (rank-deficient) constraints signal an
/// unidentifiable model.
pub fn solve_constraints(model: &HolevoModel) -> Result<XFamily> {
    let d = model.dim();
    let d2 = d * d;
    let m = model.param_count();
    // Constraint matrix: first row the state, then the derivatives.
    let mut a = RMat::zeros(m + 1, d2);
    for (j, c) in model.state.matrix().basis_coords().iter().enumerate() {
        a.set(0, j, *c);
    }
    for (r, dop) in model.partials.iter().enumerate() {
        for (j, c) in dop.basis_coords().iter().enumerate() {
            a.set(r + 1, j, *c);
        }
    }
    let aat = a.matmul(&a.transpose());
    // Full row rank is exactly identifiability of the reduced family.
    {
        let (w, _) = sym_eig(&aat)?;
        let wmax = w.last().copied().unwrap_or(0.0).max(0.0);
        let rank = w
            .iter()
            .filter(|&&x| x > GRAM_ZERO_FLOOR * wmax.max(1e-300))
            .count();
        if rank != m + 1 {
            return Err(Error::RankDeficient {
                rank,
                expected: m + 1,
                hint: "constraints are inconsistent (unidentifiable model); reparametrize",
            });
        }
    }
    let at = a.transpose();
    let mut particular = Vec::with_capacity(m);
    for s in 0..m {
        let mut rhs = vec![0.0; m + 1];
        rhs[s + 1] = 1.0;
        let y = aat.solve(&rhs)?;
        let coords = at.matvec(&y);
        particular.push(HermitianMatrix::from_basis_coords(d, &coords));
    }
    // Null space via the orthogonal projector I − Aᵀ(AAᵀ)⁻¹A, whose
    // eigenvalues are cleanly 0 or 1.
    let mut proj = RMat::identity(d2);
    for s in 0..m + 1 {
        let mut rhs = vec![0.0; m + 1];
        rhs[s] = 1.0;
        let y = aat.solve(&rhs)?;
        let col = at.matvec(&y);
        // proj -= (Aᵀ (AAᵀ)⁻¹ e_s) (row s of A)
        for i in 0..d2 {
            for j in 0..d2 {
                proj.data[i * d2 + j] -= col[i] * a.get(s, j);
            }
        }
    }
    let (w, v) = sym_eig(&proj)?;
    let mut null_basis = Vec::new();
    for k in 0..d2 {
        if w[k] < 0.5 {
            continue;
        }
        let coords: Vec<f64> = (0..d2).map(|i| v.get(i, k)).collect();
        null_basis.push(HermitianMatrix::from_basis_coords(d, &coords));
    }
    let free_dim = m * null_basis.len();
    Ok(XFamily {
        particular,
        null_basis,
        free_dim,
    })
}

/// The Gram-type matrix Z_rs = tr(ρ_λ X_r X_s), split into its real
/// (symmetric, PSD) and imaginary (antisymmetric) parts.
#[derive(Debug, Clone)]
pub struct ZMatrix {
    pub re: RMat,
    pub im: RMat,
}

pub fn z_matrix(model: &HolevoModel, xs: &[HermitianMatrix]) -> Result<ZMatrix> {
    let m = xs.len();
    let d = model.dim();
    for x in xs {
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
    }
    let mut re = RMat::zeros(m, m);
    let mut im = RMat::zeros(m, m);
    let rho = model.state.matrix().entries();
    // Z_rs = tr(ρ X_r X_s): evaluate ρ X_r once per row.
    for r in 0..m {
        let rho_xr = matmul(rho, xs[r].entries(), d);
        for s in 0..m {
            let mut z = num_complex::Complex64::new(0.0, 0.0);
            let xs_e = xs[s].entries();
            for i in 0..d {
                for j in 0..d {
                    z += rho_xr[i * d + j] * xs_e[j * d + i];
                }
            }
            re.set(r, s, z.re);
            im.set(r, s, z.im);
        }
    }
    // Enforce the exact symmetries against rounding.
    for r in 0..m {
        for s in 0..r {
            let sym = 0.5 * (re.get(r, s) + re.get(s, r));
            re.set(r, s, sym);
            re.set(s, r, sym);
            let asym = 0.5 * (im.get(r, s) - im.get(s, r));
            im.set(r, s, asym);
            im.set(s, r, -asym);
        }
        im.set(r, r, 0.0);
    }
    Ok(ZMatrix { re, im })
}

/// The Holevo functional tr(G Re Z) + tr|√G Im Z √G| for a PSD weight G.
pub fn holevo_objective(g: &RMat, z: &ZMatrix) -> Result<f64> {
    let sqrt_g = sym_sqrt(g)?;
    objective_with_sqrt(g, &sqrt_g, z)
}

fn objective_with_sqrt(g: &RMat, sqrt_g: &RMat, z: &ZMatrix) -> Result<f64> {
    let m = z.re.rows;
    let mut smooth = 0.0;
    for r in 0..m {
        for s in 0..m {
            smooth += g.get(r, s) * z.re.get(s, r);
        }
    }
    let k = sqrt_g.matmul(&z.im).matmul(sqrt_g);
    // K is real antisymmetric, so iK is Hermitian with the same singular values.
    let ik = HermitianMatrix::from_raw_unchecked(
        m,
        k.data
            .iter()
            .map(|&x| num_complex::Complex64::new(0.0, x))
            .collect(),
    );
    Ok(smooth + trace_norm(&ik)?)
}

/// Result of the constrained minimization.
#[derive(Debug, Clone, Copy)]
pub struct HolevoBound {
    /// The minimized functional (best value found when not converged).
    pub value: f64,
    /// Whether the search met its convergence window.
    pub converged: bool,
    /// Residual freedom of the constraint solution set.
    pub free_dim: usize,
}

/// Convergence window: stop once the best value improves by less than this
/// over 50·free_dim consecutive steps.
const OBJECTIVE_TOL: f64 = 1e-10;
const RESTARTS: usize = 8;

/// The Holevo bound C^H(G): closed form when the constraints fix X
/// uniquely, otherwise a restarted derivative-free simplex descent over the
/// null-space coordinates.
pub fn holevo_bound(model: &HolevoModel, g: &RMat) -> Result<HolevoBound> {
    Ok(minimize_holevo(model, g, RESTARTS)?.0)
}

/// Like [`holevo_bound`], also returning the minimizing operator tuple.
pub fn holevo_bound_with_minimizer(
    model: &HolevoModel,
    g: &RMat,
) -> Result<(HolevoBound, Vec<HermitianMatrix>)> {
    minimize_holevo(model, g, RESTARTS)
}

/// Reduced-restart variant for quadrature loops: the objective is convex in
/// X, so descents from the least-norm point and from the SLD-built feasible
/// point reach the minimum; the extra random restarts in [`holevo_bound`]
/// are redundancy against stalls.
pub(crate) fn holevo_bound_fast(model: &HolevoModel, g: &RMat) -> Result<HolevoBound> {
    Ok(minimize_holevo(model, g, 1)?.0)
}

/// The SLD-built feasible tuple X_r = Σ_s (H⁻¹)_rs L_s. It satisfies the
/// constraints whenever the reduced quantum Fisher matrix H is invertible,
/// attains Re Z[X] = H⁻¹ identically, and is the exact minimizer whenever
/// the imaginary part vanishes there (real families, commuting SLDs).
fn sld_candidate(model: &HolevoModel) -> Result<Option<Vec<HermitianMatrix>>> {
    let eig = eig_hermitian(model.state.matrix())?;
    let sld = match sld_for_family(&eig, &model.partials) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let h = qfi_from_sld(model.state.matrix(), &sld.operators)?;
    let m = model.param_count();
    let mut xs = Vec::with_capacity(m);
    for r in 0..m {
        let mut rhs = vec![0.0; m];
        rhs[r] = 1.0;
        let hinv_row = match h.solve(&rhs) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        let terms: Vec<(f64, &HermitianMatrix)> = hinv_row
            .iter()
            .zip(&sld.operators)
            .map(|(&c, l)| (c, l))
            .collect();
        xs.push(HermitianMatrix::linear_combination(&terms)?);
    }
    Ok(Some(xs))
}

fn minimize_holevo(
    model: &HolevoModel,
    g: &RMat,
    total_restarts: usize,
) -> Result<(HolevoBound, Vec<HermitianMatrix>)> {
    let m = model.param_count();
    if g.rows != m || g.cols != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: g.rows,
        });
    }
    let family = solve_constraints(model)?;
    let sqrt_g = sym_sqrt(g)?;
    if family.free_dim == 0 {
        let z = z_matrix(model, &family.particular)?;
        let bound = HolevoBound {
            value: objective_with_sqrt(g, &sqrt_g, &z)?,
            converged: true,
            free_dim: 0,
        };
        return Ok((bound, family.particular));
    }

    let nb = family.null_basis.len();
    let assemble = |c: &[f64]| -> Result<Vec<HermitianMatrix>> {
        (0..m)
            .map(|s| {
                let mut terms: Vec<(f64, &HermitianMatrix)> = vec![(1.0, &family.particular[s])];
                for (t, v) in family.null_basis.iter().enumerate() {
                    terms.push((c[s * nb + t], v));
                }
                HermitianMatrix::linear_combination(&terms)
            })
            .collect()
    };
    let objective = |c: &[f64]| -> Result<f64> {
        let xs = assemble(c)?;
        let z = z_matrix(model, &xs)?;
        objective_with_sqrt(g, &sqrt_g, &z)
    };

    // Deterministic starts: the least-norm point and the SLD-built point
    // (when feasible), then seeded random starts.
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; family.free_dim]];
    if let Some(xs) = sld_candidate(model)? {
        let mut coords = vec![0.0; family.free_dim];
        let mut inside_span = true;
        for s in 0..m {
            let diff = xs[s].sub(&family.particular[s])?;
            let mut residual = diff.clone();
            for (t, v) in family.null_basis.iter().enumerate() {
                let c = v.trace_product(&diff)?;
                coords[s * nb + t] = c;
                residual = residual.sub(&v.scale(c))?;
            }
            if residual.frobenius_norm() > 1e-8 * (1.0 + diff.frobenius_norm()) {
                inside_span = false;
                break;
            }
        }
        if inside_span {
            starts.push(coords);
        }
    }
    let scale = family
        .particular
        .iter()
        .map(|x| x.frobenius_norm())
        .fold(1.0f64, f64::max);
    let mut rng = ChaCha12Rng::seed_from_u64(0x4f5e_c0de);
    while starts.len() < total_restarts {
        starts.push(
            (0..family.free_dim)
                .map(|_| rng.gen_range(-0.5..0.5) * scale)
                .collect(),
        );
    }

    let mut best_value = f64::INFINITY;
    let mut best_coords = vec![0.0; family.free_dim];
    let mut any_converged = false;
    for start in &starts {
        let (value, point, converged) =
            nelder_mead(&objective, start, 0.3 * scale, family.free_dim)?;
        if value < best_value {
            best_value = value;
            best_coords = point;
        }
        any_converged |= converged;
    }
    let best_xs = assemble(&best_coords)?;
    let bound = HolevoBound {
        value: best_value,
        converged: any_converged,
        free_dim: family.free_dim,
    };
    Ok((bound, best_xs))
}

/// Derivative-free simplex descent (reflection / expansion / contraction /
/// shrink). Returns (best value, converged flag).
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    start: &[f64],
    step: f64,
    free_dim: usize,
) -> Result<(f64, Vec<f64>, bool)> {
    let dim = start.len();
    let window = 50 * free_dim.max(1);
    let max_iters = 600 * free_dim.max(1) + 200;

    let mut points: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| f(p)).collect::<Result<_>>()?;

    let mut best_so_far = f64::INFINITY;
    let mut stale = 0usize;
    let mut converged = false;
    for _ in 0..max_iters {
        // order ascending by value
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let points_sorted: Vec<Vec<f64>> = order.iter().map(|&i| points[i].clone()).collect();
        let values_sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        points = points_sorted;
        values = values_sorted;

        if values[0] < best_so_far - OBJECTIVE_TOL {
            best_so_far = values[0];
            stale = 0;
        } else {
            stale += 1;
            if stale >= window {
                converged = true;
                break;
            }
        }

        // centroid of all but the worst
        let worst = points.len() - 1;
        let mut centroid = vec![0.0; dim];
        for p in points.iter().take(worst) {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= worst as f64;
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };
        // reflection
        let reflected = blend(&centroid, &points[worst], -1.0);
        let fr = f(&reflected)?;
        if fr < values[0] {
            let expanded = blend(&centroid, &points[worst], -2.0);
            let fe = f(&expanded)?;
            if fe < fr {
                points[worst] = expanded;
                values[worst] = fe;
            } else {
                points[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[worst - 1] {
            points[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        // contraction
        let contracted = blend(&centroid, &points[worst], 0.5);
        let fc = f(&contracted)?;
        if fc < values[worst] {
            points[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best point
        for i in 1..points.len() {
            points[i] = blend(&points[0], &points[i], 0.5);
            values[i] = f(&points[i])?;
        }
    }
    let mut best = f64::INFINITY;
    let mut best_point = start.to_vec();
    for (p, &v) in points.iter().zip(&values) {
        if v < best {
            best = v;
            best_point = p.clone();
        }
    }
    Ok((best, best_point, converged))
}

/// Prior-averaged Holevo coefficient with its convergence bookkeeping.
#[derive(Debug, Clone)]
pub struct AveragedHolevo {
    /// ∫ π(λ) C^H_λ(G) dλ, the coefficient of 1/N in the asymptotic error.
    pub coefficient: f64,
    /// False if the inner minimization failed to converge at any node.
    pub all_converged: bool,
    /// The asymptotic averaging rests on heuristic arguments; see text.
    pub caveat: &'static str,
}

pub const AVERAGED_HOLEVO_CAVEAT: &str =
    "prior-averaging the pointwise Holevo bound is heuristic: attainability is \
     proven pointwise, the averaged statement has no rigorous proof";

/// Average the Holevo bound over the prior:
/// E = (1/N) ∫ π(λ) C^H_λ(G) dλ + o(1/N). Reported as the 1/N coefficient.
pub fn averaged_holevo_mse(
    mix: &GeneralizedMixture,
    prior: &Prior,
    g: &RMat,
    resolution: usize,
) -> Result<AveragedHolevo> {
    let m = mix.param_count();
    if prior.param_count() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: prior.param_count(),
        });
    }
    let norm = flat_density(m);
    let mut acc = 0.0f64;
    let mut all_converged = true;
    let mut failure: Option<Error> = None;
    let count = for_each_simplex_node(m, resolution, &mut |node| {
        if failure.is_some() {
            return;
        }
        let result = WeightVector::new(node.to_vec())
            .and_then(|lambda| PointwiseModel::new(mix, lambda))
            .and_then(|pw| HolevoModel::from_pointwise(&pw, m - 1))
            .and_then(|hm| holevo_bound_fast(&hm, g));
        match result {
            Ok(bound) => {
                all_converged &= bound.converged;
                acc += bound.value * prior.density(node) / norm;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(AveragedHolevo {
        coefficient: acc / count as f64,
        all_converged,
        caveat: AVERAGED_HOLEVO_CAVEAT,
    })
}

/// Outcome of the pointwise CR-versus-Holevo comparison.
#[derive(Debug, Clone, Copy)]
pub struct CrHolevoCheck {
    /// Frobenius distance between the restricted inverse of H_1 and the
    /// solved Re Z[X], both expressed in full weight coordinates.
    pub distance: f64,
    /// Largest operator norm among the SLD commutators [L_r, L_s].
    pub max_commutator_norm: f64,
}

/// Check the identity (P_S H_1 P_S)⁺ = J Re Z[X] Jᵀ, where J is the
/// weight-elimination Jacobian, and report how non-commuting the SLDs are
/// (when the commutators vanish the quantum Cramér-Rao bound itself is
/// attainable). X is the unique constraint solution when free_dim = 0 and
/// the minimizer of the Holevo functional otherwise.
pub fn cr_holevo_relation_check(model: &PointwiseModel) -> Result<CrHolevoCheck> {
    let m = model.param_count();
    let hm = HolevoModel::from_pointwise(model, m - 1)?;
    let family = solve_constraints(&hm)?;
    let xs = if family.free_dim == 0 {
        family.particular
    } else {
        holevo_bound_with_minimizer(&hm, &RMat::identity(m - 1))?.1
    };
    let z = z_matrix(&hm, &xs)?;
    // Lift Re Z to full weight coordinates with the elimination Jacobian
    // J: λ_r -> e_r − e_M.
    let mut jac = RMat::zeros(m, m - 1);
    for r in 0..m - 1 {
        jac.set(r, r, 1.0);
        jac.set(m - 1, r, -1.0);
    }
    let lifted = jac.matmul(&z.re).matmul(&jac.transpose());
    let h = qfi_pointwise(model)?;
    let restricted_inverse = project_and_invert(&h)?.pseudo_inverse;
    let distance = lifted.sub(&restricted_inverse).frobenius_norm();

    let slds = pointwise_slds(model)?;
    let mut max_comm: f64 = 0.0;
    for r in 0..m {
        for s in r + 1..m {
            max_comm = max_comm.max(slds.operators[r].commutator_norm(&slds.operators[s])?);
        }
    }
    Ok(CrHolevoCheck {
        distance,
        max_commutator_norm: max_comm,
    })
}

/// Orthogonal rotation of weight space splitting informative from redundant
/// directions (rows: ξ first, then η, then the normalization direction
/// u/√M).
#[derive(Debug, Clone)]
pub struct Reparametrization {
    /// The full M x M orthogonal map; row t is the t-th new coordinate.
    pub orthogonal_map: RMat,
    /// Number of informative (ξ) rows.
    pub informative_count: usize,
    /// Number of redundant (η) rows, the normalization row excluded.
    pub redundant_count: usize,
}

impl Reparametrization {
    pub fn xi_rows(&self) -> Vec<&[f64]> {
        (0..self.informative_count)
            .map(|t| self.orthogonal_map.row(t))
            .collect()
    }

    pub fn eta_rows(&self) -> Vec<&[f64]> {
        (self.informative_count..self.informative_count + self.redundant_count)
            .map(|t| self.orthogonal_map.row(t))
            .collect()
    }

    /// Derivatives of the state along the informative coordinates:
    /// D_t = Σ_r O_{t r} ρ_r.
    pub fn xi_partials(&self, mix: &GeneralizedMixture) -> Result<Vec<HermitianMatrix>> {
        (0..self.informative_count)
            .map(|t| {
                let row = self.orthogonal_map.row(t);
                let terms: Vec<(f64, &HermitianMatrix)> = row
                    .iter()
                    .zip(mix.components())
                    .map(|(&c, rho)| (c, rho.matrix()))
                    .collect();
                HermitianMatrix::linear_combination(&terms)
            })
            .collect()
    }
}

/// Build the orthogonal reparametrization of a linear mixture: ξ rows are
/// the zero-sum directions along which the state moves (singular directions
/// of the restricted state map), η rows the zero-sum kernel directions, and
/// the final row is u/√M. Identifiable mixtures get zero η rows.
pub fn reparametrize(mix: &GeneralizedMixture) -> Result<Reparametrization> {
    if !mix.is_linear() {
        return Err(Error::Precondition(
            "reparametrization is defined for linear mixtures".into(),
        ));
    }
    let m = mix.param_count();
    let d2 = mix.dim() * mix.dim();
    let mut b = RMat::zeros(d2, m);
    for (r, rho) in mix.components().iter().enumerate() {
        for (i, &c) in rho.matrix().basis_coords().iter().enumerate() {
            b.set(i, r, c);
        }
    }
    let w = zero_sum_basis(m);
    let bz = b.matmul(&w);
    let gram = bz.transpose().matmul(&bz);
    let (eigs, vecs) = sym_eig(&gram)?;
    // Ascending eigenvalues: kernel directions first, informative last.
    let mut xi: Vec<Vec<f64>> = Vec::new();
    let mut eta: Vec<Vec<f64>> = Vec::new();
    for k in (0..m - 1).rev() {
        let sv = eigs[k].max(0.0).sqrt();
        let y: Vec<f64> = (0..m - 1).map(|i| vecs.get(i, k)).collect();
        let mut row = w.matvec(&y);
        let lead = row
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        if sv > SINGULAR_TOL {
            xi.push(row);
        } else {
            eta.push(row);
        }
    }
    let informative_count = xi.len();
    let redundant_count = eta.len();
    let mut rows = xi;
    rows.extend(eta);
    rows.push(vec![1.0 / (m as f64).sqrt(); m]);
    let orthogonal_map = RMat::from_rows(&rows);
    Ok(Reparametrization {
        orthogonal_map,
        informative_count,
        redundant_count,
    })
}

/// Error decomposition of an unidentifiable mixture: a constant intrinsic
/// term from the redundant directions plus the asymptotic informative term.
#[derive(Debug, Clone)]
pub struct UnidentifiableError {
    /// Prior variance of the redundant coordinates (best constant guess).
    pub intrinsic: f64,
    /// ∫ π(λ) C^H_ξ(λ)(I) dλ, the coefficient of 1/N.
    pub asymptotic_coeff: f64,
    /// intrinsic + asymptotic_coeff / N.
    pub total: f64,
    /// Convergence of the inner minimizations across quadrature nodes.
    pub all_converged: bool,
}

/// Split the estimation error of a (possibly unidentifiable) mixture into
/// the intrinsic redundant-direction variance and the asymptotic
/// informative term, averaged over the prior.
pub fn unidentifiable_error(
    mix: &GeneralizedMixture,
    prior: &Prior,
    n_copies: u32,
    resolution: usize,
) -> Result<UnidentifiableError> {
    if n_copies == 0 {
        return Err(Error::InvalidArgument(
            "the number of copies must be at least 1".into(),
        ));
    }
    let rep = reparametrize(mix)?;
    let moments = prior_moments(prior, mix)?;
    let intrinsic: f64 = rep
        .eta_rows()
        .iter()
        .map(|row| moments.variance_along(row))
        .sum();

    let partials = rep.xi_partials(mix)?;
    let g = RMat::identity(rep.informative_count);
    let m = mix.param_count();
    let norm = flat_density(m);
    let mut acc = 0.0f64;
    let mut all_converged = true;
    let mut failure: Option<Error> = None;
    let count = for_each_simplex_node(m, resolution, &mut |node| {
        if failure.is_some() {
            return;
        }
        let result = WeightVector::new(node.to_vec())
            .and_then(|lambda| mix.average_state(&lambda))
            .and_then(|state| HolevoModel::from_family(state, partials.clone()))
            .and_then(|hm| holevo_bound_fast(&hm, &g));
        match result {
            Ok(bound) => {
                all_converged &= bound.converged;
                acc += bound.value * prior.density(node) / norm;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let asymptotic_coeff = acc / count as f64;
    Ok(UnidentifiableError {
        intrinsic,
        asymptotic_coeff,
        total: intrinsic + asymptotic_coeff / n_copies as f64,
        all_converged,
    })
}
