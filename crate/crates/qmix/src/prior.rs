//! Priors over the weight simplex and their moments.
//!
//! Flat-prior averages of polynomials are exact: the moment of a monomial
//! Π λ_r^{k_r} over the simplex is Π k_r! / (M-1+Σk_r)!, evaluated in
//! integer arithmetic and converted to floating point once. Non-polynomial
//! integrands go through a deterministic midpoint-style quadrature on a
//! centered barycentric lattice, which never touches the simplex boundary.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::exact;
use crate::linalg::RMat;
use crate::mixture::{
    for_each_composition, CoefficientPolynomial, GeneralizedMixture, WeightVector,
};

/// Default quadrature resolution (cells per edge).
pub const DEFAULT_RESOLUTION: usize = 200;

/// Exponent total up to which factorial ratios stay in exact integers.
const EXACT_FACTORIAL_LIMIT: u64 = 40;

/// Flat-prior moment of the monomial Π λ_r^{k_r} over the unit simplex:
/// Π k_r! / (M-1+Σk_r)! (the Lebesgue integral, not yet normalized by the
/// flat density (M-1)!).
pub fn dirichlet_moment(exponents: &[u32]) -> f64 {
    let m = exponents.len() as u64;
    let total: u64 = exponents.iter().map(|&k| k as u64).sum();
    if m - 1 + total <= EXACT_FACTORIAL_LIMIT {
        let num: BigUint = exponents
            .iter()
            .map(|&k| exact::factorial(k as u64))
            .product();
        let den = exact::factorial(m - 1 + total);
        exact::biguint_ratio_to_f64(&num, &den)
    } else {
        let log_num: f64 = exponents
            .iter()
            .map(|&k| exact::ln_gamma(k as f64 + 1.0))
            .sum();
        let log_den = exact::ln_gamma((m - 1 + total) as f64 + 1.0);
        (log_num - log_den).exp()
    }
}

/// Flat-prior average of a polynomial: (M-1)! Σ coeff · moment(exponents).
/// Exact up to final rounding.
pub fn flat_average_polynomial(p: &CoefficientPolynomial) -> f64 {
    let m = p.nvars();
    let norm = exact::biguint_ratio_to_f64(&exact::factorial(m as u64 - 1), &BigUint::from(1u32));
    norm * p
        .terms()
        .map(|(exps, coeff)| coeff * dirichlet_moment(exps))
        .sum::<f64>()
}

/// Visit the nodes of the centered barycentric lattice with `resolution`
/// cells per edge; every node is strictly interior and all nodes carry equal
/// weight 1/count. `f` receives the node coordinates.
pub fn for_each_simplex_node(
    m: usize,
    resolution: usize,
    f: &mut impl FnMut(&[f64]),
) -> Result<usize> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(
            "quadrature resolution must be at least 2".into(),
        ));
    }
    let k_total = (resolution - 1) as u32;
    let denom = (2 * k_total as usize + m) as f64;
    let mut count = 0usize;
    let mut node = vec![0.0f64; m];
    for_each_composition(k_total, m, &mut |k| {
        for (x, &ki) in node.iter_mut().zip(k) {
            *x = (2.0 * ki as f64 + 1.0) / denom;
        }
        f(&node);
        count += 1;
    });
    Ok(count)
}

/// Deterministic flat-prior average of `f` over the open simplex
/// (equal-weight midpoint rule; the value for f ≡ 1 is exactly 1).
pub fn simplex_quadrature(f: impl Fn(&[f64]) -> f64, m: usize, resolution: usize) -> Result<f64> {
    let mut acc = 0.0f64;
    let count = for_each_simplex_node(m, resolution, &mut |node| {
        acc += f(node);
    })?;
    Ok(acc / count as f64)
}

/// A prior distribution over the weight simplex.
#[derive(Clone)]
pub struct Prior {
    m: usize,
    kind: PriorKind,
}

#[derive(Clone)]
enum PriorKind {
    Flat,
    /// Polynomial density; moments are exact.
    Polynomial(CoefficientPolynomial),
    /// Black-box density; moments go through quadrature.
    Custom {
        density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        resolution: usize,
    },
}

impl std::fmt::Debug for Prior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            PriorKind::Flat => write!(f, "Prior::flat({})", self.m),
            PriorKind::Polynomial(_) => write!(f, "Prior::polynomial({})", self.m),
            PriorKind::Custom { resolution, .. } => {
                write!(f, "Prior::custom({}, resolution {})", self.m, resolution)
            }
        }
    }
}

impl Prior {
    /// The flat (uniform) prior, density (M-1)! on the simplex.
    pub fn flat(m: usize) -> Self {
        Self {
            m,
            kind: PriorKind::Flat,
        }
    }

    /// A polynomial density. The density must integrate to 1 over the
    /// simplex (verified exactly, tolerance 1e-10) and be nonnegative on a
    /// deterministic sample of interior points.
    pub fn polynomial(density: CoefficientPolynomial) -> Result<Self> {
        let m = density.nvars();
        let norm = flat_average_polynomial(&density) / flat_density(m);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { integral: norm });
        }
        let mut min_seen = f64::INFINITY;
        for_each_simplex_node(m, 13, &mut |node| {
            min_seen = min_seen.min(density.evaluate(node));
        })?;
        if min_seen < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "polynomial density is negative ({min_seen:.3e}) on the simplex"
            )));
        }
        Ok(Self {
            m,
            kind: PriorKind::Polynomial(density),
        })
    }

    /// A black-box density; normalization is verified by quadrature at the
    /// given resolution (tolerance 1e-3) rather than silently repaired.
    pub fn custom(
        m: usize,
        density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        resolution: usize,
    ) -> Result<Self> {
        let density = Arc::new(density);
        let integral = simplex_quadrature(|x| density(x), m, resolution)? / flat_density(m);
        if (integral - 1.0).abs() > 1e-3 {
            return Err(Error::NotNormalized { integral });
        }
        Ok(Self {
            m,
            kind: PriorKind::Custom {
                density,
                resolution,
            },
        })
    }

    pub fn param_count(&self) -> usize {
        self.m
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, PriorKind::Flat)
    }

    /// Density value at a simplex point.
    pub fn density(&self, point: &[f64]) -> f64 {
        match &self.kind {
            PriorKind::Flat => flat_density(self.m),
            PriorKind::Polynomial(p) => p.evaluate(point),
            PriorKind::Custom { density, .. } => density(point),
        }
    }

    /// ⟨g⟩_π for a polynomial integrand g; exact for flat and polynomial
    /// priors, quadrature for black-box densities.
    pub fn average_polynomial(&self, g: &CoefficientPolynomial) -> Result<f64> {
        if g.nvars() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: g.nvars(),
            });
        }
        match &self.kind {
            PriorKind::Flat => Ok(flat_average_polynomial(g)),
            PriorKind::Polynomial(p) => {
                Ok(flat_average_polynomial(&g.mul(p)) / flat_density(self.m))
            }
            PriorKind::Custom {
                density,
                resolution,
            } => Ok(
                simplex_quadrature(|x| g.evaluate(x) * density(x), self.m, *resolution)?
                    / flat_density(self.m),
            ),
        }
    }

    /// ⟨f⟩_π for a black-box integrand, by quadrature (exact priors still
    /// use their density pointwise).
    pub fn average_fn(&self, f: impl Fn(&[f64]) -> f64, resolution: usize) -> Result<f64> {
        let norm = flat_density(self.m);
        simplex_quadrature(|x| f(x) * self.density(x) / norm, self.m, resolution)
    }
}

/// The flat density value (M-1)!.
pub fn flat_density(m: usize) -> f64 {
    exact::biguint_ratio_to_f64(&exact::factorial(m as u64 - 1), &BigUint::from(1u32))
}

/// First and second weight moments plus the coefficient cross-moments of a
/// prior for a given mixture.
#[derive(Debug, Clone)]
pub struct PriorMoments {
    /// Prior mean of the weights.
    pub mean: WeightVector,
    /// Covariance matrix Λ of the weights (M x M, PSD, rows sum to zero).
    pub covariance: RMat,
    /// One cross-moment vector per mixture component α:
    /// ⟨λ c_α(λ)⟩ - ⟨λ⟩⟨c_α(λ)⟩.
    pub cross: Vec<Vec<f64>>,
    /// ⟨c_α(λ)⟩ per component.
    pub coeff_mean: Vec<f64>,
}

impl PriorMoments {
    pub fn param_count(&self) -> usize {
        self.mean.len()
    }

    /// Prior variance of the linear functional aᵀλ.
    pub fn variance_along(&self, a: &[f64]) -> f64 {
        let v = self.covariance.matvec(a);
        a.iter().zip(&v).map(|(x, y)| x * y).sum()
    }
}

/// Compute mean, covariance and coefficient cross-moments of `prior` for the
/// coefficient functions of `mix`.
pub fn prior_moments(prior: &Prior, mix: &GeneralizedMixture) -> Result<PriorMoments> {
    let m = mix.param_count();
    if prior.param_count() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: prior.param_count(),
        });
    }
    let var = |r: usize| CoefficientPolynomial::variable(m, r);

    let mean_raw: Vec<f64> = (0..m)
        .map(|r| prior.average_polynomial(&var(r)))
        .collect::<Result<_>>()?;
    let mean = WeightVector::with_tolerance(mean_raw.clone(), 1e-9)?;

    let mut covariance = RMat::zeros(m, m);
    for r in 0..m {
        for s in r..m {
            let second = prior.average_polynomial(&var(r).mul(&var(s)))?;
            let c = second - mean_raw[r] * mean_raw[s];
            covariance.set(r, s, c);
            covariance.set(s, r, c);
        }
    }

    let mut coeff_mean = Vec::with_capacity(mix.coefficients().len());
    let mut cross = Vec::with_capacity(mix.coefficients().len());
    for c_alpha in mix.coefficients() {
        let mean_c = prior.average_polynomial(c_alpha)?;
        let mut v = Vec::with_capacity(m);
        for r in 0..m {
            let joint = prior.average_polynomial(&c_alpha.mul(&var(r)))?;
            v.push(joint - mean_raw[r] * mean_c);
        }
        coeff_mean.push(mean_c);
        cross.push(v);
    }

    Ok(PriorMoments {
        mean,
        covariance,
        cross,
        coeff_mean,
    })
}

/// Closed-form flat-prior covariance Λ_rs = (δ_rs - 1/M) / (M (M+1)).
pub fn flat_covariance(m: usize) -> RMat {
    let mut out = RMat::zeros(m, m);
    let mf = m as f64;
    for r in 0..m {
        for s in 0..m {
            let delta = if r == s { 1.0 } else { 0.0 };
            out.set(r, s, (delta - 1.0 / mf) / (mf * (mf + 1.0)));
        }
    }
    out
}

/// Closed-form flat-prior coefficient mean for the N-copy expansion:
/// ⟨c_k⟩ = 1 / C(N+M-1, N) for every occupation vector.
pub fn flat_multicopy_coeff_mean(n: u32, m: usize) -> f64 {
    let c = exact::binomial((n as u64) + (m as u64) - 1, n as u64);
    exact::biguint_ratio_to_f64(&BigUint::from(1u32), &c)
}

/// Closed-form flat-prior cross moment for the N-copy expansion:
/// (k_r - N/M) / (N+M) · ⟨c_k⟩.
pub fn flat_multicopy_cross(k: &[u32], n: u32, m: usize) -> Vec<f64> {
    let mean_c = flat_multicopy_coeff_mean(n, m);
    k.iter()
        .map(|&kr| (kr as f64 - n as f64 / m as f64) / (n as f64 + m as f64) * mean_c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn dirichlet_moment_values() {
        assert!((dirichlet_moment(&[1, 0]) - 0.5).abs() < 1e-15);
        // all-zero exponents: flat normalization (M-1)! * moment = 1
        for m in 2..6 {
            let z = vec![0u32; m];
            let val = dirichlet_moment(&z);
            assert!((flat_density(m) * val - 1.0).abs() < 1e-13);
        }
        assert!((dirichlet_moment(&[1, 1, 0]) - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn dirichlet_moment_large_exponents_fall_back_smoothly() {
        // straddle the exact/log-gamma switchover
        let below = dirichlet_moment(&[38, 0]); // 38! / 39!
        assert!((below - 1.0 / 39.0).abs() < 1e-15);
        let above = dirichlet_moment(&[60, 0]); // 60! / 61!
        assert!((above - 1.0 / 61.0).abs() / (1.0 / 61.0) < 1e-11);
    }

    #[test]
    fn flat_average_values() {
        for m in 2..5 {
            let p = CoefficientPolynomial::variable(m, 0);
            assert!((flat_average_polynomial(&p) - 1.0 / m as f64).abs() < 1e-14);
        }
        let sq = CoefficientPolynomial::monomial(vec![2, 0], 1.0);
        assert!((flat_average_polynomial(&sq) - 1.0 / 3.0).abs() < 1e-14);
        for m in 2..5 {
            let mut p = CoefficientPolynomial::constant(m, 1.0);
            for r in 0..m {
                let mut e = vec![0u32; m];
                e[r] = 2;
                p = p.add(&CoefficientPolynomial::monomial(e, -1.0));
            }
            let expected = (m as f64 - 1.0) / (m as f64 + 1.0);
            assert!((flat_average_polynomial(&p) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_constant_is_exact() {
        for m in 1..5 {
            let v = simplex_quadrature(|_| 1.0, m, 37).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_polynomial_m4() {
        let f = |x: &[f64]| 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        let v = simplex_quadrature(f, 4, DEFAULT_RESOLUTION).unwrap();
        assert!((v - 0.6).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn quadrature_tetrahedron_imaginary_part() {
        let v = simplex_quadrature(models::tetrahedron_im_trace, 4, DEFAULT_RESOLUTION).unwrap();
        assert!((v - 0.43).abs() < 5e-3, "got {v}");
    }

    #[test]
    fn quadrature_converges_under_doubling() {
        let f = |x: &[f64]| 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        for m in 2..5 {
            let exact_val = (m as f64 - 1.0) / (m as f64 + 1.0);
            let mut last = f64::INFINITY;
            for res in [25usize, 50, 100] {
                let err = (simplex_quadrature(f, m, res).unwrap() - exact_val).abs();
                assert!(err <= last + 1e-15, "m {m} res {res}");
                last = err;
            }
            assert!(last < 1e-3);
        }
    }

    #[test]
    fn flat_moments_match_closed_forms() {
        let mix = models::orthogonal_mixture(2, 2).unwrap();
        let pm = prior_moments(&Prior::flat(2), &mix).unwrap();
        assert!((pm.covariance.get(0, 0) - 1.0 / 12.0).abs() < 1e-14);

        // N = 1 multicopy: first cross entry for k = (1,0) is 1/12
        let expanded = mix.multicopy_expand(1).unwrap();
        let pm = prior_moments(&Prior::flat(2), &expanded).unwrap();
        assert!((pm.cross[0][0] - 1.0 / 12.0).abs() < 1e-14);

        let mix3 = models::orthogonal_mixture(3, 3).unwrap();
        let pm3 = prior_moments(&Prior::flat(3), &mix3.multicopy_expand(1).unwrap()).unwrap();
        for c in &pm3.coeff_mean {
            assert!((c - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn generic_moments_equal_closed_forms() {
        for m in 2..=4usize {
            for n in 1..=4u32 {
                if (m as u32).pow(n) as usize > 256 {
                    continue;
                }
                let mix = models::orthogonal_mixture(m, m)
                    .unwrap()
                    .multicopy_expand(n)
                    .unwrap();
                let pm = prior_moments(&Prior::flat(m), &mix).unwrap();
                let cov = flat_covariance(m);
                assert!(pm.covariance.sub(&cov).max_abs() < 1e-12);
                let ks = crate::mixture::compositions(n, m);
                for (alpha, k) in ks.iter().enumerate() {
                    let closed = flat_multicopy_cross(k, n, m);
                    for (a, b) in pm.cross[alpha].iter().zip(&closed) {
                        assert!((a - b).abs() < 1e-12, "m {m} n {n}");
                    }
                    assert!((pm.coeff_mean[alpha] - flat_multicopy_coeff_mean(n, m)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn moment_invariants() {
        let mix = models::tetrahedron_mixture();
        let pm = prior_moments(&Prior::flat(4), &mix).unwrap();
        // covariance annihilates the all-ones vector
        let u = vec![1.0; 4];
        for v in pm.covariance.matvec(&u) {
            assert!(v.abs() < 1e-12);
        }
        // cross moments sum to zero across components
        for r in 0..4 {
            let s: f64 = pm.cross.iter().map(|v| v[r]).sum();
            assert!(s.abs() < 1e-12);
        }
        // covariance is PSD
        let (w, _) = crate::linalg::sym_eig(&pm.covariance).unwrap();
        assert!(w[0] >= -1e-12);
    }

    #[test]
    fn polynomial_prior_is_exact_and_validated() {
        // π(λ) = 2 λ_1 on the 1-simplex: ∫ 2t dt = 1, ⟨λ_1⟩ = ∫ 2t² dt = 2/3
        let density = CoefficientPolynomial::monomial(vec![1, 0], 2.0);
        let prior = Prior::polynomial(density).unwrap();
        let mean = prior
            .average_polynomial(&CoefficientPolynomial::variable(2, 0))
            .unwrap();
        assert!((mean - 2.0 / 3.0).abs() < 1e-12);
        // wrong normalization is rejected
        let bad = CoefficientPolynomial::monomial(vec![1, 0], 5.0);
        assert!(Prior::polynomial(bad).is_err());
    }

    #[test]
    fn custom_prior_normalization_check() {
        let ok = Prior::custom(2, |x| 2.0 * x[0], 400);
        assert!(ok.is_ok());
        let bad = Prior::custom(2, |_| 2.0, 200);
        assert!(bad.is_err());
    }
}
