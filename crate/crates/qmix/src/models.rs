//! Canonical mixture constructions: orthogonal ensembles, the regular
//! tetrahedron of pure qubit states, the unidentifiable four-state ensemble,
//! two-component qubit pairs, and the commuting pair. These are the models
//! every closed-form result in the crate is checked against, and the ones
//! the CLI `reproduce` command ships.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix};
use crate::mixture::{bloch_to_density, CoefficientPolynomial, GeneralizedMixture};

/// Mixture of `m` mutually orthogonal basis projectors in dimension `dim`.
pub fn orthogonal_mixture(m: usize, dim: usize) -> Result<GeneralizedMixture> {
    if dim < m {
        return Err(Error::InvalidArgument(format!(
            "need dimension >= {m} for {m} orthogonal states, got {dim}"
        )));
    }
    let components = (0..m)
        .map(|r| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[r] = Complex64::new(1.0, 0.0);
            DensityMatrix::pure(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedMixture::linear(components)
}

/// Bloch vectors of the regular tetrahedron, (±1, ±1, ±1)/√3 with an even
/// number of minus signs complemented.
pub fn tetrahedron_bloch_vectors() -> [[f64; 3]; 4] {
    let s = 1.0 / 3.0f64.sqrt();
    [[s, -s, -s], [-s, s, -s], [-s, -s, s], [s, s, s]]
}

/// Four pure qubit states at the vertices of a regular tetrahedron.
pub fn tetrahedron_mixture() -> GeneralizedMixture {
    let components = tetrahedron_bloch_vectors()
        .iter()
        .map(|&n| bloch_to_density(n).expect("unit Bloch vector"))
        .collect();
    GeneralizedMixture::linear(components).expect("valid linear mixture")
}

/// Trace of the real part of the tetrahedron Z matrix as a polynomial in
/// all four weights: (1/2) [3 + Σ_{r=1..3} λ_r (1 - 2 λ_r)].
pub fn tetrahedron_re_trace_polynomial() -> CoefficientPolynomial {
    let mut p = CoefficientPolynomial::constant(4, 1.5);
    for r in 0..3 {
        let mut lin = vec![0u32; 4];
        lin[r] = 1;
        p = p.add(&CoefficientPolynomial::monomial(lin.clone(), 0.5));
        let mut quad = vec![0u32; 4];
        quad[r] = 2;
        p = p.add(&CoefficientPolynomial::monomial(quad, -1.0));
    }
    p
}

/// Trace norm of the imaginary part of the tetrahedron Z matrix,
/// (√3/2) sqrt(Σ_{r=1..3} (λ_4 - λ_r)²).
pub fn tetrahedron_im_trace(lambda: &[f64]) -> f64 {
    let l4 = lambda[3];
    let sum: f64 = (0..3).map(|r| (l4 - lambda[r]).powi(2)).sum();
    0.5 * 3.0f64.sqrt() * sum.sqrt()
}

/// The unidentifiable qubit ensemble {|0>, |1>, |+>, |->}.
pub fn unidentifiable_four_state() -> GeneralizedMixture {
    let zero = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let one = DensityMatrix::pure(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
    let minus = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]).unwrap();
    GeneralizedMixture::linear(vec![zero, one, plus, minus]).unwrap()
}

/// The informative two-parameter family ρ(ξ) = (I + √2 ξ_1 σ_z + √2 ξ_2 σ_x)/2
/// that the four-state ensemble reduces to: returns the state and the two
/// parameter derivatives (σ_z/√2, σ_x/√2). Requires ξ_1² + ξ_2² ≤ 1/2.
pub fn reduced_two_parameter_family(
    xi1: f64,
    xi2: f64,
) -> Result<(DensityMatrix, Vec<HermitianMatrix>)> {
    let s2 = std::f64::consts::SQRT_2;
    let state = bloch_to_density([s2 * xi2, 0.0, s2 * xi1])?;
    let c = |re: f64| Complex64::new(re, 0.0);
    let dz = HermitianMatrix::new(2, vec![c(1.0 / s2), c(0.0), c(0.0), c(-1.0 / s2)])?;
    let dx = HermitianMatrix::new(2, vec![c(0.0), c(1.0 / s2), c(1.0 / s2), c(0.0)])?;
    Ok((state, vec![dz, dx]))
}

/// Two pure states tilted by ±θ about the z axis in the x-z plane; the
/// overlap is |<φ_1|φ_2>| = cos θ.
pub fn two_pure_qubits(theta: f64) -> Result<GeneralizedMixture> {
    let (s, c) = theta.sin_cos();
    let rho1 = bloch_to_density([s, 0.0, c])?;
    let rho2 = bloch_to_density([-s, 0.0, c])?;
    GeneralizedMixture::linear(vec![rho1, rho2])
}

/// Two qubit states of equal Bloch radius separated by `angle` in the x-z
/// plane; for radius 1 these are the pure states of [`two_pure_qubits`].
pub fn equal_purity_pair(radius: f64, angle: f64) -> Result<GeneralizedMixture> {
    let half = 0.5 * angle;
    let rho1 = bloch_to_density([radius * half.sin(), 0.0, radius * half.cos()])?;
    let rho2 = bloch_to_density([-radius * half.sin(), 0.0, radius * half.cos()])?;
    GeneralizedMixture::linear(vec![rho1, rho2])
}

/// Commuting non-orthogonal pair: ρ_1 = diag(1-ε, ε), ρ_2 = |0><0|.
pub fn commuting_pair(epsilon: f64) -> Result<GeneralizedMixture> {
    if !(0.0 < epsilon && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let rho1 = DensityMatrix::new(HermitianMatrix::diagonal(&[1.0 - epsilon, epsilon]))?;
    let rho2 = DensityMatrix::new(HermitianMatrix::diagonal(&[1.0, 0.0]))?;
    GeneralizedMixture::linear(vec![rho1, rho2])
}
