//! Estimation of the weights of quantum finite mixtures.
//!
//! A quantum finite mixture is a density matrix ρ_λ = Σ_r λ_r ρ_r with known
//! component states ρ_r and unknown mixing weights λ on the unit simplex.
//! This crate computes how well the weights can be estimated from
//! measurements:
//!
//! - exact Bayesian error matrices Δ = Λ − F(λ̄) for any prior, POVM and
//!   number of copies, with the optimal estimator and, where attainable,
//!   the optimal von Neumann measurement ([`bayes`]);
//! - pointwise Cramér–Rao / quantum Fisher bounds with simplex projection
//!   and closed forms for orthogonal and two-component mixtures
//!   ([`pointwise`]);
//! - the Holevo bound, including the constrained-operator minimization and
//!   the reparametrization pipeline for unidentifiable mixtures ([`holevo`]);
//! - exact Dirichlet-moment integration and deterministic simplex quadrature
//!   for priors over the weight simplex ([`prior`]);
//! - Monte Carlo measurement simulation and a two-step adaptive protocol
//!   ([`sim`]).

#![forbid(unsafe_code)]

pub mod bayes;
pub mod error;
pub mod exact;
pub mod hermitian;
pub mod holevo;
pub mod linalg;
pub mod mixture;
pub mod models;
pub mod pointwise;
pub mod prior;
pub mod sim;

pub use error::{Error, Result};
pub use hermitian::{
    eig_hermitian, min_eigenvalue, symmetrize, tensor_product, trace_norm, DensityMatrix,
    Eigendecomposition, HermitianMatrix,
};
pub use mixture::{
    bloch_to_density, density_to_bloch, CoefficientPolynomial, GeneralizedMixture,
    IdentifiabilityReport, OccupationVector, WeightVector,
};
