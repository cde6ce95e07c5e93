//! Acceptance suite: every closed-form result, identity and statistical
//! closure the engine must reproduce, one criterion per test, each printing
//! a pass/fail line (run with `cargo test --test acceptance -- --nocapture`
//! to see them).

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use qmix::bayes::{
    bayes_error, optimal_measurement, orthogonal_mse, sld_projective_povm, EffectiveStateModel,
    Povm,
};
use qmix::hermitian::{eig_hermitian, min_eigenvalue, DensityMatrix, HermitianMatrix};
use qmix::holevo::{cr_holevo_relation_check, holevo_bound, unidentifiable_error, HolevoModel};
use qmix::linalg::{sym_eig, RMat};
use qmix::mixture::{GeneralizedMixture, WeightVector};
use qmix::models;
use qmix::pointwise::{commuting_exact_error, PointwiseModel};
use qmix::prior::{
    dirichlet_moment, flat_average_polynomial, prior_moments, simplex_quadrature, Prior,
    DEFAULT_RESOLUTION,
};
use qmix::sim::{simulate_bayes_mse, two_step_adaptive, SimConfig, TwoStepConfig};
use qmix::CoefficientPolynomial;

const DEFAULT_SEED: u64 = 20100101;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

// ---------------------------------------------------------------------------
// shared random-instance helpers
// ---------------------------------------------------------------------------

fn random_density(dim: usize, rng: &mut ChaCha12Rng) -> DensityMatrix {
    // Gram construction: A†A normalized to unit trace.
    let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
    for z in a.iter_mut() {
        *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let mut gram = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += a[k * dim + i].conj() * a[k * dim + j];
            }
            gram[i * dim + j] = acc;
        }
    }
    let trace: f64 = (0..dim).map(|i| gram[i * dim + i].re).sum();
    let entries: Vec<Complex64> = gram.iter().map(|z| z / trace).collect();
    DensityMatrix::new(HermitianMatrix::new(dim, entries).unwrap()).unwrap()
}

fn random_linear_mixture(m: usize, dim: usize, rng: &mut ChaCha12Rng) -> GeneralizedMixture {
    let components = (0..m).map(|_| random_density(dim, rng)).collect();
    GeneralizedMixture::linear(components).unwrap()
}

/// Random POVM: normalized random PSD operators E_i = S^{-1/2} G_i S^{-1/2}.
fn random_povm(dim: usize, outcomes: usize, rng: &mut ChaCha12Rng) -> Povm {
    let gs: Vec<HermitianMatrix> = (0..outcomes)
        .map(|_| {
            let rho = random_density(dim, rng);
            rho.matrix().scale(rng.gen_range(0.2..1.0))
        })
        .collect();
    let mut total = HermitianMatrix::zeros(dim);
    for g in &gs {
        total = total.add(g).unwrap();
    }
    let eig = eig_hermitian(&total).unwrap();
    // S^{-1/2}
    let mut inv_sqrt = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        let w = eig.eigenvalues[k];
        assert!(w > 1e-12, "random POVM normalizer is singular");
        let s = 1.0 / w.sqrt();
        for i in 0..dim {
            for j in 0..dim {
                inv_sqrt[i * dim + j] +=
                    s * eig.vectors[i * dim + k] * eig.vectors[j * dim + k].conj();
            }
        }
    }
    let inv_sqrt = HermitianMatrix::new(dim, inv_sqrt).unwrap();
    let elements: Vec<HermitianMatrix> = gs
        .iter()
        .map(|g| {
            let tmp = qmix::hermitian::HermitianMatrix::from_fn(dim, |i, j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    for l in 0..dim {
                        acc += inv_sqrt.get(i, k) * g.get(k, l) * inv_sqrt.get(l, j);
                    }
                }
                acc
            })
            .unwrap();
            tmp
        })
        .collect();
    Povm::new(elements).unwrap()
}

fn flat_model(mix: &GeneralizedMixture) -> EffectiveStateModel {
    let pm = prior_moments(&Prior::flat(mix.param_count()), mix).unwrap();
    EffectiveStateModel::new(mix.clone(), pm).unwrap()
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_orthogonal_closed_form() {
    let start = Instant::now();
    let cases: Vec<(usize, u32)> = (1..=6)
        .map(|n| (2usize, n))
        .chain((1..=4).map(|n| (3, n)))
        .chain((1..=3).map(|n| (4, n)))
        .collect();
    let mut worst: f64 = 0.0;
    for &(m, n) in &cases {
        let mix = models::orthogonal_mixture(m, m).unwrap();
        let expanded = mix.multicopy_expand(n).unwrap();
        let pm = prior_moments(&Prior::flat(m), &expanded).unwrap();
        let model = EffectiveStateModel::new(expanded, pm).unwrap();
        let povm = sld_projective_povm(&model).unwrap();
        let reportd = bayes_error(&model, &povm).unwrap();
        let expected = orthogonal_mse(m as u32, n);
        worst = worst.max((reportd.mse - expected).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "orthogonal multicopy closed form",
        worst < 1e-9 && elapsed < 60.0,
        &format!("max |tr Δ − (M−1)/((M+1)(M+N))| = {worst:.2e} over {} cases in {elapsed:.1} s (limit 60 s)", cases.len()),
    );
}

#[test]
fn criterion_02_two_component_single_copy() {
    let overlaps = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.95];
    let mut worst: f64 = 0.0;
    for &overlap in &overlaps {
        // pure pair with tr ρ_1 ρ_2 = cos²θ = overlap
        let theta = (overlap as f64).sqrt().acos();
        let mix = models::two_pure_qubits(theta).unwrap();
        let model = flat_model(&mix);
        let povm = optimal_measurement(&model, &[1.0, -1.0]).unwrap();
        let delta = bayes_error(&model, &povm).unwrap().delta;
        let expected = (2.0 + overlap) / 36.0;
        worst = worst.max((delta.get(0, 0) - expected).abs());
    }
    report(
        2,
        "two-component single-copy closed form",
        worst < 1e-9,
        &format!("max |Δ11 − (2 + tr ρ1ρ2)/36| = {worst:.2e} over 10 overlaps in [0, 0.95]"),
    );
}

#[test]
fn criterion_03_tetrahedron_holevo() {
    // exact polynomial average of the real part
    let re_exact = flat_average_polynomial(&models::tetrahedron_re_trace_polynomial());
    let re_ok = (re_exact - 63.0 / 40.0).abs() < 1e-12;

    // quadrature of the imaginary part at the default resolution
    let im_avg = simplex_quadrature(models::tetrahedron_im_trace, 4, DEFAULT_RESOLUTION).unwrap();
    let im_ok = (im_avg - 0.43).abs() < 5e-3;

    let combined = re_exact + im_avg;
    let combined_ok = (combined - 2.01).abs() < 0.01;

    // pointwise identity and non-commuting SLDs
    let mix = models::tetrahedron_mixture();
    let mut rng = ChaCha12Rng::seed_from_u64(0xace);
    let mut worst_distance: f64 = 0.0;
    for _ in 0..20 {
        let lambda = loop {
            let p = random_interior(4, &mut rng);
            if p.iter().all(|&x| x > 0.02) {
                break p;
            }
        };
        let model = PointwiseModel::new(&mix, WeightVector::new(lambda).unwrap()).unwrap();
        let check = cr_holevo_relation_check(&model).unwrap();
        worst_distance = worst_distance.max(check.distance);
    }
    let center_model = PointwiseModel::new(&mix, WeightVector::uniform(4)).unwrap();
    let commutator = cr_holevo_relation_check(&center_model)
        .unwrap()
        .max_commutator_norm;

    let pass = re_ok && im_ok && combined_ok && worst_distance < 1e-8 && commutator > 0.1;
    report(
        3,
        "tetrahedron Holevo coefficients",
        pass,
        &format!(
            "Re = {re_exact:.15} (63/40 exact), Im = {im_avg:.4} (0.43±5e-3), total = {combined:.4} (2.01±0.01), \
             max inverse-QFI distance {worst_distance:.2e}, barycenter commutator {commutator:.3}"
        ),
    );
}

fn random_interior(m: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
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

#[test]
fn criterion_04_unidentifiable_example() {
    let mix = models::unidentifiable_four_state();
    let result = unidentifiable_error(&mix, &Prior::flat(4), 1, 48).unwrap();
    let intrinsic_ok = (result.intrinsic - 0.05).abs() < 1e-10;
    let coeff_ok = (result.asymptotic_coeff - 0.9).abs() < 1e-3;

    // optimizer-based bound against 1 − ξ1² − ξ2² at 10 sample points
    let mut worst: f64 = 0.0;
    let sample_points = [
        (0.0, 0.0),
        (0.3, 0.2),
        (-0.3, 0.2),
        (0.5, 0.0),
        (0.0, -0.5),
        (0.25, -0.35),
        (-0.4, -0.3),
        (0.1, 0.6),
        (-0.15, 0.45),
        (0.45, 0.45),
    ];
    for &(x1, x2) in &sample_points {
        let (state, partials) = models::reduced_two_parameter_family(x1, x2).unwrap();
        let hm = HolevoModel::from_family(state, partials).unwrap();
        let bound = holevo_bound(&hm, &RMat::identity(2)).unwrap();
        worst = worst.max((bound.value - (1.0 - x1 * x1 - x2 * x2)).abs());
    }
    let pass = intrinsic_ok && coeff_ok && worst < 1e-4;
    report(
        4,
        "unidentifiable four-state example",
        pass,
        &format!(
            "intrinsic = {:.12} (1/20 ± 1e-10), coefficient = {:.6} (9/10 ± 1e-3), \
             max |C^H − (1 − ξ1² − ξ2²)| = {worst:.2e} over 10 points",
            result.intrinsic, result.asymptotic_coeff
        ),
    );
}

#[test]
fn criterion_05_commuting_example() {
    // Raw finite-N values approach the asymptote at rate ~1/sqrt(N); the
    // limit is pinned by Richardson extrapolation over (128, 256, 512) per
    // the asymptotic-comparison policy, with the rate checked empirically.
    let mut detail = String::new();
    let mut pass = true;
    for &epsilon in &[0.3f64, 0.5, 0.7] {
        let target = 1.0 / (2.0 * epsilon) - 1.0 / 3.0;
        let at = |n: u32| n as f64 * commuting_exact_error(epsilon, n).unwrap();
        let (x128, x256, x512) = (at(128), at(256), at(512));
        let rate = (x512 - x256) / (x256 - x128);
        let rate_ok = (rate - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.08;
        let limit = x512 + (x512 - x256) * rate / (1.0 - rate);
        let limit_ok = (limit - target).abs() <= 0.02;
        pass &= rate_ok && limit_ok;
        detail.push_str(&format!(
            "ε={epsilon}: N·Δ(256)={x256:.4}, limit={limit:.4} vs {target:.4} (rate {rate:.3}); "
        ));
    }
    // exact equality with the orthogonal closed form at ε = 1
    let mut worst: f64 = 0.0;
    for n in 1..=64u32 {
        let v = commuting_exact_error(1.0, n).unwrap();
        worst = worst.max((v - 0.5 * orthogonal_mse(2, n)).abs());
    }
    pass &= worst < 1e-12;
    detail.push_str(&format!("ε=1 equality max dev {worst:.2e} for N ≤ 64"));
    report(5, "commuting-pair exact error", pass, &detail);
}

#[test]
fn criterion_06_exactness_identity() {
    // Direct outcome-space averaging with the optimal estimator, built from
    // raw prior moments, must equal Λ − F(λ̄) entrywise.
    let mut rng = ChaCha12Rng::seed_from_u64(0x1de);
    let mut worst: f64 = 0.0;
    for instance in 0..50 {
        let (m, dim) = match instance % 4 {
            0 => (2usize, 2usize),
            1 => (3, 2),
            2 => (2, 3),
            _ => (3, 3),
        };
        let mix = random_linear_mixture(m, dim, &mut rng);
        let povm = random_povm(dim, rng.gen_range(2..=dim + 2), &mut rng);
        let model = flat_model(&mix);
        let engine = bayes_error(&model, &povm).unwrap();

        // oracle: Δ = ⟨λλᵀ⟩ − Σ_χ p(χ) λ_χ λ_χᵀ from raw flat moments
        let mf = m as f64;
        let second = |r: usize, s: usize| {
            if r == s {
                2.0 / (mf * (mf + 1.0))
            } else {
                1.0 / (mf * (mf + 1.0))
            }
        };
        let mut oracle = RMat::zeros(m, m);
        for r in 0..m {
            for s in 0..m {
                oracle.set(r, s, second(r, s));
            }
        }
        for e in povm.elements() {
            let traces: Vec<f64> = mix
                .components()
                .iter()
                .map(|rho| e.trace_product(rho.matrix()).unwrap())
                .collect();
            // p(χ) = Σ_α ⟨λ_α⟩ tr(E ρ_α); ⟨λ⟩_χ = Σ_α ⟨λ λ_α⟩ tr(E ρ_α)/p
            let p: f64 = traces.iter().map(|t| t / mf).sum();
            if p < 1e-12 {
                continue;
            }
            let posterior: Vec<f64> = (0..m)
                .map(|r| {
                    traces
                        .iter()
                        .enumerate()
                        .map(|(alpha, t)| second(r, alpha) * t)
                        .sum::<f64>()
                        / p
                })
                .collect();
            for r in 0..m {
                for s in 0..m {
                    oracle.data[r * m + s] -= p * posterior[r] * posterior[s];
                }
            }
        }
        worst = worst.max(engine.delta.sub(&oracle).max_abs());
    }
    report(
        6,
        "exact error identity Δ = Λ − F(λ̄)",
        worst < 1e-9,
        &format!("max entrywise deviation {worst:.2e} over 50 random (mixture, POVM) instances"),
    );
}

#[test]
fn criterion_07_inequality_suite() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xbc);
    let mut worst_bc: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    for instance in 0..100 {
        let (m, dim) = if instance % 2 == 0 { (2, 2) } else { (3, 3) };
        let mix = random_linear_mixture(m, dim, &mut rng);
        let povm = random_povm(dim, rng.gen_range(2..=4), &mut rng);
        let model = flat_model(&mix);
        let rep = bayes_error(&model, &povm).unwrap();
        let bc_gap = rep.qfi_at_mean.sub(&rep.fisher_at_mean);
        let (w, _) = sym_eig(&bc_gap).unwrap();
        worst_bc = worst_bc.min(w[0]);
        let qfi_bound_gap = rep.delta.sub(&rep.lambda_cov.sub(&rep.qfi_at_mean));
        let (w, _) = sym_eig(&qfi_bound_gap).unwrap();
        worst_delta = worst_delta.min(w[0]);
    }
    let bc_ok = worst_bc >= -1e-8 && worst_delta >= -1e-8;

    // effective-state positivity over random (mixture, prior, λ) triples
    let mut worst_eig = f64::INFINITY;
    for instance in 0..1000 {
        let m = 2 + (instance % 3);
        let dim = 2 + (instance % 2);
        let mix = random_linear_mixture(m, dim, &mut rng);
        let prior = if instance % 2 == 0 {
            Prior::flat(m)
        } else {
            // normalized square of a random linear polynomial
            let mut q = CoefficientPolynomial::constant(m, rng.gen_range(0.2..1.0));
            for r in 0..m {
                let mut e = vec![0u32; m];
                e[r] = 1;
                q = q.add(&CoefficientPolynomial::monomial(
                    e,
                    rng.gen_range(-1.0..1.0),
                ));
            }
            let sq = q.mul(&q);
            let norm = flat_average_polynomial(&sq);
            Prior::polynomial(sq.scale(qmix::prior::flat_density(m) / norm)).unwrap()
        };
        let pm = prior_moments(&prior, &mix).unwrap();
        let model = EffectiveStateModel::new(mix, pm).unwrap();
        let lambda = WeightVector::new(random_interior(m, &mut rng)).unwrap();
        let sigma = qmix::bayes::effective_state(&model, &lambda).unwrap();
        worst_eig = worst_eig.min(min_eigenvalue(sigma.matrix()).unwrap());
    }
    let pos_ok = worst_eig >= -1e-10;
    report(
        7,
        "inequality suite",
        bc_ok && pos_ok,
        &format!(
            "min eig(H − F) = {worst_bc:.2e}, min eig(Δ − (Λ − H)) = {worst_delta:.2e} over 100 POVMs; \
             min effective-state eigenvalue {worst_eig:.2e} over 1000 triples"
        ),
    );
}

#[test]
fn criterion_08_moment_identities() {
    // Dirichlet moments against nested Gauss-Legendre integration (the
    // 32-point rule is exact for these polynomial integrands).
    let (nodes, weights) = gauss_legendre_32();
    let mut worst: f64 = 0.0;
    for a in 0..=3u32 {
        for b in 0..=3u32 {
            // M = 2
            let direct: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x.powi(a as i32) * (1.0 - x).powi(b as i32))
                .sum();
            worst = worst.max((dirichlet_moment(&[a, b]) - direct).abs());
            for c in 0..=3u32 {
                // M = 3: integrate over the triangle
                let mut outer = 0.0;
                for (&x, &wx) in nodes.iter().zip(&weights) {
                    let width = 1.0 - x;
                    if width <= 0.0 {
                        continue;
                    }
                    let mut inner = 0.0;
                    for (&t, &wt) in nodes.iter().zip(&weights) {
                        let y = t * width;
                        inner += wt
                            * width
                            * x.powi(a as i32)
                            * y.powi(b as i32)
                            * (1.0 - x - y).powi(c as i32);
                    }
                    outer += wx * inner;
                }
                worst = worst.max((dirichlet_moment(&[a, b, c]) - outer).abs());
            }
        }
    }
    let moments_ok = worst < 1e-10;

    // occupation sums: the formula is asserted against enumeration inside
    let mut checks = 0;
    for m in 1..=5u32 {
        for n in 1..=5u32 {
            qmix::pointwise::occupation_sum_check(m, n);
            checks += 1;
        }
    }
    report(
        8,
        "flat-prior moment identities",
        moments_ok,
        &format!(
            "max |moment − nested quadrature| = {worst:.2e} (M ≤ 3, exponents ≤ 3); \
             {checks} occupation-sum identities verified exactly"
        ),
    );
}

/// 32-point Gauss-Legendre rule on [0, 1], built by Newton iteration.
fn gauss_legendre_32() -> (Vec<f64>, Vec<f64>) {
    let n = 32usize;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre polynomial and derivative by recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = 0.5 * (1.0 - x); // descending cos order; map to [0,1]
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[test]
fn criterion_09_monte_carlo_closure() {
    let start = Instant::now();
    let mut worst_sigmas: f64 = 0.0;
    let mut checks = 0u32;

    // two-component single-copy configurations
    for &overlap in &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.95] {
        let theta = (overlap as f64).sqrt().acos();
        let mix = models::two_pure_qubits(theta).unwrap();
        let model = flat_model(&mix);
        let povm = optimal_measurement(&model, &[1.0, -1.0]).unwrap();
        let analytic = bayes_error(&model, &povm).unwrap().delta.get(0, 0);
        let cfg = SimConfig::new(100_000, DEFAULT_SEED);
        let emp = simulate_bayes_mse(&mix, &Prior::flat(2), &povm, &cfg).unwrap();
        let sigmas =
            (emp.delta.get(0, 0) - analytic).abs() / emp.standard_error.get(0, 0).max(1e-15);
        worst_sigmas = worst_sigmas.max(sigmas);
        checks += 1;
    }

    // orthogonal multicopy configurations with N ≤ 3
    for m in 2..=4usize {
        for n in 1..=3u32 {
            let mix = models::orthogonal_mixture(m, m).unwrap();
            let expanded = mix.multicopy_expand(n).unwrap();
            let pm = prior_moments(&Prior::flat(m), &expanded).unwrap();
            let model = EffectiveStateModel::new(expanded, pm).unwrap();
            let povm = sld_projective_povm(&model).unwrap();
            let analytic = bayes_error(&model, &povm).unwrap().mse;
            let cfg = SimConfig::new(100_000, DEFAULT_SEED).with_copies(n);
            let emp = simulate_bayes_mse(&mix, &Prior::flat(m), &povm, &cfg).unwrap();
            let sigmas = (emp.mse - analytic).abs() / emp.mse_standard_error.max(1e-15);
            worst_sigmas = worst_sigmas.max(sigmas);
            checks += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        9,
        "Monte Carlo closure",
        worst_sigmas < 3.0 && elapsed < 120.0,
        &format!(
            "worst deviation {worst_sigmas:.2} standard errors over {checks} configurations \
             at 100000 trials (seed {DEFAULT_SEED}) in {elapsed:.1} s (limit 120 s)"
        ),
    );
}

#[test]
fn criterion_10_two_step_adaptive() {
    let mut detail = String::new();
    let mut pass = true;
    for &theta in &[std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2] {
        for &lambda_true in &[0.3f64, 0.5] {
            let run = |n: u32, trials: u64| {
                two_step_adaptive(
                    &TwoStepConfig {
                        theta,
                        n_copies: n,
                        trials,
                        seed: DEFAULT_SEED,
                    },
                    lambda_true,
                )
                .unwrap()
            };
            let at_stated = run(4096, 2000);
            let rel = (at_stated.n_mse - at_stated.target).abs() / at_stated.target;
            let accuracy_ok = rel <= 0.15;
            // the gap comparison is run with enough trials to resolve the
            // systematic difference against Monte Carlo noise
            let small = run(1024, 20_000);
            let large = run(4096, 20_000);
            let gap_ok = (large.n_mse - large.target).abs() <= (small.n_mse - small.target).abs();
            pass &= accuracy_ok && gap_ok;
            detail.push_str(&format!(
                "(θ={theta:.2}, λ={lambda_true}): N·MSE = {:.4} vs {:.4} ({:.1}%), gap shrink {}; ",
                at_stated.n_mse,
                at_stated.target,
                100.0 * rel,
                if gap_ok { "yes" } else { "no" }
            ));
        }
    }
    report(10, "two-step adaptive protocol", pass, &detail);
}
