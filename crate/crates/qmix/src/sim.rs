//! Monte Carlo validation: Born-rule sampling, empirical error matrices of
//! the optimal Bayesian estimator, and the two-step adaptive local protocol.
//!
//! Randomness comes from ChaCha12 (`rand_chacha` 0.3); every trial derives
//! its own stream from (seed, trial index) so runs are bit-reproducible and
//! independent of any execution order. Accumulation is in fixed trial
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bayes::{estimator_table, EffectiveStateModel, Povm};
use crate::error::{Error, Result};
use crate::hermitian::DensityMatrix;
use crate::linalg::RMat;
use crate::mixture::{GeneralizedMixture, WeightVector};
use crate::prior::Prior;

/// How the true weight vector is chosen each trial.
#[derive(Debug, Clone)]
pub enum WeightSource {
    /// Draw from the prior (flat priors only).
    PriorSampled,
    /// Keep one fixed weight vector for every trial.
    Fixed(WeightVector),
}

/// Configuration of a measurement simulation.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub n_copies: u32,
    pub weight_source: WeightSource,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            n_copies: 1,
            weight_source: WeightSource::PriorSampled,
        }
    }

    pub fn with_copies(mut self, n_copies: u32) -> Self {
        self.n_copies = n_copies;
        self
    }

    pub fn with_fixed_weights(mut self, lambda: WeightVector) -> Self {
        self.weight_source = WeightSource::Fixed(lambda);
        self
    }
}

/// Per-trial random stream: ChaCha12 keyed by the seed with the trial index
/// as the stream number.
fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draw one outcome index with Born-rule probabilities tr(E_χ ρ) by
/// inverse-CDF over the fixed element order.
pub fn sample_outcome(povm: &Povm, state: &DensityMatrix, rng: &mut impl Rng) -> Result<usize> {
    let probs: Vec<f64> = povm
        .elements()
        .iter()
        .map(|e| e.trace_product(state.matrix()))
        .collect::<Result<_>>()?;
    sample_from_probabilities(&probs, rng)
}

fn sample_from_probabilities(probs: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::ProbabilityConsistency { sum: total });
    }
    let draw: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (chi, &p) in probs.iter().enumerate() {
        acc += p.max(0.0);
        if draw < acc {
            return Ok(chi);
        }
    }
    Ok(probs.len() - 1)
}

/// Empirical error matrix with entry-wise standard errors.
#[derive(Debug, Clone)]
pub struct EmpiricalError {
    /// Mean of (λ − λ̂)(λ − λ̂)ᵀ over trials.
    pub delta: RMat,
    /// Standard error of each entry.
    pub standard_error: RMat,
    /// tr of the empirical matrix.
    pub mse: f64,
    /// Standard error of the trace.
    pub mse_standard_error: f64,
    pub trials: u64,
}

/// Simulate the Bayesian experiment: draw λ, draw an outcome from the
/// (N-copy) average state, apply the optimal estimator, accumulate the
/// squared error. The POVM acts on the N-copy space when `cfg.n_copies > 1`.
pub fn simulate_bayes_mse(
    mix: &GeneralizedMixture,
    prior: &Prior,
    povm: &Povm,
    cfg: &SimConfig,
) -> Result<EmpiricalError> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial required".into()));
    }
    let m = mix.param_count();
    let working = if cfg.n_copies > 1 {
        mix.multicopy_expand(cfg.n_copies)?
    } else {
        mix.clone()
    };
    if povm.dim() != working.dim() {
        return Err(Error::DimensionMismatch {
            expected: working.dim(),
            got: povm.dim(),
        });
    }
    if matches!(cfg.weight_source, WeightSource::PriorSampled) && !prior.is_flat() {
        return Err(Error::Unsupported(
            "prior sampling is implemented for the flat prior; use fixed weights otherwise".into(),
        ));
    }
    let moments = crate::prior::prior_moments(prior, &working)?;
    let model = EffectiveStateModel::new(working.clone(), moments)?;
    let estimates = estimator_table(&model, povm)?;
    // Born probabilities via the coefficient table: p(χ|λ) = Σ_α c_α(λ) T[χ][α].
    let trace_table: Vec<Vec<f64>> = povm
        .elements()
        .iter()
        .map(|e| {
            working
                .components()
                .iter()
                .map(|rho| e.trace_product(rho.matrix()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut sum = vec![0.0f64; m * m];
    let mut sum_sq = vec![0.0f64; m * m];
    let mut trace_sum = 0.0f64;
    let mut trace_sq = 0.0f64;
    let mut probs = vec![0.0f64; povm.len()];
    let mut coeffs = vec![0.0f64; working.components().len()];
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let lambda = match &cfg.weight_source {
            WeightSource::PriorSampled => {
                WeightVector::new(crate::mixture::random_simplex_point(m, &mut rng))?
            }
            WeightSource::Fixed(l) => l.clone(),
        };
        for (c, poly) in coeffs.iter_mut().zip(working.coefficients()) {
            *c = poly.evaluate(lambda.as_slice());
        }
        for (p, row) in probs.iter_mut().zip(&trace_table) {
            *p = row.iter().zip(&coeffs).map(|(t, c)| t * c).sum();
        }
        let chi = sample_from_probabilities(&probs, &mut rng)?;
        let est = estimates[chi]
            .as_ref()
            .ok_or(Error::ZeroProbabilityOutcome {
                outcome: chi,
                probability: probs[chi],
            })?;
        let mut trial_trace = 0.0;
        for r in 0..m {
            let dr = lambda.get(r) - est.get(r);
            trial_trace += dr * dr;
            for s in 0..m {
                let ds = lambda.get(s) - est.get(s);
                let x = dr * ds;
                sum[r * m + s] += x;
                sum_sq[r * m + s] += x * x;
            }
        }
        trace_sum += trial_trace;
        trace_sq += trial_trace * trial_trace;
    }
    let t = cfg.trials as f64;
    let mut delta = RMat::zeros(m, m);
    let mut standard_error = RMat::zeros(m, m);
    for i in 0..m * m {
        let mean = sum[i] / t;
        delta.data[i] = mean;
        let var = (sum_sq[i] / t - mean * mean).max(0.0);
        standard_error.data[i] = (var / t).sqrt();
    }
    let mse = trace_sum / t;
    let mse_var = (trace_sq / t - mse * mse).max(0.0);
    Ok(EmpiricalError {
        delta,
        standard_error,
        mse,
        mse_standard_error: (mse_var / t).sqrt(),
        trials: cfg.trials,
    })
}

/// Configuration of the two-step adaptive protocol on the pure-state pair
/// tilted by ±θ about the z axis.
#[derive(Debug, Clone)]
pub struct TwoStepConfig {
    /// Half-angle between the two pure states; the overlap is cos θ.
    pub theta: f64,
    /// Total number of copies (at least 16 so that √N ≥ 4).
    pub n_copies: u32,
    pub trials: u64,
    pub seed: u64,
}

/// Result of the two-step adaptive simulation.
#[derive(Debug, Clone)]
pub struct TwoStepReport {
    /// Final estimates, one per trial.
    pub estimates: Vec<f64>,
    /// First-stage rough estimates, one per trial.
    pub rough_estimates: Vec<f64>,
    /// Empirical N · mean((λ̂ − λ)²).
    pub n_mse: f64,
    /// Empirical mean((λ_ini − λ)²) of the rough stage.
    pub rough_mse: f64,
    /// The asymptotic target λ(1−λ)/sin²θ.
    pub target: f64,
}

/// Two-step adaptive measurement on ρ_λ = λρ_1 + (1−λ)ρ_2 with
/// ρ_{1,2} = (I + cosθ σ_z ± sinθ σ_x)/2:
///
/// Stage 1 measures ⌊√N⌋ copies in the σ_x basis (the eigenbasis of the
/// logarithmic derivative at λ = 1/2) and inverts the outcome frequency
/// linearly, clipping to [1/N, 1 − 1/N]. Stage 2 measures the remaining
/// copies in the eigenbasis of the logarithmic derivative at the rough
/// estimate and inverts the binomial frequency at that point.
pub fn two_step_adaptive(cfg: &TwoStepConfig, lambda_true: f64) -> Result<TwoStepReport> {
    let sin_t = cfg.theta.sin();
    let cos_t = cfg.theta.cos();
    if sin_t.abs() < 1e-12 {
        return Err(Error::DegenerateModel(
            "the two states coincide (sin θ = 0); the weight is not estimable".into(),
        ));
    }
    if !(0.0 < lambda_true && lambda_true < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "the true weight must be interior, got {lambda_true}"
        )));
    }
    if cfg.n_copies < 16 {
        return Err(Error::InvalidArgument(
            "the protocol needs at least 16 copies (√N ≥ 4)".into(),
        ));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial required".into()));
    }
    let n = cfg.n_copies as u64;
    let rough_copies = (cfg.n_copies as f64).sqrt().floor() as u64;
    let clip = 1.0 / cfg.n_copies as f64;
    // Bloch vector of ρ_λ: (r_x, r_z) = ((2λ−1) sinθ, cosθ).
    let rx = (2.0 * lambda_true - 1.0) * sin_t;

    let mut estimates = Vec::with_capacity(cfg.trials as usize);
    let mut rough_estimates = Vec::with_capacity(cfg.trials as usize);
    let mut mse_acc = 0.0f64;
    let mut rough_acc = 0.0f64;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        // Stage 1: σ_x-basis measurements, p(+) = (1 + r_x)/2.
        let p_plus = 0.5 * (1.0 + rx);
        let mut plus = 0u64;
        for _ in 0..rough_copies {
            if rng.gen::<f64>() < p_plus {
                plus += 1;
            }
        }
        let freq = plus as f64 / rough_copies as f64;
        let lambda_ini = (0.5 * (1.0 + (2.0 * freq - 1.0) / sin_t)).clamp(clip, 1.0 - clip);

        // Stage 2: eigenbasis of the logarithmic derivative at λ_ini. Its
        // traceless part points along b = (sinθ, 0, (2λ_ini − 1) cosθ);
        // only this direction recovers the full Fisher information
        // sin²θ / (λ(1−λ) + (λ_ini−λ)² cos²θ).
        let bx = sin_t;
        let bz = (2.0 * lambda_ini - 1.0) * cos_t;
        let bnorm = (bx * bx + bz * bz).sqrt();
        let (ux, uz) = (bx / bnorm, bz / bnorm);
        // p(+|λ) = (1 + u·r_λ)/2 is affine in λ with slope u_x sinθ.
        let p2 = 0.5 * (1.0 + ux * rx + uz * cos_t);
        let fine_copies = n - rough_copies;
        let mut plus2 = 0u64;
        for _ in 0..fine_copies {
            if rng.gen::<f64>() < p2 {
                plus2 += 1;
            }
        }
        let freq2 = plus2 as f64 / fine_copies as f64;
        let p_at_ini = 0.5 * (1.0 + ux * (2.0 * lambda_ini - 1.0) * sin_t + uz * cos_t);
        let slope = ux * sin_t;
        let estimate = (lambda_ini + (freq2 - p_at_ini) / slope).clamp(0.0, 1.0);

        estimates.push(estimate);
        rough_estimates.push(lambda_ini);
        mse_acc += (estimate - lambda_true).powi(2);
        rough_acc += (lambda_ini - lambda_true).powi(2);
    }
    let t = cfg.trials as f64;
    Ok(TwoStepReport {
        estimates,
        rough_estimates,
        n_mse: cfg.n_copies as f64 * mse_acc / t,
        rough_mse: rough_acc / t,
        target: lambda_true * (1.0 - lambda_true) / (sin_t * sin_t),
    })
}
