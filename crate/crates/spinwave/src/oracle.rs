//! Independent brute-force verifiers: a fixed-step fourth-order
//! integration of the steady propagation equation, and seeded Monte
//! Carlo simulations of the sequential scattering combinatorics. These
//! share no numerics with the quadrature or closed-form paths they check.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::ComplexAmplitude;
use crate::model::{total_potential, GateConfig, ModelParams};

/// Largest admissible integration step, a thirty-second of a blockade
/// radius.
pub const MAX_ODE_STEP: f64 = 1.0 / 32.0;

/// Disagreement allowed between the full-step and half-step solutions.
pub const ODE_RICHARDSON_TOL: f64 = 1e-6;

/// Minimum trial count for Monte Carlo estimates.
pub const MIN_TRIALS: u64 = 1_000;

/// Transmission through the stored configuration by fourth-order
/// fixed-step integration of `dE/dz = d_b [1/(1 + iU) - 1] E`, reported
/// as `E(L)/E(0)`. Integrates at `step` and `step/2` and fails with
/// [`Error::StepTooCoarse`] when the two disagree beyond
/// [`ODE_RICHARDSON_TOL`]; otherwise returns the half-step solution.
pub fn ode_transmission(
    config: &GateConfig,
    params: &ModelParams,
    step: f64,
) -> Result<ComplexAmplitude> {
    let coarse = ode_transmission_fixed(config, params, step)?;
    let fine = ode_transmission_fixed(config, params, step / 2.0)?;
    let residual = (coarse - fine).norm();
    if residual > ODE_RICHARDSON_TOL {
        return Err(Error::StepTooCoarse {
            residual,
            tolerance: ODE_RICHARDSON_TOL,
        });
    }
    Ok(fine)
}

/// Single fixed-step integration pass, without the step-halving check.
pub fn ode_transmission_fixed(
    config: &GateConfig,
    params: &ModelParams,
    step: f64,
) -> Result<ComplexAmplitude> {
    if !(step > 0.0 && step <= MAX_ODE_STEP) {
        return Err(Error::InvalidParams(format!(
            "ODE step {step} must lie in (0, {MAX_ODE_STEP}]"
        )));
    }
    let n = (params.length / step).ceil() as usize;
    let h = params.length / n as f64;
    let rhs = |z: f64| {
        let u = total_potential(z, config, params.v_cap);
        (C64::new(1.0, 0.0) / C64::new(1.0, u) - 1.0) * params.d_b
    };
    let mut e = C64::new(1.0, 0.0);
    for i in 0..n {
        let z = i as f64 * h;
        let k1 = rhs(z) * e;
        let k2 = rhs(z + 0.5 * h) * (e + k1 * (0.5 * h));
        let k3 = rhs(z + 0.5 * h) * (e + k2 * (0.5 * h));
        let k4 = rhs(z + h) * (e + k3 * h);
        e += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    Ok(e)
}

/// Observed convergence order from solutions at `step`, `step/2`, and
/// `step/4`.
pub fn ode_convergence_order(config: &GateConfig, params: &ModelParams, step: f64) -> Result<f64> {
    let a = ode_transmission_fixed(config, params, step)?;
    let b = ode_transmission_fixed(config, params, step / 2.0)?;
    let c = ode_transmission_fixed(config, params, step / 4.0)?;
    let denom = (b - c).norm();
    if denom == 0.0 {
        return Err(Error::DegenerateInput(
            "solutions coincide; refine the step to measure an order".into(),
        ));
    }
    Ok(((a - b).norm() / denom).log2())
}

/// One seeded Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub trials: u64,
    pub estimate: f64,
    /// Binomial standard error for Bernoulli tallies, sample standard
    /// error of the mean for counted tallies.
    pub std_error: f64,
    pub seed: u64,
}

impl McResult {
    fn bernoulli(successes: u64, trials: u64, seed: u64) -> Self {
        let t = trials as f64;
        let estimate = successes as f64 / t;
        Self {
            trials,
            estimate,
            std_error: (estimate * (1.0 - estimate) / t).sqrt(),
            seed,
        }
    }

    fn counted(sum: u64, sum_sq: u128, trials: u64, seed: u64) -> Self {
        let t = trials as f64;
        let mean = sum as f64 / t;
        let var = ((sum_sq as f64 / t) - mean * mean).max(0.0) * t / (t - 1.0);
        Self {
            trials,
            estimate: mean,
            std_error: (var / t).sqrt(),
            seed,
        }
    }
}

/// Empirical distribution over how many distinct excitations decohered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceClasses {
    pub none: McResult,
    pub one: McResult,
    pub many: McResult,
}

/// Simulates `n_s` source photons walking the position-ordered scattering
/// ladder over `n_g` stored excitations: each rung scatters with
/// probability `p` independent of earlier hits (localisation does not
/// lift the blockade), and a scattered photon is absorbed on the spot.
/// Classifies trials by the number of distinct excitations hit.
pub fn mc_decoherence(
    n_g: u64,
    n_s: u64,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<DecoherenceClasses> {
    check_probability("p", p)?;
    check_trials(trials)?;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || [0u64; 3],
            |mut acc, t| {
                let mut rng = trial_rng(seed, t);
                let mut hit = vec![false; n_g as usize];
                for _ in 0..n_s {
                    ladder_pass(&mut rng, p, &mut hit);
                }
                let distinct = hit.iter().filter(|h| **h).count().min(2);
                acc[distinct] += 1;
                acc
            },
        )
        .reduce(|| [0u64; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Ok(DecoherenceClasses {
        none: McResult::bernoulli(counts[0], trials, seed),
        one: McResult::bernoulli(counts[1], trials, seed),
        many: McResult::bernoulli(counts[2], trials, seed),
    })
}

/// Mean number of retrieved photons after the scattering ladder: each
/// excitation left unhit by all `n_s` photons is retrieved with
/// probability `eta_r`, hit excitations are lost.
pub fn mc_retrieval(
    n_g: u64,
    n_s: u64,
    p: f64,
    eta_r: f64,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    check_probability("p", p)?;
    check_probability("eta_r", eta_r)?;
    check_trials(trials)?;
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .fold(
            || (0u64, 0u128),
            |(s, q), t| {
                let mut rng = trial_rng(seed, t);
                let mut hit = vec![false; n_g as usize];
                for _ in 0..n_s {
                    ladder_pass(&mut rng, p, &mut hit);
                }
                let retrieved = hit
                    .iter()
                    .filter(|h| !**h && rng.gen::<f64>() < eta_r)
                    .count() as u64;
                (s + retrieved, q + u128::from(retrieved * retrieved))
            },
        )
        .reduce(|| (0u64, 0u128), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(McResult::counted(sum, sum_sq, trials, seed))
}

/// Full three-stage subtraction trial: Bernoulli storage of each gate
/// photon, a Poisson-sampled number of source photons walking the ladder
/// over the stored excitations, Bernoulli retrieval of the unhit ones.
/// Tallies trials whose retrieved count is exactly `n_g - 1`. An empty
/// gate field counts as success by the vacuum convention.
pub fn mc_pipeline(
    n_g: u64,
    alpha_s: f64,
    eta_s: f64,
    eta_r: f64,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    check_probability("eta_s", eta_s)?;
    check_probability("eta_r", eta_r)?;
    check_probability("p", p)?;
    check_trials(trials)?;
    if !(alpha_s.is_finite() && alpha_s >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "alpha_s must be finite and non-negative, got {alpha_s}"
        )));
    }
    if n_g == 0 {
        return Ok(McResult::bernoulli(trials, trials, seed));
    }
    let source = if alpha_s > 0.0 {
        Some(Poisson::new(alpha_s).map_err(|e| {
            Error::InvalidParams(format!("source distribution rejected alpha_s: {e}"))
        })?)
    } else {
        None
    };
    let successes = (0..trials)
        .into_par_iter()
        .fold(
            || 0u64,
            |acc, t| {
                // fixed draw order per trial: storage, photon count,
                // ladder rungs, retrieval
                let mut rng = trial_rng(seed, t);
                let mut stored = Vec::with_capacity(n_g as usize);
                for _ in 0..n_g {
                    stored.push(rng.gen::<f64>() < eta_s);
                }
                let n_stored = stored.iter().filter(|s| **s).count();
                let n_s = match &source {
                    Some(dist) => dist.sample(&mut rng) as u64,
                    None => 0,
                };
                let mut hit = vec![false; n_stored];
                for _ in 0..n_s {
                    ladder_pass(&mut rng, p, &mut hit);
                }
                let retrieved = hit
                    .iter()
                    .filter(|h| !**h && rng.gen::<f64>() < eta_r)
                    .count() as u64;
                acc + u64::from(retrieved == n_g - 1)
            },
        )
        .sum::<u64>();
    Ok(McResult::bernoulli(successes, trials, seed))
}

/// One photon descends the ladder: scattered at the first rung that wins
/// its Bernoulli draw, transmitted if none does.
fn ladder_pass(rng: &mut ChaCha8Rng, p: f64, hit: &mut [bool]) {
    for slot in hit.iter_mut() {
        if rng.gen::<f64>() < p {
            *slot = true;
            return;
        }
    }
}

/// Per-trial substream: parallel and serial schedules draw identically.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidParams(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParams(format!(
            "at least {MIN_TRIALS} trials required, got {trials}"
        )));
    }
    Ok(())
}
