//! Cross-check matrix pairing every analytic path with an independent
//! oracle: closed forms against quadrature, quadrature against the
//! propagation ODE, combinatoric models against seeded Monte Carlo.
//! The CLI serializes the report and turns failures into exit codes.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::absorber;
use crate::error::Result;
use crate::kernel::{decay_exponent_quadrature, phi, phi_approx_sum, transmission_amplitude};
use crate::model::{decay_exponent_exact, total_potential, GateConfig, ModelParams};
use crate::oracle::{mc_decoherence, mc_pipeline, mc_retrieval, ode_transmission, MAX_ODE_STEP};
use crate::retrieval::{retrieval_efficiency, retrieval_fixed_photons, retrieval_saturated_source};
use crate::subtraction::subtract_prob_coherent_source;

/// Outcome of one cross-check: `passed` iff `observed <= allowed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed discrepancy.
    pub observed: f64,
    /// Tolerance after scaling.
    pub allowed: f64,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, observed: f64, allowed: f64, detail: String) -> Self {
        Self {
            name,
            passed: observed <= allowed,
            observed,
            allowed,
            detail,
        }
    }
}

/// Full verification run: seed for the randomized instances, and a
/// multiplier on every tolerance (1.0 for the shipped gates).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub checks: Vec<CheckReport>,
}

/// Runs the whole matrix. Deterministic in `seed`; `tolerance_scale`
/// rescales every gate, so a small scale forces failures on purpose.
pub fn run_verification(seed: u64, tolerance_scale: f64) -> Result<VerifyReport> {
    if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
        return Err(crate::error::Error::InvalidParams(format!(
            "tolerance_scale must be positive, got {tolerance_scale}"
        )));
    }
    let s = tolerance_scale;
    let checks = vec![
        decay_constant_check(s)?,
        transmission_ode_check(seed, s)?,
        kernel_unit_diagonal_check(seed, s)?,
        kernel_contractivity_check(seed, s)?,
        kernel_hermitian_check(seed, s)?,
        dilute_pair_sum_check(s)?,
        retrieval_ladder_mc_check(seed, s)?,
        retrieval_saturated_check(s)?,
        single_hit_combinatorics_check(seed, s)?,
        pipeline_stage_mc_check(seed, s)?,
        absorber_recursion_check(s)?,
        absorber_residual_identity_check(s)?,
    ];
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        seed,
        tolerance_scale,
        checks,
    })
}

fn rng_for(seed: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

fn random_count(rng: &mut ChaCha8Rng, max_n_g: usize) -> usize {
    1 + ((rng.gen::<f64>() * max_n_g as f64) as usize).min(max_n_g - 1)
}

fn random_config(rng: &mut ChaCha8Rng, n_g: usize, length: f64) -> GateConfig {
    loop {
        let positions: Vec<f64> = (0..n_g)
            .map(|_| 2.0 + (length - 4.0) * rng.gen::<f64>())
            .collect();
        if let Ok(config) = GateConfig::new(positions) {
            return config;
        }
    }
}

fn decay_constant_check(s: f64) -> Result<CheckReport> {
    let exact = decay_exponent_exact();
    let quad = decay_exponent_quadrature(&ModelParams::new(1.0)?)?;
    Ok(CheckReport::new(
        "decay-constant-quadrature",
        (exact - quad).abs(),
        1e-8 * s,
        format!("closed form {exact:.12} vs quadrature {quad:.12}"),
    ))
}

fn transmission_ode_check(seed: u64, s: f64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..12 {
        let params = ModelParams::new(0.25 + 2.75 * rng.gen::<f64>())?;
        let n_g = random_count(&mut rng, 3);
        let config = random_config(&mut rng, n_g, params.length);
        let ode = ode_transmission(&config, &params, MAX_ODE_STEP)?;
        let analytic = transmission_amplitude(params.length, &config, &params)?;
        let u_exit = total_potential(params.length, &config, params.v_cap);
        worst = worst.max((ode / C64::new(1.0, u_exit) - analytic).norm());
    }
    Ok(CheckReport::new(
        "transmission-ode-agreement",
        worst,
        1e-6 * s,
        "quadrature exponent vs fourth-order propagation, 12 random configs".into(),
    ))
}

fn kernel_unit_diagonal_check(seed: u64, s: f64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..15 {
        let params = ModelParams::new(6.0 * rng.gen::<f64>())?;
        let n_g = random_count(&mut rng, 4);
        let config = random_config(&mut rng, n_g, params.length);
        let value = phi(&config, &config, &params)?.value;
        worst = worst.max((value - 1.0).norm());
    }
    Ok(CheckReport::new(
        "kernel-unit-diagonal",
        worst,
        1e-6 * s,
        "identical configurations must stay coherent".into(),
    ))
}

fn kernel_contractivity_check(seed: u64, s: f64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, 3);
    let mut worst = 0.0f64;
    let params = ModelParams::new(2.0)?;
    for _ in 0..15 {
        let n_g = random_count(&mut rng, 3);
        let x = random_config(&mut rng, n_g, params.length);
        let y = random_config(&mut rng, n_g, params.length);
        let value = phi(&x, &y, &params)?.value;
        worst = worst.max(value.norm() - 1.0);
    }
    Ok(CheckReport::new(
        "kernel-contractivity",
        worst.max(0.0),
        10.0 * params.quad_rel_tol * s,
        "scattering can only shrink coherences".into(),
    ))
}

fn kernel_hermitian_check(seed: u64, s: f64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, 4);
    let mut worst = 0.0f64;
    let params = ModelParams::new(1.5)?;
    for _ in 0..10 {
        let n_g = random_count(&mut rng, 3);
        let x = random_config(&mut rng, n_g, params.length);
        let y = random_config(&mut rng, n_g, params.length);
        let forward = phi(&x, &y, &params)?.value;
        let backward = phi(&y, &x, &params)?.value;
        worst = worst.max((forward - backward.conj()).norm());
    }
    Ok(CheckReport::new(
        "kernel-hermitian-symmetry",
        worst,
        1e-10 * s,
        "swapping the two sides must conjugate the kernel".into(),
    ))
}

fn dilute_pair_sum_check(s: f64) -> Result<CheckReport> {
    let params = ModelParams::new(2.0)?;
    let x = GateConfig::new(vec![5.0, 12.0])?;
    let y = GateConfig::new(vec![5.0, 14.0])?;
    let full = phi(&x, &y, &params)?.value;
    let sum = phi_approx_sum(&x, &y, &params)?.value;
    Ok(CheckReport::new(
        "dilute-pair-sum",
        (full - sum).norm(),
        1e-2 * s,
        format!("full kernel {full} vs geometric pair sum {sum}"),
    ))
}

fn retrieval_ladder_mc_check(seed: u64, s: f64) -> Result<CheckReport> {
    let (n_g, n_s, p, eta_r) = (3u64, 2u64, 0.45, 0.85);
    let mc = mc_retrieval(n_g, n_s, p, eta_r, 50_000, seed)?;
    let mut model = 0.0;
    for k in 1..=n_g as usize {
        model += retrieval_fixed_photons(k, n_s, p, eta_r)?;
    }
    Ok(CheckReport::new(
        "retrieval-ladder-mc",
        (mc.estimate - model).abs(),
        (3.0 * mc.std_error * s).max(f64::MIN_POSITIVE),
        format!("model mean {model:.6} vs Monte Carlo {:.6}", mc.estimate),
    ))
}

fn retrieval_saturated_check(s: f64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for alpha_g in [0.5, 1.0, 2.0, 4.0] {
        let closed = retrieval_saturated_source(alpha_g, 1.0)?;
        let summed = retrieval_efficiency(alpha_g, 40.0, 1.0, 1.0)?;
        worst = worst.max((closed - summed).abs());
    }
    Ok(CheckReport::new(
        "saturated-retrieval-closed-form",
        worst,
        1e-6 * s,
        "deep-scattering limit vs the explicit double sum".into(),
    ))
}

fn single_hit_combinatorics_check(seed: u64, s: f64) -> Result<CheckReport> {
    let classes = mc_decoherence(2, 2, 0.5, 400_000, seed)?;
    Ok(CheckReport::new(
        "single-hit-combinatorics",
        (classes.one.estimate - 0.6875).abs(),
        (3.0 * classes.one.std_error * s).max(f64::MIN_POSITIVE),
        format!(
            "hand value 0.6875 vs Monte Carlo {:.6}",
            classes.one.estimate
        ),
    ))
}

fn pipeline_stage_mc_check(seed: u64, s: f64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, 5);
    let mut worst_ratio = 0.0f64;
    let mut detail = String::new();
    for i in 0..3 {
        let n_g = 1 + (rng.gen::<f64>() * 3.0) as u64;
        let alpha_s = 0.2 + 3.0 * rng.gen::<f64>();
        let eta_s = 0.4 + 0.6 * rng.gen::<f64>();
        let eta_r = 0.4 + 0.6 * rng.gen::<f64>();
        let p = rng.gen::<f64>();
        let mc = mc_pipeline(n_g, alpha_s, eta_s, eta_r, p, 50_000, seed + i)?;
        let model = subtract_prob_coherent_source(n_g, alpha_s, eta_s, eta_r, p)?;
        let sigma = mc.std_error.max(f64::MIN_POSITIVE);
        let ratio = (mc.estimate - model).abs() / sigma;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            detail = format!(
                "worst set n_g={n_g} alpha_s={alpha_s:.3} eta_s={eta_s:.3} \
                 eta_r={eta_r:.3} p={p:.3}: model {model:.6} vs mc {:.6}",
                mc.estimate
            );
        }
    }
    Ok(CheckReport::new(
        "pipeline-stage-mc",
        worst_ratio,
        3.0 * s,
        detail,
    ))
}

fn absorber_recursion_check(s: f64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for (p, pt) in [(0.3, 0.05), (0.9, 0.4), (0.5, 0.0)] {
        let mut prev = 0.0f64;
        for n in 1..=10u64 {
            let direct = absorber::absorber_subtract_given(n, p, pt)?;
            let recursed = p * (1.0 - pt).powi(n as i32 - 1) + (1.0 - p) * prev;
            worst = worst.max((direct - recursed).abs());
            prev = direct;
        }
    }
    Ok(CheckReport::new(
        "absorber-recursion",
        worst,
        1e-12 * s,
        "direct hit sum vs one-photon recursion, ten photon numbers".into(),
    ))
}

fn absorber_residual_identity_check(_s: f64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for d_b in [0.0, 0.5, 1.0, 3.0] {
        for d in [0.0, 0.7, 2.0, 30.0] {
            let fresh = absorber::absorption_probability(d_b, 0.0, d);
            let saturated = absorber::residual_scattering(d_b, d);
            worst = worst.max((fresh - saturated).abs());
        }
    }
    Ok(CheckReport::new(
        "absorber-residual-identity",
        worst,
        0.0,
        "zero transparency bandwidth must reduce fresh to saturated".into(),
    ))
}
