//! Single-photon subtraction through stored-excitation decoherence: stage
//! probabilities for storage, source-induced decoherence, and retrieval,
//! their combination into the probability of removing exactly one photon,
//! and the coherent-state subtraction fidelity with its optimization over
//! the source intensity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FieldSpec;
use crate::poisson::poisson_expect;
use crate::search::maximize_log_scalar;

/// Default source-intensity bounds for the fidelity optimization.
pub const DEFAULT_ALPHA_S_BOUNDS: (f64, f64) = (1e-3, 50.0);

/// Probabilities that a stage removes no photon and exactly one photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageProbs {
    pub none: f64,
    pub one: f64,
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidParams(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Storage of `n_g` photons, each kept independently with probability
/// `eta_s`: chance that all store, and that exactly one is lost.
pub fn storage_probs(n_g: u64, eta_s: f64) -> Result<StageProbs> {
    check_probability("eta_s", eta_s)?;
    Ok(binomial_edge(n_g, eta_s))
}

/// Retrieval of `n_coherent` excitations, each independently with
/// probability `eta_r`: chance that all retrieve, and that exactly one is
/// lost.
pub fn retrieval_probs(n_coherent: u64, eta_r: f64) -> Result<StageProbs> {
    check_probability("eta_r", eta_r)?;
    Ok(binomial_edge(n_coherent, eta_r))
}

fn binomial_edge(n: u64, keep: f64) -> StageProbs {
    if n == 0 {
        return StageProbs {
            none: 1.0,
            one: 0.0,
        };
    }
    let nf = n as f64;
    StageProbs {
        none: keep.powf(nf),
        one: nf * (1.0 - keep) * keep.powf(nf - 1.0),
    }
}

/// Source-induced decoherence of `n_stored` excitations by `n_s` source
/// photons with per-excitation scattering probability `p`: chance that no
/// excitation is decohered, and that exactly one is.
///
/// A photon reaching the `k`-th excitation was shadowed by the `k - 1`
/// upstream ones, so it tags excitation `k` with probability
/// `p (1 - p)^(k-1)` and passes everything with `(1 - p)^n_stored`.
pub fn decoherence_probs(n_stored: u64, n_s: u64, p: f64) -> Result<StageProbs> {
    check_probability("p", p)?;
    if n_stored == 0 {
        return Ok(StageProbs {
            none: 1.0,
            one: 0.0,
        });
    }
    let ns = n_s as f64;
    let pass_all = (1.0 - p).powf(n_stored as f64);
    let none = pass_all.powf(ns);
    let mut one = 0.0;
    let mut shadow = 1.0;
    for _ in 0..n_stored {
        // photons either tag this one excitation or pass everything
        one += (p * shadow + pass_all).powf(ns) - none;
        shadow *= 1.0 - p;
    }
    Ok(StageProbs { none, one })
}

/// Probability that the whole pipeline (storage, decoherence by `n_s`
/// source photons, retrieval) removes exactly one photon from an `n_g`
/// photon gate pulse. One removal can happen in storage, by decoherence,
/// or in retrieval; the other stages must then be lossless.
pub fn subtract_prob_fock(n_g: u64, n_s: u64, eta_s: f64, eta_r: f64, p: f64) -> Result<f64> {
    if n_g == 0 {
        return Err(Error::InvalidParams(
            "subtraction needs at least one gate photon".into(),
        ));
    }
    let st = storage_probs(n_g, eta_s)?;
    let dec_full = decoherence_probs(n_g, n_s, p)?;
    let dec_short = decoherence_probs(n_g - 1, n_s, p)?;
    let ret_full = retrieval_probs(n_g, eta_r)?;
    let ret_short = retrieval_probs(n_g - 1, eta_r)?;
    Ok(st.one * dec_short.none * ret_short.none
        + st.none * dec_full.one * ret_short.none
        + st.none * dec_full.none * ret_full.one)
}

/// Subtraction probability for a coherent source field with mean photon
/// number `alpha_s`: the Poisson average of the fixed-count pipeline.
pub fn subtract_prob_coherent_source(
    n_g: u64,
    alpha_s: f64,
    eta_s: f64,
    eta_r: f64,
    p: f64,
) -> Result<f64> {
    if n_g == 0 {
        return Err(Error::InvalidParams(
            "subtraction needs at least one gate photon".into(),
        ));
    }
    // validate once up front; the averaged closure then cannot fail
    subtract_prob_fock(n_g, 0, eta_s, eta_r, p)?;
    poisson_expect(alpha_s, |n_s| {
        subtract_prob_fock(n_g, n_s, eta_s, eta_r, p).expect("validated above")
    })
}

/// Fidelity of single-photon subtraction from a coherent gate pulse: the
/// Poisson-weighted probability that exactly one photon is removed, with
/// the vacuum component counted as already perfect.
pub fn fidelity(fields: &FieldSpec, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if fields.alpha_g == 0.0 {
        return Ok(1.0);
    }
    poisson_expect(fields.alpha_g, |n_g| {
        if n_g == 0 {
            1.0
        } else {
            subtract_prob_coherent_source(n_g, fields.alpha_s, fields.eta_s, fields.eta_r, p)
                .expect("validated parameters")
        }
    })
}

/// Outcome of maximizing the subtraction fidelity over the source
/// intensity.
#[derive(Debug, Clone, Serialize)]
pub struct SubtractionReport {
    /// Best fidelity found.
    pub fidelity: f64,
    /// Source intensity achieving it.
    pub alpha_s_opt: f64,
    /// Per-Fock subtraction probabilities at the optimum, starting at
    /// `n_g = 0` (which is 1 by convention).
    pub per_fock: Vec<(u64, f64)>,
    pub alpha_g: f64,
    pub eta_s: f64,
    pub eta_r: f64,
    pub p: f64,
    pub bounds: (f64, f64),
    /// Fidelity was flat across the bounds; `alpha_s_opt` is arbitrary.
    pub degenerate: bool,
}

/// Number of Fock components reported alongside an optimization result.
const PER_FOCK_TERMS: u64 = 8;

/// Maximize the subtraction fidelity over `alpha_s` within `bounds`
/// (positive, default [`DEFAULT_ALPHA_S_BOUNDS`]): coarse log-spaced scan
/// followed by golden-section refinement.
pub fn optimize_fidelity(
    alpha_g: f64,
    eta_s: f64,
    eta_r: f64,
    p: f64,
    bounds: (f64, f64),
) -> Result<SubtractionReport> {
    let probe = FieldSpec::new(alpha_g, bounds.0, eta_s, eta_r)?;
    fidelity(&probe, p)?;
    let max = maximize_log_scalar(
        |alpha_s| {
            let fields = FieldSpec::new(alpha_g, alpha_s, eta_s, eta_r)?;
            fidelity(&fields, p)
        },
        bounds.0,
        bounds.1,
        17,
        1e-10,
    )?;
    let per_fock = (0..PER_FOCK_TERMS)
        .map(|n_g| {
            let p1 = if n_g == 0 {
                1.0
            } else {
                subtract_prob_coherent_source(n_g, max.argument, eta_s, eta_r, p)?
            };
            Ok((n_g, p1))
        })
        .collect::<Result<_>>()?;
    Ok(SubtractionReport {
        fidelity: max.value,
        alpha_s_opt: max.argument,
        per_fock,
        alpha_g,
        eta_s,
        eta_r,
        p,
        bounds,
        degenerate: max.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scattering_probability;

    #[test]
    fn storage_examples() {
        let s = storage_probs(3, 1.0).unwrap();
        assert_eq!((s.none, s.one), (1.0, 0.0));
        let s = storage_probs(2, 0.8).unwrap();
        assert!((s.none - 0.64).abs() < 1e-15);
        assert!((s.one - 0.32).abs() < 1e-15);
        let s = storage_probs(0, 0.3).unwrap();
        assert_eq!((s.none, s.one), (1.0, 0.0));
    }

    #[test]
    fn retrieval_examples() {
        let r = retrieval_probs(3, 0.9).unwrap();
        assert!((r.none - 0.729).abs() < 1e-15);
        assert!((r.one - 0.243).abs() < 1e-15);
    }

    #[test]
    fn decoherence_with_no_source_photons_changes_nothing() {
        let d = decoherence_probs(4, 0, 0.7).unwrap();
        assert_eq!((d.none, d.one), (1.0, 0.0));
    }

    #[test]
    fn full_scattering_always_tags_the_first_excitation() {
        for n_stored in [1, 2, 5] {
            for n_s in [1, 3, 10] {
                let d = decoherence_probs(n_stored, n_s, 1.0).unwrap();
                assert_eq!(d.none, 0.0, "n {n_stored}, n_s {n_s}");
                assert!((d.one - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_photons_two_excitations_hand_value() {
        let d = decoherence_probs(2, 2, 0.5).unwrap();
        assert!((d.one - 0.6875).abs() < 1e-15, "got {}", d.one);
        assert!((d.none - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn stage_probabilities_are_consistent() {
        for n in [0u64, 1, 2, 7] {
            for n_s in [0u64, 1, 4] {
                for p in [0.0, 0.2, 0.9, 1.0] {
                    let d = decoherence_probs(n, n_s, p).unwrap();
                    assert!((0.0..=1.0).contains(&d.none));
                    assert!((0.0..=1.0).contains(&d.one));
                    assert!(d.none + d.one <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn perfect_pipeline_always_subtracts_one() {
        for n_g in [1, 2, 6] {
            for n_s in [1, 4] {
                let v = subtract_prob_fock(n_g, n_s, 1.0, 1.0, 1.0).unwrap();
                assert!((v - 1.0).abs() < 1e-15, "n_g {n_g}, n_s {n_s}: {v}");
            }
        }
    }

    #[test]
    fn nothing_to_remove_without_source_or_loss() {
        for n_g in [1, 3] {
            let v = subtract_prob_fock(n_g, 0, 1.0, 1.0, 0.6).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn storage_and_retrieval_losses_are_exchangeable_without_scattering() {
        for n_g in [1, 2, 5] {
            for n_s in [0, 3] {
                for (es, er) in [(0.7, 0.95), (0.4, 0.85), (1.0, 0.6)] {
                    let a = subtract_prob_fock(n_g, n_s, es, er, 0.0).unwrap();
                    let b = subtract_prob_fock(n_g, n_s, er, es, 0.0).unwrap();
                    assert!(
                        (a - b).abs() < 1e-14,
                        "n_g {n_g}, n_s {n_s}, ({es}, {er}): {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn coherent_source_collapses_at_full_scattering() {
        for alpha_s in [0.0, 0.5, 2.0, 10.0] {
            for n_g in [1, 2, 4] {
                let v = subtract_prob_coherent_source(n_g, alpha_s, 1.0, 1.0, 1.0).unwrap();
                let exact = 1.0 - (-alpha_s).exp();
                assert!(
                    (v - exact).abs() < 1e-12,
                    "n_g {n_g}, alpha_s {alpha_s}: {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn weak_source_cannot_subtract_from_a_perfect_pipeline() {
        let v = subtract_prob_coherent_source(3, 0.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn vacuum_gate_pulse_has_unit_fidelity() {
        let fields = FieldSpec::new(0.0, 3.0, 0.9, 0.9).unwrap();
        assert_eq!(fidelity(&fields, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn saturated_source_with_full_scattering_is_perfect() {
        for alpha_g in [0.5, 2.0, 5.0] {
            let fields = FieldSpec::new(alpha_g, 40.0, 1.0, 1.0).unwrap();
            let f = fidelity(&fields, 1.0).unwrap();
            assert!((f - 1.0).abs() < 1e-12, "alpha_g {alpha_g}: {f}");
        }
    }

    #[test]
    fn optimizer_beats_a_dense_grid() {
        let (alpha_g, eta, p) = (2.0, 0.9, 0.8);
        let rep = optimize_fidelity(alpha_g, eta, eta, p, DEFAULT_ALPHA_S_BOUNDS).unwrap();
        for alpha_s in crate::search::log_spaced(1e-3, 50.0, 33).unwrap() {
            let fields = FieldSpec::new(alpha_g, alpha_s, eta, eta).unwrap();
            let f = fidelity(&fields, p).unwrap();
            assert!(
                rep.fidelity >= f - 1e-12,
                "grid point {alpha_s} beats optimum: {f} > {}",
                rep.fidelity
            );
        }
        assert!(!rep.degenerate);
        assert!((0.0..=1.0).contains(&rep.fidelity));
    }

    #[test]
    fn flat_fidelity_is_flagged_degenerate() {
        // without scattering and with perfect storage and retrieval the
        // source intensity has nothing to act on
        let rep = optimize_fidelity(1.5, 1.0, 1.0, 0.0, DEFAULT_ALPHA_S_BOUNDS).unwrap();
        assert!(rep.degenerate);
        assert!((rep.fidelity - (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn strong_blockade_subtracts_nearly_perfectly() {
        let p = scattering_probability(5.0);
        let rep = optimize_fidelity(2.0, 1.0, 1.0, p, DEFAULT_ALPHA_S_BOUNDS).unwrap();
        assert!(rep.fidelity > 0.95, "got {}", rep.fidelity);
    }

    #[test]
    fn per_fock_breakdown_is_probabilistic_and_starts_at_vacuum() {
        let rep = optimize_fidelity(1.0, 0.95, 0.9, 0.6, DEFAULT_ALPHA_S_BOUNDS).unwrap();
        assert_eq!(rep.per_fock[0], (0, 1.0));
        for &(n_g, p1) in &rep.per_fock {
            assert!((0.0..=1.0).contains(&p1), "n_g {n_g}: {p1}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(subtract_prob_fock(0, 1, 1.0, 1.0, 0.5).is_err());
        assert!(subtract_prob_fock(1, 1, 1.5, 1.0, 0.5).is_err());
        assert!(decoherence_probs(1, 1, -0.1).is_err());
        assert!(subtract_prob_coherent_source(1, -1.0, 1.0, 1.0, 0.5).is_err());
    }
}
