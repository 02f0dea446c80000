//! Retrieval efficiency of a stored collective excitation after source
//! photons have transited the medium.
//!
//! Excitations are ordered by depth; excitation `k` is only reached by a
//! source photon that survived the `k - 1` excitations upstream of it, so
//! its per-photon scattering probability is shadowed down to
//! `p (1 - p)^(k-1)`. Source and gate photon numbers are Poissonian with
//! means `alpha_s` and `alpha_g`.

use crate::error::{Error, Result};
use crate::poisson::MAX_TERMS;

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidParams(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

fn check_mean(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "{name} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

/// Scattering probability of one source photon on the `k`-th stored
/// excitation (1-based), shadowed by the `k - 1` upstream excitations.
pub fn shadowed_scattering(k: usize, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if k == 0 {
        return Err(Error::InvalidParams(
            "excitation index is 1-based; got 0".into(),
        ));
    }
    Ok(p * (1.0 - p).powi((k - 1) as i32))
}

/// Retrieval efficiency of the `k`-th excitation after exactly `n_s`
/// source photons.
pub fn retrieval_fixed_photons(k: usize, n_s: u64, p: f64, eta_r: f64) -> Result<f64> {
    check_probability("eta_r", eta_r)?;
    let q = shadowed_scattering(k, p)?;
    Ok(eta_r * (1.0 - q).powf(n_s as f64))
}

/// Retrieval efficiency with Poissonian gate and source photon numbers:
/// the mean number of retrievable excitations over the mean number
/// stored. At `alpha_g = 0` the continuous limit (a single excitation) is
/// returned.
pub fn retrieval_efficiency(alpha_g: f64, alpha_s: f64, p: f64, eta_r: f64) -> Result<f64> {
    check_mean("alpha_g", alpha_g)?;
    check_mean("alpha_s", alpha_s)?;
    check_probability("p", p)?;
    check_probability("eta_r", eta_r)?;
    if alpha_s * p == 0.0 {
        // nothing scatters; the truncated sums would only add rounding
        return Ok(eta_r);
    }
    if alpha_g == 0.0 {
        return Ok(eta_r * (-alpha_s * p).exp());
    }

    // sum over the stored count n of pmf(n) * S(n), where
    // S(n) = sum_{k<=n} exp(-alpha_s p (1-p)^(k-1)) grows one term per n
    let ln_mean = alpha_g.ln();
    let mut ln_pmf = -alpha_g;
    let mut inner = 0.0f64;
    let mut shadow = 1.0f64;
    let mut sum = 0.0f64;
    for n in 1..=MAX_TERMS {
        let nf = n as f64;
        ln_pmf += ln_mean - nf.ln();
        inner += (-alpha_s * p * shadow).exp();
        shadow *= 1.0 - p;
        sum += ln_pmf.exp() * inner;
        if nf > alpha_g {
            // S(m) <= m, so the tail is below sum_{m>n} pmf(m) m, bounded
            // through the geometric ratio r = alpha_g / (n + 1)
            let r = alpha_g / (nf + 1.0);
            let tail = ln_pmf.exp() * (nf * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
            if tail <= 1e-13 * sum.max(f64::MIN_POSITIVE) {
                return Ok(eta_r * sum / alpha_g);
            }
        }
    }
    Err(Error::InvalidParams(format!(
        "gate mean {alpha_g} needs more than {MAX_TERMS} terms"
    )))
}

/// Retrieval efficiency if every excitation were exposed to the full
/// single-excitation scattering probability (no shadowing).
pub fn retrieval_unshadowed(alpha_s: f64, p: f64, eta_r: f64) -> Result<f64> {
    check_mean("alpha_s", alpha_s)?;
    check_probability("p", p)?;
    check_probability("eta_r", eta_r)?;
    Ok(eta_r * (-alpha_s * p).exp())
}

/// Saturated-source limit of the retrieval efficiency at full
/// single-photon scattering (`p = 1`, `alpha_s` large): only the
/// excitations behind the first survive.
pub fn retrieval_saturated_source(alpha_g: f64, eta_r: f64) -> Result<f64> {
    check_mean("alpha_g", alpha_g)?;
    check_probability("eta_r", eta_r)?;
    if alpha_g == 0.0 {
        return Ok(0.0);
    }
    Ok(eta_r * (alpha_g - 1.0 + (-alpha_g).exp()) / alpha_g)
}

/// Mean number of gate photons retrieved.
pub fn mean_retrieved(alpha_g: f64, alpha_s: f64, p: f64, eta_r: f64) -> Result<f64> {
    Ok(alpha_g * retrieval_efficiency(alpha_g, alpha_s, p, eta_r)?)
}

/// Mean number of source photons scattered during the transit. A source
/// photon scatters unless it survives every stored excitation, and the
/// Poisson average over the stored count collapses to a closed form.
pub fn mean_scattered(alpha_g: f64, alpha_s: f64, p: f64) -> Result<f64> {
    check_mean("alpha_g", alpha_g)?;
    check_mean("alpha_s", alpha_s)?;
    check_probability("p", p)?;
    Ok(alpha_s * (1.0 - (-alpha_g * p).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::poisson_expect;

    #[test]
    fn no_source_photons_leaves_retrieval_untouched() {
        for alpha_g in [0.05, 0.5, 2.0, 8.0] {
            for p in [0.0, 0.3, 1.0] {
                let eta = retrieval_efficiency(alpha_g, 0.0, p, 0.83).unwrap();
                assert!(
                    (eta - 0.83).abs() < 1e-12,
                    "alpha_g {alpha_g}, p {p}: {eta}"
                );
            }
        }
    }

    #[test]
    fn harmless_source_photons_leave_retrieval_untouched() {
        for alpha_s in [0.5, 4.0, 40.0] {
            let eta = retrieval_efficiency(1.3, alpha_s, 0.0, 0.9).unwrap();
            assert!((eta - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn full_scattering_matches_closed_form() {
        // at p = 1 only the first excitation is exposed, so
        // eta / eta_r = 1 - (1 - e^-ag)(1 - e^-as) / ag
        for alpha_g in [0.1, 0.7, 2.0, 5.0] {
            for alpha_s in [0.0, 0.4, 3.0, 20.0] {
                let eta = retrieval_efficiency(alpha_g, alpha_s, 1.0, 1.0).unwrap();
                let exact = 1.0 - (1.0 - (-alpha_g).exp()) * (1.0 - (-alpha_s).exp()) / alpha_g;
                assert!(
                    (eta - exact).abs() < 1e-12,
                    "ag {alpha_g}, as {alpha_s}: {eta} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn dilute_gate_limit_is_continuous() {
        let at_zero = retrieval_efficiency(0.0, 2.0, 0.6, 1.0).unwrap();
        let near_zero = retrieval_efficiency(1e-9, 2.0, 0.6, 1.0).unwrap();
        assert!((at_zero - (-1.2f64).exp()).abs() < 1e-14);
        assert!((at_zero - near_zero).abs() < 1e-8);
    }

    #[test]
    fn saturated_source_limit_is_reached() {
        for alpha_g in [0.5, 1.0, 2.0, 4.0] {
            let eta = retrieval_efficiency(alpha_g, 40.0, 1.0, 1.0).unwrap();
            let dashed = retrieval_saturated_source(alpha_g, 1.0).unwrap();
            assert!(
                (eta - dashed).abs() < 1e-6,
                "ag {alpha_g}: {eta} vs {dashed}"
            );
        }
    }

    #[test]
    fn shadowing_never_hurts() {
        for alpha_g in [0.05, 0.5, 2.0, 6.0] {
            for alpha_s in [0.25, 1.0, 4.0] {
                for p in [0.1, 0.5, 0.9, 1.0] {
                    let eta = retrieval_efficiency(alpha_g, alpha_s, p, 1.0).unwrap();
                    let bare = retrieval_unshadowed(alpha_s, p, 1.0).unwrap();
                    assert!(
                        eta >= bare - 1e-12,
                        "ag {alpha_g}, as {alpha_s}, p {p}: {eta} < {bare}"
                    );
                }
            }
        }
    }

    #[test]
    fn more_source_photons_only_degrade() {
        let mut prev = f64::INFINITY;
        for alpha_s in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let eta = retrieval_efficiency(1.5, alpha_s, 0.4, 1.0).unwrap();
            assert!(eta < prev || alpha_s == 0.0 && eta <= prev);
            prev = eta;
        }
    }

    #[test]
    fn fixed_photon_count_averages_to_the_poisson_factor() {
        // E over n_s of (1 - q_k)^n_s equals exp(-alpha_s q_k)
        let (p, alpha_s, k) = (0.35, 2.7, 3);
        let avg =
            poisson_expect(alpha_s, |n| retrieval_fixed_photons(k, n, p, 1.0).unwrap()).unwrap();
        let q = shadowed_scattering(k, p).unwrap();
        assert!((avg - (-alpha_s * q).exp()).abs() < 1e-11);
    }

    #[test]
    fn scattered_photon_count_matches_direct_average() {
        // direct Poisson average of 1 - (1-p)^n against the closed form
        for (alpha_g, alpha_s, p) in [(0.3f64, 1.0f64, 0.2f64), (2.0, 5.0, 0.77), (6.0, 0.5, 1.0)] {
            let direct =
                alpha_s * poisson_expect(alpha_g, |n| 1.0 - (1.0 - p).powi(n as i32)).unwrap();
            let closed = mean_scattered(alpha_g, alpha_s, p).unwrap();
            assert!(
                (direct - closed).abs() < 1e-11 * closed.max(1e-6),
                "{direct} vs {closed}"
            );
        }
    }

    #[test]
    fn deep_excitations_are_protected() {
        let q1 = shadowed_scattering(1, 0.6).unwrap();
        let q4 = shadowed_scattering(4, 0.6).unwrap();
        assert_eq!(q1, 0.6);
        assert!((q4 - 0.6 * 0.4f64.powi(3)).abs() < 1e-15);
        assert!(q4 < q1);
        let deep = retrieval_fixed_photons(30, 100, 0.6, 1.0).unwrap();
        assert!(deep > 0.9999);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(retrieval_efficiency(-0.1, 1.0, 0.5, 1.0).is_err());
        assert!(retrieval_efficiency(1.0, -1.0, 0.5, 1.0).is_err());
        assert!(retrieval_efficiency(1.0, 1.0, 1.5, 1.0).is_err());
        assert!(retrieval_efficiency(1.0, 1.0, 0.5, -0.2).is_err());
        assert!(shadowed_scattering(0, 0.5).is_err());
        assert!(retrieval_fixed_photons(1, 2, f64::NAN, 1.0).is_err());
    }
}
