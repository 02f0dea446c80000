//! Truncated Poisson expectations, evaluated in log space so large means
//! neither overflow nor lose the tail bound.

use crate::error::{Error, Result};

/// Relative tail mass below which a truncated Poisson sum is accepted.
pub(crate) const TAIL_TOL: f64 = 1e-12;

/// Hard cap on summed terms; reached only for means far beyond anything
/// the model is used at, and reported as an error rather than silence.
pub(crate) const MAX_TERMS: usize = 100_000;

/// Expectation of `f(n)` under a Poisson distribution with mean `mean`,
/// summed from `n = 0` until the remaining tail is provably below
/// [`TAIL_TOL`] relative to the accumulated weight.
///
/// `f` must be bounded by 1 in magnitude on the support (probabilities
/// and interference factors are); the tail bound relies on it.
pub(crate) fn poisson_expect<F: Fn(u64) -> f64>(mean: f64, f: F) -> Result<f64> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "Poisson mean must be finite and non-negative, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(f(0));
    }
    let n_terms = required_terms(mean)?;
    Ok(fixed_expect(mean, n_terms, f))
}

/// Number of terms after which the Poisson tail beyond the last summed
/// index is below [`TAIL_TOL`].
pub(crate) fn required_terms(mean: f64) -> Result<usize> {
    // ln pmf(n) = n ln(mean) - mean - ln(n!), built iteratively
    let ln_mean = mean.ln();
    let mut ln_pmf = -mean;
    let mut cum = 0.0f64;
    for n in 0..MAX_TERMS {
        cum += ln_pmf.exp();
        // beyond the mode the pmf decays faster than the geometric series
        // with ratio mean/(n+1); bound the tail by it
        let nf = (n + 1) as f64;
        if nf > mean {
            let ratio = mean / nf;
            let tail = ln_pmf.exp() * ratio / (1.0 - ratio);
            if tail <= TAIL_TOL * cum.max(f64::MIN_POSITIVE) {
                return Ok(n + 1);
            }
        }
        ln_pmf += ln_mean - nf.ln();
    }
    Err(Error::InvalidParams(format!(
        "Poisson mean {mean} needs more than {MAX_TERMS} terms"
    )))
}

/// Expectation of `f(n)` truncated at exactly `n_terms` terms and
/// renormalized by the truncated weight, so constants average exactly to
/// themselves. Split out so tests can halve or double the truncation.
pub(crate) fn fixed_expect<F: Fn(u64) -> f64>(mean: f64, n_terms: usize, f: F) -> f64 {
    let ln_mean = mean.ln();
    let mut ln_pmf = -mean;
    let mut sum = 0.0f64;
    let mut weight = 0.0f64;
    for n in 0..n_terms {
        let w = ln_pmf.exp();
        weight += w;
        sum += w * f(n as u64);
        ln_pmf += ln_mean - ((n + 1) as f64).ln();
    }
    if weight > 0.0 {
        sum / weight
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectation_of_one_is_one() {
        for mean in [1e-9, 0.3, 1.0, 7.5, 400.0] {
            let s = poisson_expect(mean, |_| 1.0).unwrap();
            assert!((s - 1.0).abs() < 1e-11, "mean {mean}: {s}");
        }
    }

    #[test]
    fn geometric_moment_matches_closed_form() {
        // E[x^N] = exp(-mean (1 - x))
        for (mean, x) in [(0.5f64, 0.25f64), (3.0, 0.9), (40.0, 0.5), (2.0, 0.0)] {
            let s = poisson_expect(mean, |n| x.powi(n as i32)).unwrap();
            let exact = (-mean * (1.0 - x)).exp();
            assert!(
                (s - exact).abs() < 1e-11 * exact.max(1e-3),
                "mean {mean}, x {x}: {s} vs {exact}"
            );
        }
    }

    #[test]
    fn zero_mean_is_the_point_mass_at_zero() {
        assert_eq!(
            poisson_expect(0.0, |n| (n == 0) as u64 as f64).unwrap(),
            1.0
        );
        assert_eq!(poisson_expect(0.0, |n| n as f64).unwrap(), 0.0);
    }

    #[test]
    fn doubling_the_truncation_changes_nothing() {
        for mean in [0.7, 5.0, 120.0] {
            let n = required_terms(mean).unwrap();
            let f = |k: u64| 0.8f64.powi(k as i32);
            let once = fixed_expect(mean, n, f);
            let twice = fixed_expect(mean, 2 * n, f);
            assert!(
                (once - twice).abs() <= 1e-11 * twice.abs().max(1e-300),
                "mean {mean}: {once} vs {twice}"
            );
        }
    }

    #[test]
    fn invalid_means_are_rejected() {
        assert!(poisson_expect(-1.0, |_| 1.0).is_err());
        assert!(poisson_expect(f64::NAN, |_| 1.0).is_err());
        assert!(poisson_expect(f64::INFINITY, |_| 1.0).is_err());
    }
}
