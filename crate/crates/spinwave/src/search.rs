//! Deterministic derivative-free maximization over logarithmic domains:
//! coarse log-spaced scans to bracket, golden-section refinement inside
//! the bracket, and alternating coordinate descent for two parameters.
//!
//! Objectives are fallible; any evaluation error aborts the search.

use crate::error::{Error, Result};

/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Fraction of the domain's log-width under which an argument counts as
/// pinned to that edge.
const EDGE_FRACTION: f64 = 1e-3;

/// Relative spread under which an objective is considered flat across the
/// initial scan.
const FLAT_SPREAD: f64 = 1e-13;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax {
    pub argument: f64,
    pub value: f64,
    /// Maximum sits against the lower/upper domain edge.
    pub at_lower: bool,
    pub at_upper: bool,
    /// Objective was flat across the whole scan; the returned argument is
    /// arbitrary within the domain.
    pub degenerate: bool,
}

/// Result of a two-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneMax {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// Edge flags: x lower/upper, y lower/upper.
    pub x_at_lower: bool,
    pub x_at_upper: bool,
    pub y_at_lower: bool,
    pub y_at_upper: bool,
    pub degenerate: bool,
    /// Coordinate descent stopped by its improvement threshold rather
    /// than the round cap.
    pub converged: bool,
}

/// `n` logarithmically spaced points covering `[lo, hi]` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    check_domain(lo, hi)?;
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "log grid needs at least 2 points, got {n}"
        )));
    }
    let (la, lb) = (lo.ln(), hi.ln());
    let step = (lb - la) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| (la + step * i as f64).exp()).collect();
    // endpoints exactly
    pts[0] = lo;
    pts[n - 1] = hi;
    Ok(pts)
}

fn check_domain(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParams(format!(
            "log-domain bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Maximize `f` over `[lo, hi]`: `scan` log-spaced evaluations to find the
/// best bracket, then golden-section refinement in log coordinates until
/// the bracket's relative width drops below `rel_tol`.
pub fn maximize_log_scalar<F: Fn(f64) -> Result<f64>>(
    f: F,
    lo: f64,
    hi: f64,
    scan: usize,
    rel_tol: f64,
) -> Result<ScalarMax> {
    let pts = log_spaced(lo, hi, scan.max(3))?;
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    for (&x, &v) in pts.iter().zip(&vals) {
        if !v.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "objective returned {v} at {x}"
            )));
        }
    }
    let mut best = 0;
    for i in 1..vals.len() {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let spread = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let degenerate = spread <= FLAT_SPREAD * vals[best].abs().max(1e-300);

    // bracket in log coordinates around the best scan point
    let la = pts[best.saturating_sub(1)].ln();
    let lb = pts[(best + 1).min(pts.len() - 1)].ln();
    let (lx, value) = golden_max(&f, la, lb, rel_tol)?;
    let x = lx.exp();

    // the refined point can only beat the scan, but keep whichever won
    let (argument, value) = if value >= vals[best] {
        (x, value)
    } else {
        (pts[best], vals[best])
    };
    let span = hi.ln() - lo.ln();
    Ok(ScalarMax {
        argument,
        value,
        at_lower: (argument.ln() - lo.ln()) <= EDGE_FRACTION * span,
        at_upper: (hi.ln() - argument.ln()) <= EDGE_FRACTION * span,
        degenerate,
    })
}

/// Golden-section maximization of `x -> f(exp(x))` on `[la, lb]` (log
/// coordinates); returns the midpoint of the final bracket and its value.
fn golden_max<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut la: f64,
    mut lb: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParams(format!(
            "search tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let mut c = lb - INV_PHI * (lb - la);
    let mut d = la + INV_PHI * (lb - la);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    // tolerance on log width == relative tolerance on the argument
    while lb - la > rel_tol {
        if fc > fd {
            lb = d;
            d = c;
            fd = fc;
            c = lb - INV_PHI * (lb - la);
            fc = f(c.exp())?;
        } else {
            la = c;
            c = d;
            fc = fd;
            d = la + INV_PHI * (lb - la);
            fd = f(d.exp())?;
        }
    }
    let lx = 0.5 * (la + lb);
    Ok((lx, f(lx.exp())?))
}

/// Maximize `f(x, y)` over a log-log rectangle: full `grid_n` by `grid_n`
/// scan for the seed, then rounds of alternating one-dimensional
/// golden-section refinements until a round stops improving.
pub fn maximize_log_plane<F: Fn(f64, f64) -> Result<f64>>(
    f: F,
    x_dom: (f64, f64),
    y_dom: (f64, f64),
    grid_n: usize,
    rel_tol: f64,
) -> Result<PlaneMax> {
    let xs = log_spaced(x_dom.0, x_dom.1, grid_n.max(3))?;
    let ys = log_spaced(y_dom.0, y_dom.1, grid_n.max(3))?;
    let mut best = (xs[0], ys[0], f64::NEG_INFINITY);
    let mut lo_v = f64::INFINITY;
    for &x in &xs {
        for &y in &ys {
            let v = f(x, y)?;
            if !v.is_finite() {
                return Err(Error::DegenerateInput(format!(
                    "objective returned {v} at ({x}, {y})"
                )));
            }
            if v > best.2 {
                best = (x, y, v);
            }
            lo_v = lo_v.min(v);
        }
    }
    let degenerate = (best.2 - lo_v) <= FLAT_SPREAD * best.2.abs().max(1e-300);

    let (mut x, mut y, mut value) = best;
    let mut converged = false;
    let max_rounds = 24;
    for _ in 0..max_rounds {
        let (x_prev, y_prev) = (x, y);
        let sx = maximize_log_scalar(|t| f(t, y), x_dom.0, x_dom.1, 9, rel_tol)?;
        if sx.value >= value {
            x = sx.argument;
            value = sx.value;
        }
        let sy = maximize_log_scalar(|t| f(x, t), y_dom.0, y_dom.1, 9, rel_tol)?;
        if sy.value >= value {
            y = sy.argument;
            value = sy.value;
        }
        // stop once a full round no longer moves either argument beyond
        // the golden-section resolution
        let moved = (x.ln() - x_prev.ln())
            .abs()
            .max((y.ln() - y_prev.ln()).abs());
        if moved <= 2.0 * rel_tol {
            converged = true;
            break;
        }
    }
    let x_span = x_dom.1.ln() - x_dom.0.ln();
    let y_span = y_dom.1.ln() - y_dom.0.ln();
    Ok(PlaneMax {
        x,
        y,
        value,
        x_at_lower: (x.ln() - x_dom.0.ln()) <= EDGE_FRACTION * x_span,
        x_at_upper: (x_dom.1.ln() - x.ln()) <= EDGE_FRACTION * x_span,
        y_at_lower: (y.ln() - y_dom.0.ln()) <= EDGE_FRACTION * y_span,
        y_at_upper: (y_dom.1.ln() - y.ln()) <= EDGE_FRACTION * y_span,
        degenerate,
        converged,
    })
}
