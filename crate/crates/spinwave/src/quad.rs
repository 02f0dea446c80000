//! Adaptive panel quadrature for complex integrands.
//!
//! Panels start at caller-supplied breakpoints (excitation neighborhoods
//! are not discoverable by blind sampling: the integrands are flat almost
//! everywhere) and are bisected worst-error-first until the summed
//! Gauss/Kronrod residual meets tolerance. A `Prefix` wraps the refined
//! panel list into a cumulative integral so z-dependent exponents cost one
//! extra rule evaluation instead of a fresh adaptive pass.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (positive half, descending) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
    0.0,
];
const WGK: [f64; 8] = [
    0.0229353220105292,
    0.0630920926299786,
    0.1047900103222502,
    0.1406532597155259,
    0.1690047266392679,
    0.1903505780647854,
    0.2044329400752989,
    0.2094821410847278,
];
const WG: [f64; 4] = [
    0.1294849661688697,
    0.2797053914892767,
    0.3818300505051189,
    0.4179591836734694,
];

/// One converged panel of an adaptive pass.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: C64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Quadrature {
    pub value: C64,
    pub error: f64,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadSpec {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_panels: usize,
}

impl QuadSpec {
    pub fn new(rel_tol: f64, abs_floor: f64) -> Self {
        Self {
            rel_tol,
            abs_floor,
            max_panels: 4000,
        }
    }
}

/// Single Kronrod-15 application on [a, b]; returns (integral, |K15 - G7|).
pub(crate) fn kronrod15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, (kron - gauss).norm() * h.abs())
}

fn eval_panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, error) = kronrod15(f, a, b);
    Panel { a, b, value, error }
}

/// Adaptive integration over consecutive breakpoint intervals.
/// `breakpoints` must be sorted and contain at least the two endpoints.
pub(crate) fn integrate<F: Fn(f64) -> C64>(
    f: &F,
    breakpoints: &[f64],
    spec: &QuadSpec,
) -> Result<Quadrature> {
    assert!(breakpoints.len() >= 2, "need at least interval endpoints");
    let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    // Narrower panels than this are float noise; stop bisecting them.
    let min_width = span.abs() * 1e-13;

    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| eval_panel(f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Ok(Quadrature {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            panels,
        });
    }

    loop {
        let total: C64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = spec.abs_floor.max(spec.rel_tol * total.norm());
        if err <= tol {
            panels.sort_by(|l, r| l.a.total_cmp(&r.a));
            return Ok(Quadrature {
                value: total,
                error: err,
                panels,
            });
        }
        if panels.len() >= spec.max_panels {
            return Err(Error::QuadratureFailure {
                estimate: err,
                tolerance: tol,
                panels: panels.len(),
            });
        }
        // worst splittable panel; first index wins ties so refinement order
        // is deterministic
        let mut worst: Option<usize> = None;
        for (i, p) in panels.iter().enumerate() {
            if p.b - p.a <= min_width {
                continue;
            }
            if worst.is_none_or(|w| p.error > panels[w].error) {
                worst = Some(i);
            }
        }
        let Some(i) = worst else {
            return Err(Error::QuadratureFailure {
                estimate: err,
                tolerance: tol,
                panels: panels.len(),
            });
        };
        let Panel { a, b, .. } = panels[i];
        let mid = 0.5 * (a + b);
        panels[i] = eval_panel(f, a, mid);
        panels.push(eval_panel(f, mid, b));
    }
}

/// Cumulative integral from the interval start, backed by the refined
/// panels of one adaptive pass. An interior query integrates the partial
/// panel with a single rule application. Holds no reference to the
/// integrand; `eval` must be called with the same function that built it.
#[derive(Debug, Clone)]
pub(crate) struct Prefix {
    bounds: Vec<f64>,
    cum: Vec<C64>,
    pub error: f64,
}

impl Prefix {
    pub fn build<F: Fn(f64) -> C64>(f: &F, breakpoints: &[f64], spec: &QuadSpec) -> Result<Self> {
        let q = integrate(f, breakpoints, spec)?;
        let mut bounds = Vec::with_capacity(q.panels.len() + 1);
        let mut cum = Vec::with_capacity(q.panels.len() + 1);
        bounds.push(breakpoints[0]);
        cum.push(C64::new(0.0, 0.0));
        let mut acc = C64::new(0.0, 0.0);
        for p in &q.panels {
            acc += p.value;
            bounds.push(p.b);
            cum.push(acc);
        }
        Ok(Self {
            bounds,
            cum,
            error: q.error,
        })
    }

    /// Integral from the interval start to `z` (clamped to the interval).
    pub fn eval<F: Fn(f64) -> C64>(&self, f: &F, z: f64) -> C64 {
        let n = self.bounds.len();
        if z <= self.bounds[0] {
            return C64::new(0.0, 0.0);
        }
        if z >= self.bounds[n - 1] {
            return self.cum[n - 1];
        }
        let idx = self.bounds.partition_point(|&b| b <= z) - 1;
        let (partial, _) = kronrod15(f, self.bounds[idx], z);
        self.cum[idx] + partial
    }

    /// Integral over the whole interval.
    pub fn total(&self) -> C64 {
        *self.cum.last().unwrap()
    }
}

/// Endpoint list with forced breakpoints around every excitation: the
/// position itself and its unit neighborhood edges, where the interaction
/// crosses unity and the integrands turn over.
pub(crate) fn breakpoints_for(coords: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &c in coords {
        for z in [c - 1.0, c, c + 1.0] {
            if z > lo && z < hi {
                pts.push(z);
            }
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo).abs());
    pts
}
