//! Medium description and elementary interaction quantities.
//!
//! Lengths are measured in blockade radii, so the interaction induced by a
//! stored excitation is the dimensionless `r^-6` profile and the only medium
//! parameters left are the optical depth per blockade radius `d_b`, the
//! medium length, and numerical knobs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default medium length in blockade radii. A choice, not physics: the
/// medium only needs to be long compared to the excitation neighborhoods.
pub const DEFAULT_LENGTH: f64 = 20.0;
/// Default sampling density (points per blockade radius) for density grids.
/// The floor that still resolves blockade-scale features; every grid point
/// pair costs one kernel quadrature, so finer grids grow cost quadratically.
pub const DEFAULT_GRID_POINTS: u32 = 8;
/// Default relative tolerance for the kernel quadratures.
pub const DEFAULT_QUAD_REL_TOL: f64 = 1e-9;
/// Default interaction cap. Values above this are saturated; the capped
/// region only matters within `v_cap^(-1/6)` of an excitation.
pub const DEFAULT_V_CAP: f64 = 1e12;

/// Approximate decay exponent per unit optical depth, `p ~ 1 - exp(-4 d_b)`.
pub const DECAY_EXPONENT_APPROX: f64 = 4.0;

/// Exact decay exponent per unit optical depth of the single-excitation
/// transmission probability: `(4π/3)·cos(π/12) = 4.0460606...`.
pub fn decay_exponent_exact() -> f64 {
    4.0 * std::f64::consts::PI / 3.0 * (std::f64::consts::PI / 12.0).cos()
}

/// Medium and numerical parameters shared by the kernel computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Optical depth per blockade radius.
    pub d_b: f64,
    /// Medium length in blockade radii.
    pub length: f64,
    /// Relative tolerance for adaptive quadrature.
    pub quad_rel_tol: f64,
    /// Sampling density for density-matrix grids, points per blockade radius.
    pub grid_points: u32,
    /// Saturation cap for the rescaled interaction.
    pub v_cap: f64,
}

impl ModelParams {
    pub fn new(d_b: f64) -> Result<Self> {
        Self::with(
            d_b,
            DEFAULT_LENGTH,
            DEFAULT_QUAD_REL_TOL,
            DEFAULT_GRID_POINTS,
            DEFAULT_V_CAP,
        )
    }

    pub fn with(
        d_b: f64,
        length: f64,
        quad_rel_tol: f64,
        grid_points: u32,
        v_cap: f64,
    ) -> Result<Self> {
        if !d_b.is_finite() || d_b < 0.0 {
            return Err(Error::InvalidParams(format!("d_b = {d_b} must be >= 0")));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "length = {length} must be positive"
            )));
        }
        if !(quad_rel_tol > 0.0 && quad_rel_tol < 1.0) {
            return Err(Error::InvalidParams(format!(
                "quad_rel_tol = {quad_rel_tol} must lie in (0, 1)"
            )));
        }
        if grid_points < 8 {
            return Err(Error::InvalidParams(format!(
                "grid_points = {grid_points} must be >= 8 per blockade radius"
            )));
        }
        if !v_cap.is_finite() || v_cap < 1e6 {
            return Err(Error::InvalidParams(format!(
                "v_cap = {v_cap} must be >= 1e6"
            )));
        }
        Ok(Self {
            d_b,
            length,
            quad_rel_tol,
            grid_points,
            v_cap,
        })
    }

    /// Same medium at a different optical depth.
    pub fn at_d_b(&self, d_b: f64) -> Result<Self> {
        Self::with(
            d_b,
            self.length,
            self.quad_rel_tol,
            self.grid_points,
            self.v_cap,
        )
    }
}

/// Ordered excitation positions of one side of the coherence kernel,
/// in blockade radii from the medium entrance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    positions: Vec<f64>,
}

impl GateConfig {
    /// Builds a configuration from arbitrary-order positions. Positions are
    /// sorted; the result must be strictly ascending (no duplicates).
    pub fn new(mut positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParams(
                "excitation list must not be empty".into(),
            ));
        }
        if positions.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParams(
                "excitation positions must be finite".into(),
            ));
        }
        positions.sort_by(|a, b| a.total_cmp(b));
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "excitation positions must be distinct".into(),
            ));
        }
        Ok(Self { positions })
    }

    /// The trivial configuration with no stored excitation. Kept separate
    /// from `new` so parsed user input still has to name at least one
    /// excitation.
    pub fn empty() -> Self {
        Self {
            positions: Vec::new(),
        }
    }

    /// Internal constructor for grids that may place two excitations at the
    /// same point (e.g. a scan coordinate crossing a fixed one). Caller
    /// guarantees sortedness.
    pub(crate) fn from_sorted_unchecked(positions: Vec<f64>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] <= w[1]));
        Self { positions }
    }

    pub fn n_g(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn min_position(&self) -> Option<f64> {
        self.positions.first().copied()
    }

    /// All positions inside the medium?
    pub fn check_in_medium(&self, params: &ModelParams) -> Result<()> {
        for &z in &self.positions {
            if z < 0.0 || z > params.length {
                return Err(Error::OutOfDomain {
                    value: z,
                    length: params.length,
                });
            }
        }
        Ok(())
    }

    /// True when any excitation sits within `margin` blockade radii of a
    /// medium face; such configurations are allowed but their neighborhood
    /// integrals are truncated by the boundary.
    pub fn near_boundary(&self, params: &ModelParams, margin: f64) -> bool {
        self.positions
            .iter()
            .any(|&z| z < margin || z > params.length - margin)
    }

    /// Smallest separation between consecutive positions, `inf` for fewer
    /// than two excitations.
    pub fn min_separation(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Coherent-field and linear-loss parameters of one subtraction run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Mean photon number of the gate pulse.
    pub alpha_g: f64,
    /// Mean photon number of the source pulse.
    pub alpha_s: f64,
    /// Single-photon storage efficiency.
    pub eta_s: f64,
    /// Single-excitation retrieval efficiency.
    pub eta_r: f64,
}

impl FieldSpec {
    pub fn new(alpha_g: f64, alpha_s: f64, eta_s: f64, eta_r: f64) -> Result<Self> {
        for (name, v) in [("alpha_g", alpha_g), ("alpha_s", alpha_s)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        for (name, v) in [("eta_s", eta_s), ("eta_r", eta_r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must lie in [0, 1]"
                )));
            }
        }
        Ok(Self {
            alpha_g,
            alpha_s,
            eta_s,
            eta_r,
        })
    }
}

/// Saturated interaction of a single excitation at distance `r`.
pub fn rescaled_potential(r: f64, v_cap: f64) -> f64 {
    let r6 = r.powi(6);
    // r^6 underflows to 0 at the contact point; the cap keeps the value
    // finite there.
    if r6 * v_cap <= 1.0 {
        v_cap
    } else {
        1.0 / r6
    }
}

/// Total interaction at `z` from every excitation in `config`.
pub fn total_potential(z: f64, config: &GateConfig, v_cap: f64) -> f64 {
    config
        .positions()
        .iter()
        .map(|&x| rescaled_potential(z - x, v_cap))
        .sum()
}

/// Scattering probability of one source photon crossing one stored
/// excitation, exact exponent.
pub fn scattering_probability(d_b: f64) -> f64 {
    1.0 - (-decay_exponent_exact() * d_b).exp()
}

/// Same with the rounded exponent 4.0 that shows up in quick estimates.
pub fn scattering_probability_approx(d_b: f64) -> f64 {
    1.0 - (-DECAY_EXPONENT_APPROX * d_b).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_reference_points() {
        assert_eq!(rescaled_potential(1.0, DEFAULT_V_CAP), 1.0);
        assert_eq!(rescaled_potential(2.0, DEFAULT_V_CAP), 1.0 / 64.0);
        assert_eq!(rescaled_potential(-2.0, DEFAULT_V_CAP), 1.0 / 64.0);
        // capped close to contact: uncapped value would be 1e18
        assert_eq!(rescaled_potential(1e-3, 1e9), 1e9);
        assert_eq!(rescaled_potential(0.0, 1e9), 1e9);
    }

    #[test]
    fn potential_is_even_and_decreasing() {
        let mut prev = rescaled_potential(0.05, DEFAULT_V_CAP);
        for i in 1..200 {
            let r = 0.05 + 0.05 * i as f64;
            let v = rescaled_potential(r, DEFAULT_V_CAP);
            assert_eq!(v, rescaled_potential(-r, DEFAULT_V_CAP));
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn total_potential_sums_contributions() {
        let config = GateConfig::new(vec![5.0, 12.0]).unwrap();
        let v = total_potential(6.0, &config, DEFAULT_V_CAP);
        let expected = 1.0 + 1.0 / 6.0f64.powi(6);
        assert!((v - expected).abs() < 1e-15);
        assert_eq!(
            total_potential(3.0, &GateConfig::empty(), DEFAULT_V_CAP),
            0.0
        );
    }

    #[test]
    fn scattering_probability_limits() {
        assert_eq!(scattering_probability(0.0), 0.0);
        assert!(scattering_probability(200.0) == 1.0);
        // exact coefficient; the commonly quoted rounded figure is 4.045968
        let c = decay_exponent_exact();
        assert!((c - 4.04606063970985).abs() < 1e-12);
        assert!((c - 4.045968).abs() < 1e-4);
        let p1 = scattering_probability(1.0);
        assert!((p1 - (1.0 - (-c).exp())).abs() < 1e-15);
        assert!(scattering_probability_approx(1.0) < p1);
    }

    #[test]
    fn gate_config_sorts_and_rejects() {
        let g = GateConfig::new(vec![12.0, 5.0, 7.5]).unwrap();
        assert_eq!(g.positions(), &[5.0, 7.5, 12.0]);
        assert_eq!(g.n_g(), 3);
        assert!((g.min_separation() - 2.5).abs() < 1e-15);
        assert!(GateConfig::new(vec![]).is_err());
        assert!(GateConfig::new(vec![1.0, 1.0]).is_err());
        assert!(GateConfig::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn gate_config_domain_checks() {
        let params = ModelParams::new(1.0).unwrap();
        let g = GateConfig::new(vec![1.0, 19.5]).unwrap();
        assert!(g.check_in_medium(&params).is_ok());
        assert!(g.near_boundary(&params, 2.0));
        let far = GateConfig::new(vec![25.0]).unwrap();
        assert!(far.check_in_medium(&params).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2.0).is_ok());
        assert!(ModelParams::new(-1.0).is_err());
        assert!(ModelParams::with(1.0, 20.0, 1e-9, 4, 1e12).is_err());
        assert!(ModelParams::with(1.0, 20.0, 1e-9, 64, 1e3).is_err());
        assert!(ModelParams::with(1.0, 0.0, 1e-9, 64, 1e12).is_err());
        assert!(ModelParams::with(1.0, 20.0, 2.0, 64, 1e12).is_err());
    }

    #[test]
    fn field_spec_validation() {
        assert!(FieldSpec::new(2.0, 1.0, 0.9, 0.8).is_ok());
        assert!(FieldSpec::new(-0.1, 1.0, 0.9, 0.8).is_err());
        assert!(FieldSpec::new(2.0, 1.0, 1.1, 0.8).is_err());
    }
}
