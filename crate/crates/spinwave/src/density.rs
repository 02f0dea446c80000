//! Gridded density-matrix picture of stored excitations under source
//! scattering: spatial modes, elementwise kernel evolution, the fixed
//! spectator two-excitation slice, and the reduced single-excitation
//! matrices behind sequential retrieval.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::phi;
use crate::model::{GateConfig, ModelParams};

/// Hermiticity defect allowed in a stored density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Most negative diagonal entry allowed in a stored density matrix.
pub const DIAGONAL_FLOOR: f64 = -1e-12;

/// Half-width of the sampled Gaussian support, in mode widths.
pub const SUPPORT_SIGMAS: f64 = 4.0;

/// Spatial amplitude of a stored excitation. Sampling always renormalizes
/// so that the summed probability on the grid is exactly one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpinWaveMode {
    /// `exp(-(z - center)^2 / (2 width^2))`, sampled over
    /// [`SUPPORT_SIGMAS`] widths on each side.
    Gaussian { center: f64, width: f64 },
    /// Uniform amplitude on `[center - width/2, center + width/2]`.
    Flat { center: f64, width: f64 },
    /// Amplitudes sampled on an explicit uniform grid.
    Table {
        axis: Vec<f64>,
        amplitudes: Vec<f64>,
    },
}

impl SpinWaveMode {
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        check_mode_shape(center, width)?;
        Ok(Self::Gaussian { center, width })
    }

    pub fn flat(center: f64, width: f64) -> Result<Self> {
        check_mode_shape(center, width)?;
        Ok(Self::Flat { center, width })
    }

    pub fn table(axis: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        check_axis(&axis)?;
        check_uniform(&axis)?;
        if axis.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: axis.len(),
                right: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParams(
                "mode amplitudes must be finite".into(),
            ));
        }
        if amplitudes.iter().all(|a| *a == 0.0) {
            return Err(Error::DegenerateInput(
                "mode amplitudes are all zero".into(),
            ));
        }
        Ok(Self::Table { axis, amplitudes })
    }

    /// Interval outside which the amplitude is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { center, width } => (
                center - SUPPORT_SIGMAS * width,
                center + SUPPORT_SIGMAS * width,
            ),
            Self::Flat { center, width } => (center - width / 2.0, center + width / 2.0),
            Self::Table { axis, .. } => (axis[0], axis[axis.len() - 1]),
        }
    }

    /// Amplitudes on `axis`, normalized to unit summed probability. A
    /// table mode only knows its own grid and rejects any other.
    pub fn sample(&self, axis: &[f64]) -> Result<Vec<f64>> {
        check_axis(axis)?;
        check_uniform(axis)?;
        let mut c: Vec<f64> = match self {
            Self::Gaussian { center, width } => axis
                .iter()
                .map(|z| (-(z - center).powi(2) / (2.0 * width * width)).exp())
                .collect(),
            Self::Flat { center, width } => axis
                .iter()
                .map(|z| f64::from((z - center).abs() <= width / 2.0))
                .collect(),
            Self::Table {
                axis: own,
                amplitudes,
            } => {
                same_axis(own, axis)?;
                amplitudes.clone()
            }
        };
        let dz = axis[1] - axis[0];
        let norm_sq: f64 = c.iter().map(|a| a * a).sum::<f64>() * dz;
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateInput(
                "mode has no support on the sampling grid".into(),
            ));
        }
        let scale = norm_sq.sqrt().recip();
        for a in &mut c {
            *a *= scale;
        }
        Ok(c)
    }
}

/// Default stored mode for slice data products: Gaussian at mid-medium,
/// three blockade radii wide. A smooth, boundary-safe choice; callers
/// record it in output metadata.
pub fn default_slice_mode(params: &ModelParams) -> SpinWaveMode {
    SpinWaveMode::Gaussian {
        center: params.length / 2.0,
        width: 3.0,
    }
}

/// Uniform sampling grid covering the mode support clipped to the medium,
/// at the density requested by `params.grid_points`.
pub fn mode_grid(mode: &SpinWaveMode, params: &ModelParams) -> Result<Vec<f64>> {
    if let SpinWaveMode::Table { axis, .. } = mode {
        for &z in axis {
            if !(0.0..=params.length).contains(&z) {
                return Err(Error::OutOfDomain {
                    value: z,
                    length: params.length,
                });
            }
        }
        return Ok(axis.clone());
    }
    let (lo, hi) = mode.support();
    let lo = lo.max(0.0);
    let hi = hi.min(params.length);
    if hi <= lo {
        return Err(Error::DegenerateInput(format!(
            "mode support [{lo}, {hi}] lies outside the medium"
        )));
    }
    let intervals = ((hi - lo) * f64::from(params.grid_points)).ceil() as usize;
    let step = (hi - lo) / intervals as f64;
    let mut axis: Vec<f64> = (0..=intervals).map(|i| lo + step * i as f64).collect();
    axis[intervals] = hi;
    Ok(axis)
}

/// One-body (or sliced two-body) density matrix sampled on a uniform
/// coordinate grid, tagged with the number of source photons scattered.
#[derive(Debug, Clone)]
pub struct DensityMatrixGrid {
    axis: Vec<f64>,
    values: Array2<C64>,
    n_s: u64,
    meta: ModelParams,
}

impl DensityMatrixGrid {
    /// Wraps raw data, enforcing Hermiticity within [`HERMITICITY_TOL`]
    /// and diagonal entries real down to [`DIAGONAL_FLOOR`].
    pub fn new(axis: Vec<f64>, values: Array2<C64>, n_s: u64, meta: ModelParams) -> Result<Self> {
        check_axis(&axis)?;
        check_uniform(&axis)?;
        if values.nrows() != axis.len() || values.ncols() != axis.len() {
            return Err(Error::GridMismatch(format!(
                "{}x{} matrix on a {}-point axis",
                values.nrows(),
                values.ncols(),
                axis.len()
            )));
        }
        let grid = Self {
            axis,
            values,
            n_s,
            meta,
        };
        grid.check_invariants()?;
        Ok(grid)
    }

    /// Pure product state of one excitation in `mode`, before any
    /// scattering.
    pub fn pure_state(mode: &SpinWaveMode, params: &ModelParams) -> Result<Self> {
        let axis = mode_grid(mode, params)?;
        let c = mode.sample(&axis)?;
        let n = axis.len();
        let values = Array2::from_shape_fn((n, n), |(i, j)| C64::new(c[i] * c[j], 0.0));
        Self::new(axis, values, 0, params.clone())
    }

    fn check_invariants(&self) -> Result<()> {
        let n = self.axis.len();
        for i in 0..n {
            let d = self.values[[i, i]];
            if d.im.abs() > HERMITICITY_TOL || d.re < DIAGONAL_FLOOR {
                return Err(Error::DegenerateInput(format!(
                    "diagonal entry {i} is {d}, not real non-negative"
                )));
            }
            for j in (i + 1)..n {
                let defect = (self.values[[i, j]] - self.values[[j, i]].conj()).norm();
                if defect > HERMITICITY_TOL {
                    return Err(Error::DegenerateInput(format!(
                        "Hermiticity defect {defect:e} at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    pub fn n_s(&self) -> u64 {
        self.n_s
    }

    pub fn meta(&self) -> &ModelParams {
        &self.meta
    }

    pub fn spacing(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    /// Summed diagonal probability on the grid.
    pub fn trace(&self) -> f64 {
        let n = self.axis.len();
        (0..n).map(|i| self.values[[i, i]].re).sum::<f64>() * self.spacing()
    }

    /// Trace of the squared matrix; 1 for a pure state, smaller once
    /// coherences decay.
    pub fn purity(&self) -> f64 {
        let dz = self.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dz * dz
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        let n = self.axis.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.values[[i, j]] - self.values[[j, i]].conj()).norm());
            }
        }
        worst
    }
}

/// Which pair kernel backs a reduced density evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhiSource {
    /// Full kernel by adaptive quadrature.
    Quadrature,
    /// Complete-localisation limit: the off-diagonal deviation is `-p`
    /// regardless of separation.
    Piecewise,
}

/// Per-photon evolution factors on a square grid; entry `(i, j)`
/// multiplies `rho(axis[i], axis[j])` once per scattered photon.
#[derive(Debug, Clone)]
pub struct PhiTable {
    axis: Vec<f64>,
    values: Array2<C64>,
    /// Worst propagated quadrature error estimate across entries.
    pub max_quadrature_error: f64,
}

impl PhiTable {
    /// Two-excitation factors with one shared spectator: entry `(i, j)`
    /// holds the kernel for configurations `(axis[i], r)` vs `(axis[j], r)`.
    pub fn pair_with_spectator(r: f64, axis: &[f64], params: &ModelParams) -> Result<Self> {
        check_axis(axis)?;
        let fill = |x: f64, y: f64| {
            let v = phi(&pair_config(x, r), &pair_config(y, r), params)?;
            Ok((v.value, v.quadrature_estimate_error))
        };
        let (values, max_err) = hermitian_fill(axis, fill)?;
        Ok(Self {
            axis: axis.to_vec(),
            values,
            max_quadrature_error: max_err,
        })
    }

    /// Reduced single-excitation factors for the `k`-th of `n_g` stored
    /// excitations: `1 + (1-p)^(k-1) (phi1(x, y) - 1)`, with the pair
    /// kernel `phi1` either integrated or replaced by its localisation
    /// limit.
    pub fn reduced(
        k: usize,
        p: f64,
        axis: &[f64],
        params: &ModelParams,
        source: PhiSource,
    ) -> Result<Self> {
        check_axis(axis)?;
        if k < 1 {
            return Err(Error::InvalidParams(
                "excitation index k starts at 1".into(),
            ));
        }
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParams(format!(
                "p must lie in [0, 1], got {p}"
            )));
        }
        let shade = (1.0 - p).powf((k - 1) as f64);
        let fill = |x: f64, y: f64| match source {
            PhiSource::Quadrature => {
                if shade == 0.0 {
                    return Ok((C64::new(1.0, 0.0), 0.0));
                }
                let v = phi(
                    &GateConfig::from_sorted_unchecked(vec![x]),
                    &GateConfig::from_sorted_unchecked(vec![y]),
                    params,
                )?;
                Ok((
                    C64::new(1.0, 0.0) + (v.value - 1.0) * shade,
                    shade * v.quadrature_estimate_error,
                ))
            }
            PhiSource::Piecewise => Ok((C64::new(1.0 - shade * p, 0.0), 0.0)),
        };
        let (values, max_err) = hermitian_fill(axis, fill)?;
        Ok(Self {
            axis: axis.to_vec(),
            values,
            max_quadrature_error: max_err,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }
}

/// Applies `n_s` passages of the scattering kernel elementwise:
/// `rho_out = table^(n_s) * rho0`, computed as `exp(n_s ln table)` so
/// deep suppression underflows to zero instead of looping.
pub fn evolve_density(
    rho0: &DensityMatrixGrid,
    n_s: u64,
    phi_table: &PhiTable,
) -> Result<DensityMatrixGrid> {
    same_axis(&rho0.axis, &phi_table.axis)?;
    if n_s == 0 {
        return Ok(rho0.clone());
    }
    let n = rho0.axis.len();
    let m = n_s as f64;
    let mut values = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    for i in 0..n {
        values[[i, i]] = pow_photons(phi_table.values[[i, i]], m) * rho0.values[[i, i]];
        for j in (i + 1)..n {
            let w = pow_photons(phi_table.values[[i, j]], m) * rho0.values[[i, j]];
            values[[i, j]] = w;
            // mirrored rather than recomputed so Hermiticity stays exact
            values[[j, i]] = w.conj();
        }
    }
    DensityMatrixGrid::new(rho0.axis.clone(), values, rho0.n_s + n_s, rho0.meta.clone())
}

/// Slice of the evolved two-excitation density matrix with one coordinate
/// pinned to a spectator at `r` on both sides, both excitations stored in
/// `mode`. Normalized as the conditional matrix of the free excitation,
/// so its trace is one regardless of the mode weight at `r`.
pub fn two_excitation_slice(
    r: f64,
    n_s: u64,
    mode: &SpinWaveMode,
    params: &ModelParams,
) -> Result<DensityMatrixGrid> {
    if !(0.0..=params.length).contains(&r) {
        return Err(Error::OutOfDomain {
            value: r,
            length: params.length,
        });
    }
    let rho0 = DensityMatrixGrid::pure_state(mode, params)?;
    let table = PhiTable::pair_with_spectator(r, &rho0.axis, params)?;
    evolve_density(&rho0, n_s, &table)
}

/// Reduced density matrix of the `k`-th of `n_g` stored excitations after
/// `n_s` scattered photons, with per-excitation scattering probability
/// `p` and the `k`-th mode `mode_k`.
pub fn reduced_density(
    k: usize,
    n_g: usize,
    n_s: u64,
    p: f64,
    mode_k: &SpinWaveMode,
    params: &ModelParams,
    source: PhiSource,
) -> Result<DensityMatrixGrid> {
    if k < 1 || k > n_g {
        return Err(Error::IndexOutOfRange { k, n_g });
    }
    let rho0 = DensityMatrixGrid::pure_state(mode_k, params)?;
    let table = PhiTable::reduced(k, p, &rho0.axis, params, source)?;
    evolve_density(&rho0, n_s, &table)
}

/// `w^m` through the principal logarithm; exact on the unit diagonal.
fn pow_photons(w: C64, m: f64) -> C64 {
    if w == C64::new(1.0, 0.0) {
        return w;
    }
    if w.norm_sqr() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    (w.ln() * m).exp()
}

fn pair_config(free: f64, spectator: f64) -> GateConfig {
    let positions = if free <= spectator {
        vec![free, spectator]
    } else {
        vec![spectator, free]
    };
    GateConfig::from_sorted_unchecked(positions)
}

/// Fills the strict upper triangle in parallel, mirrors it by conjugation,
/// and pins the diagonal at exactly one.
fn hermitian_fill<F>(axis: &[f64], fill: F) -> Result<(Array2<C64>, f64)>
where
    F: Fn(f64, f64) -> Result<(C64, f64)> + Sync,
{
    let n = axis.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let entries: Vec<((usize, usize), (C64, f64))> = pairs
        .par_iter()
        .map(|&(i, j)| Ok(((i, j), fill(axis[i], axis[j])?)))
        .collect::<Result<_>>()?;
    let mut values = Array2::from_elem((n, n), C64::new(1.0, 0.0));
    let mut max_err = 0.0f64;
    for ((i, j), (v, err)) in entries {
        values[[i, j]] = v;
        values[[j, i]] = v.conj();
        max_err = max_err.max(err);
    }
    Ok((values, max_err))
}

fn check_mode_shape(center: f64, width: f64) -> Result<()> {
    if !center.is_finite() || !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidParams(format!(
            "mode needs finite center and positive width, got ({center}, {width})"
        )));
    }
    Ok(())
}

fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidParams(
            "grid needs at least two points".into(),
        ));
    }
    if axis.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidParams("grid points must be finite".into()));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_uniform(axis: &[f64]) -> Result<()> {
    let step = axis[1] - axis[0];
    let tol = 1e-9 * (axis[axis.len() - 1] - axis[0]);
    if axis.windows(2).any(|w| (w[1] - w[0] - step).abs() > tol) {
        return Err(Error::GridMismatch("grid spacing is not uniform".into()));
    }
    Ok(())
}

fn same_axis(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "{} vs {} grid points",
            a.len(),
            b.len()
        )));
    }
    let span = (a[a.len() - 1] - a[0]).max(1.0);
    for (&x, &y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 * span {
            return Err(Error::GridMismatch(format!(
                "grids differ at coordinate {x} vs {y}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scattering_probability;

    fn params(d_b: f64) -> ModelParams {
        ModelParams::new(d_b).unwrap()
    }

    fn narrow_mode() -> SpinWaveMode {
        SpinWaveMode::gaussian(10.0, 0.5).unwrap()
    }

    #[test]
    fn sampling_normalizes_every_mode_kind() {
        let p = params(1.0);
        let table_mode = SpinWaveMode::table(
            vec![9.0, 9.5, 10.0, 10.5, 11.0],
            vec![1.0, 2.0, 3.0, 2.0, 1.0],
        )
        .unwrap();
        for mode in [
            narrow_mode(),
            SpinWaveMode::flat(10.0, 4.0).unwrap(),
            table_mode,
        ] {
            let axis = mode_grid(&mode, &p).unwrap();
            let c = mode.sample(&axis).unwrap();
            let dz = axis[1] - axis[0];
            let norm: f64 = c.iter().map(|a| a * a).sum::<f64>() * dz;
            assert!((norm - 1.0).abs() < 1e-12, "{mode:?}: norm {norm}");
        }
    }

    #[test]
    fn grid_covers_clipped_support_at_requested_density() {
        let p = params(1.0);
        let wide = SpinWaveMode::gaussian(10.0, 3.0).unwrap();
        let axis = mode_grid(&wide, &p).unwrap();
        assert_eq!(axis[0], 0.0);
        assert_eq!(axis[axis.len() - 1], p.length);
        let dz = axis[1] - axis[0];
        assert!(dz <= 1.0 / f64::from(p.grid_points) + 1e-12);
        check_uniform(&axis).unwrap();
    }

    #[test]
    fn table_mode_rejects_foreign_grids_and_escaping_points() {
        let p = params(1.0);
        let mode = SpinWaveMode::table(vec![9.0, 10.0, 11.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert!(mode.sample(&[9.0, 10.5, 12.0]).is_err());
        let outside = SpinWaveMode::table(vec![19.0, 20.0, 21.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            mode_grid(&outside, &p),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(SpinWaveMode::table(vec![9.0, 10.0], vec![0.0, 0.0]).is_err());
        assert!(SpinWaveMode::table(vec![9.0, 10.0, 9.5], vec![1.0; 3]).is_err());
        assert!(SpinWaveMode::gaussian(10.0, 0.0).is_err());
    }

    #[test]
    fn pure_state_is_unit_trace_unit_purity() {
        let rho = DensityMatrixGrid::pure_state(&narrow_mode(), &params(1.0)).unwrap();
        assert_eq!(rho.n_s(), 0);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert_eq!(rho.max_hermiticity_defect(), 0.0);
    }

    #[test]
    fn construction_rejects_broken_invariants() {
        let p = params(1.0);
        let axis = vec![9.0, 10.0, 11.0];
        let mut values = Array2::from_elem((3, 3), C64::new(0.1, 0.0));
        values[[0, 1]] = C64::new(0.5, 0.0);
        assert!(DensityMatrixGrid::new(axis.clone(), values, 0, p.clone()).is_err());
        let mut negative = Array2::from_elem((3, 3), C64::new(0.1, 0.0));
        negative[[1, 1]] = C64::new(-1e-6, 0.0);
        assert!(DensityMatrixGrid::new(axis.clone(), negative, 0, p.clone()).is_err());
        let wrong = Array2::from_elem((2, 2), C64::new(0.1, 0.0));
        assert!(matches!(
            DensityMatrixGrid::new(axis, wrong, 0, p),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn zero_photons_is_the_identity_map() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let table = PhiTable::reduced(1, 0.7, rho0.axis(), &p, PhiSource::Piecewise).unwrap();
        let rho = evolve_density(&rho0, 0, &table).unwrap();
        assert_eq!(rho.values(), rho0.values());
        assert_eq!(rho.n_s(), 0);
    }

    #[test]
    fn diagonal_and_trace_survive_evolution() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let table = PhiTable::reduced(1, 0.4, rho0.axis(), &p, PhiSource::Piecewise).unwrap();
        let rho = evolve_density(&rho0, 7, &table).unwrap();
        assert_eq!(rho.n_s(), 7);
        for i in 0..rho0.axis().len() {
            assert_eq!(rho.values()[[i, i]], rho0.values()[[i, i]]);
        }
        assert_eq!(rho.trace(), rho0.trace());
    }

    #[test]
    fn purity_never_grows_with_photon_count() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let table = PhiTable::reduced(1, 0.3, rho0.axis(), &p, PhiSource::Piecewise).unwrap();
        let mut prev = rho0.purity();
        for n_s in [1u64, 2, 5, 20, 1000] {
            let purity = evolve_density(&rho0, n_s, &table).unwrap().purity();
            assert!(purity <= prev + 1e-15, "n_s {n_s}: {purity} > {prev}");
            prev = purity;
        }
    }

    #[test]
    fn deep_suppression_underflows_cleanly() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let table = PhiTable::reduced(1, 0.5, rho0.axis(), &p, PhiSource::Piecewise).unwrap();
        let rho = evolve_density(&rho0, 5_000_000, &table).unwrap();
        assert!(rho
            .values()
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite()));
        let off = rho.values()[[0, rho0.axis().len() - 1]];
        assert_eq!(off, C64::new(0.0, 0.0));
        assert_eq!(rho.trace(), rho0.trace());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let other = mode_grid(&SpinWaveMode::gaussian(10.0, 0.25).unwrap(), &p).unwrap();
        let table = PhiTable::reduced(1, 0.5, &other, &p, PhiSource::Piecewise).unwrap();
        assert!(matches!(
            evolve_density(&rho0, 1, &table),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn reduced_piecewise_damps_coherences_geometrically() {
        let p = params(1.0);
        let prob = 0.35;
        let n_s = 4u64;
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        let rho =
            reduced_density(1, 2, n_s, prob, &narrow_mode(), &p, PhiSource::Piecewise).unwrap();
        let factor = (1.0 - prob).powi(n_s as i32);
        let n = rho0.axis().len();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j {
                    rho0.values()[[i, j]]
                } else {
                    rho0.values()[[i, j]] * factor
                };
                assert!((rho.values()[[i, j]] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fully_scattered_leader_protects_the_follower_completely() {
        let p = params(1.0);
        let rho0 = DensityMatrixGrid::pure_state(&narrow_mode(), &p).unwrap();
        for source in [PhiSource::Piecewise, PhiSource::Quadrature] {
            let rho = reduced_density(2, 2, 9, 1.0, &narrow_mode(), &p, source).unwrap();
            let diff = rho
                .values()
                .iter()
                .zip(rho0.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(diff < 1e-15, "{source:?}: {diff:e}");
        }
    }

    #[test]
    fn quadrature_factor_matches_localisation_limit_when_separated() {
        // stays within ten percent for separations of a few radii
        let p = params(0.5);
        let prob = scattering_probability(0.5);
        let axis = [6.0, 9.5, 13.0];
        let quad = PhiTable::reduced(1, prob, &axis, &p, PhiSource::Quadrature).unwrap();
        let piece = PhiTable::reduced(1, prob, &axis, &p, PhiSource::Piecewise).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let q = quad.values()[[i, j]];
                let w = piece.values()[[i, j]];
                let rel = (q - w).norm() / w.norm();
                assert!(rel < 0.1, "({i}, {j}): {q} vs {w}, rel {rel}");
            }
        }
    }

    #[test]
    fn spectator_at_the_exit_acts_like_no_spectator() {
        let p = params(1.0);
        let mode = narrow_mode();
        let slice = two_excitation_slice(p.length, 3, &mode, &p).unwrap();
        let lone = reduced_density(1, 1, 3, 0.0, &mode, &p, PhiSource::Quadrature).unwrap();
        let diff = slice
            .values()
            .iter()
            .zip(lone.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-4, "worst entry difference {diff:e}");
    }

    #[test]
    fn slice_handles_a_spectator_on_a_grid_node() {
        let p = params(1.0);
        let slice = two_excitation_slice(10.0, 1, &narrow_mode(), &p).unwrap();
        assert!((slice.trace() - 1.0).abs() < 1e-12);
        assert!(slice
            .values()
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite()));
    }

    #[test]
    fn index_and_domain_errors() {
        let p = params(1.0);
        let mode = narrow_mode();
        assert!(matches!(
            reduced_density(0, 2, 1, 0.5, &mode, &p, PhiSource::Piecewise),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            reduced_density(3, 2, 1, 0.5, &mode, &p, PhiSource::Piecewise),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(reduced_density(1, 2, 1, 1.5, &mode, &p, PhiSource::Piecewise).is_err());
        assert!(matches!(
            two_excitation_slice(-1.0, 1, &mode, &p),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            two_excitation_slice(25.0, 1, &mode, &p),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
