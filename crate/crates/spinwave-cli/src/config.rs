//! Run configuration: a sectioned TOML file with strict unknown-key
//! rejection. Every key has a default, so an empty file (or none at all)
//! is a valid run; command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use spinwave::{scattering_probability, FieldSpec, ModelParams, SpinWaveMode};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub fields: FieldsSection,
    pub output: OutputSection,
    pub slice: SliceSection,
    pub retrieval: RetrievalSection,
    pub subtract: SubtractSection,
    pub fidelity: FidelitySection,
    pub verify: VerifySection,
}

impl RunConfig {
    /// Loads the file when given, otherwise the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        Ok(ModelParams::with(
            m.d_b,
            m.length,
            m.quad_rel_tol,
            m.grid_points,
            m.v_cap,
        )?)
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        let f = &self.fields;
        Ok(FieldSpec::new(f.alpha_g, f.alpha_s, f.eta_s, f.eta_r)?)
    }

    /// Scattering probability for the sweep commands: the configured value
    /// if present, otherwise derived from the medium depth. The returned
    /// tag goes into the output metadata.
    pub fn scattering(&self, configured: Option<f64>) -> Result<(f64, &'static str)> {
        match configured {
            Some(p) => {
                if !(0.0..=1.0).contains(&p) {
                    bail!("p = {p} must lie in [0, 1]");
                }
                Ok((p, "config"))
            }
            None => Ok((scattering_probability(self.model.d_b), "derived-from-d_b")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub d_b: f64,
    pub length: f64,
    pub quad_rel_tol: f64,
    pub grid_points: u32,
    pub v_cap: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            d_b: 2.0,
            length: spinwave::model::DEFAULT_LENGTH,
            quad_rel_tol: spinwave::model::DEFAULT_QUAD_REL_TOL,
            grid_points: spinwave::model::DEFAULT_GRID_POINTS,
            v_cap: spinwave::model::DEFAULT_V_CAP,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub alpha_g: f64,
    pub alpha_s: f64,
    pub eta_s: f64,
    pub eta_r: f64,
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self {
            alpha_g: 2.0,
            alpha_s: 1.0,
            eta_s: 1.0,
            eta_r: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; created if missing.
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    /// Worker threads; 0 keeps the library default (all cores).
    pub threads: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            format: Format::Csv,
            seed: 0,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SliceSection {
    /// Spectator positions, one output file each.
    pub r: Vec<f64>,
    /// Scattered source photons.
    pub n_s: u64,
    pub mode: ModeSection,
}

impl Default for SliceSection {
    fn default() -> Self {
        Self {
            r: vec![10.0],
            n_s: 5,
            mode: ModeSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeSection {
    pub shape: ModeShape,
    /// Defaults to the medium midpoint.
    pub center: Option<f64>,
    pub width: f64,
}

impl Default for ModeSection {
    fn default() -> Self {
        Self {
            shape: ModeShape::Gaussian,
            center: None,
            width: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeShape {
    Gaussian,
    Flat,
}

impl ModeSection {
    pub fn build(&self, params: &ModelParams) -> Result<SpinWaveMode> {
        let center = self.center.unwrap_or(params.length / 2.0);
        Ok(match self.shape {
            ModeShape::Gaussian => SpinWaveMode::gaussian(center, self.width)?,
            ModeShape::Flat => SpinWaveMode::flat(center, self.width)?,
        })
    }

    pub fn describe(&self, params: &ModelParams) -> (String, f64, f64) {
        let shape = match self.shape {
            ModeShape::Gaussian => "gaussian",
            ModeShape::Flat => "flat",
        };
        (
            shape.into(),
            self.center.unwrap_or(params.length / 2.0),
            self.width,
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrievalSection {
    /// One output file per gate intensity.
    pub alpha_g: Vec<f64>,
    /// Scattering probability; omitted = derived from `model.d_b`.
    pub p: Option<f64>,
    /// Upper end of the scattered-photon axis.
    pub abar_s_max: f64,
    pub points: usize,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            alpha_g: vec![0.05, 0.5, 1.0, 2.0],
            p: None,
            abar_s_max: 3.0,
            points: 61,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubtractSection {
    /// One column per source intensity.
    pub alpha_s: Vec<f64>,
    /// Scattering probability; omitted = derived from `model.d_b`.
    pub p: Option<f64>,
    pub alpha_g_max: f64,
    pub points: usize,
}

impl Default for SubtractSection {
    fn default() -> Self {
        Self {
            alpha_s: vec![0.5, 2.0, 10.0],
            p: None,
            alpha_g_max: 6.0,
            points: 61,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelitySection {
    pub d_b_min: f64,
    pub d_b_max: f64,
    pub points: usize,
    /// Physical lower bound on the absorber's EIT-bandwidth ratio.
    pub ratio_min: f64,
    /// Source-intensity optimization bounds shared by both mechanisms.
    pub alpha_s_min: f64,
    pub alpha_s_max: f64,
    /// Media depths for the storage/retrieval-efficiency surfaces.
    pub surface_d_b: Vec<f64>,
    /// Grid points per efficiency axis.
    pub surface_points: usize,
}

impl Default for FidelitySection {
    fn default() -> Self {
        let bounds = spinwave::DEFAULT_ALPHA_S_BOUNDS;
        Self {
            d_b_min: 0.25,
            d_b_max: 6.0,
            points: 24,
            ratio_min: spinwave::DEFAULT_RATIO_MIN,
            alpha_s_min: bounds.0,
            alpha_s_max: bounds.1,
            surface_d_b: vec![0.5, 1.0, 5.0],
            surface_points: 21,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub tolerance_scale: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
        }
    }
}

/// Uniform sweep axis used by every command; endpoints are hit exactly.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        bail!("sweep needs at least 2 points, got {points}");
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("sweep bounds [{lo}, {hi}] must be finite and increasing");
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut axis: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    axis[points - 1] = hi;
    Ok(axis)
}
