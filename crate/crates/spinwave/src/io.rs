//! Output serialization: CSV sweeps with reproducible `#` metadata
//! headers, and JSON views of coherence grids and reports. Every file
//! records the inputs needed to regenerate it (parameters, seed, version,
//! design flags) and never anything volatile (timestamps, hosts, thread
//! counts), so identical runs produce identical bytes.

use std::fmt::Display;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::density::DensityMatrixGrid;
use crate::error::{Error, Result};

/// Canonical float rendering for all text outputs. Rust's exponential
/// formatting is shortest-round-trip, so parsing the field back recovers
/// the exact bits.
pub fn format_float(x: f64) -> String {
    format!("{x:e}")
}

/// Ordered `key=value` provenance entries written as `#` header lines.
/// Construction seeds the library version; keys stay unique per file by
/// caller discipline (duplicates are written as-is).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self {
            entries: vec![("version".into(), env!("CARGO_PKG_VERSION").into())],
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> Result<()> {
        if key.is_empty() || key.contains(['=', '\n', '#']) || key.contains(char::is_whitespace) {
            return Err(Error::InvalidParams(format!(
                "metadata key {key:?} must be a bare word without '='"
            )));
        }
        let value = value.to_string();
        if value.contains('\n') {
            return Err(Error::InvalidParams(format!(
                "metadata value for {key:?} must be a single line"
            )));
        }
        self.entries.push((key.into(), value));
        Ok(())
    }

    pub fn push_float(&mut self, key: &str, x: f64) -> Result<()> {
        self.push(key, format_float(x))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn write_header<W: Write>(&self, w: &mut W) -> Result<()> {
        for (key, value) in &self.entries {
            writeln!(w, "# {key}={value}")?;
        }
        Ok(())
    }

    fn json_map(&self) -> Map<String, Value> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect()
    }
}

impl Default for Metadata {
    fn default() -> Self {
        Self::new()
    }
}

/// One sweep result: a named axis, one or more named series over it, and
/// the metadata that reproduces the run.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    axis_label: String,
    axis: Vec<f64>,
    series: Vec<(String, Vec<f64>)>,
    metadata: Metadata,
}

impl EfficiencyCurve {
    pub fn new(axis_label: &str, axis: Vec<f64>, metadata: Metadata) -> Result<Self> {
        check_column_label(axis_label)?;
        if axis.is_empty() {
            return Err(Error::DegenerateInput("sweep axis is empty".into()));
        }
        if axis.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(
                "sweep axis values must be finite".into(),
            ));
        }
        Ok(Self {
            axis_label: axis_label.into(),
            axis,
            series: Vec::new(),
            metadata,
        })
    }

    /// Appends one column; its length must match the axis.
    pub fn push_series(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        check_column_label(name)?;
        if values.len() != self.axis.len() {
            return Err(Error::GridMismatch(format!(
                "series {name:?} has {} points, axis has {}",
                values.len(),
                self.axis.len()
            )));
        }
        self.series.push((name.into(), values));
        Ok(())
    }

    pub fn axis_label(&self) -> &str {
        &self.axis_label
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn series(&self) -> &[(String, Vec<f64>)] {
        &self.series
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    /// `#` metadata lines, a header row, then one row per axis point with
    /// the axis in the first column and one column per series.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::DegenerateInput(
                "curve has no series to write".into(),
            ));
        }
        self.metadata.write_header(w)?;
        write!(w, "{}", self.axis_label)?;
        for (name, _) in &self.series {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for (i, x) in self.axis.iter().enumerate() {
            write!(w, "{}", format_float(*x))?;
            for (_, values) in &self.series {
                write!(w, ",{}", format_float(values[i]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "metadata": self.metadata.json_map(),
            "axis_label": self.axis_label,
            "axis": self.axis,
            "series": self.series.iter().map(|(name, values)| {
                json!({ "name": name, "values": values })
            }).collect::<Vec<_>>(),
        })
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        write_json(w, &self.to_json())
    }
}

fn check_column_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains([',', '\n', '#']) {
        return Err(Error::InvalidParams(format!(
            "column label {label:?} must be non-empty without commas"
        )));
    }
    Ok(())
}

fn grid_facts(grid: &DensityMatrixGrid, metadata: &Metadata) -> Result<Metadata> {
    let mut all = metadata.clone();
    let meta = grid.meta();
    all.push_float("d_b", meta.d_b)?;
    all.push_float("length", meta.length)?;
    all.push_float("quad_rel_tol", meta.quad_rel_tol)?;
    all.push("grid_points", meta.grid_points)?;
    all.push_float("v_cap", meta.v_cap)?;
    all.push("n_s", grid.n_s())?;
    Ok(all)
}

/// Coherence grid as CSV: metadata lines (caller entries plus the grid's
/// own parameters), an axis header row, then one row per coordinate with
/// each complex entry as a `re,im` pair.
pub fn write_density_csv<W: Write>(
    w: &mut W,
    grid: &DensityMatrixGrid,
    metadata: &Metadata,
) -> Result<()> {
    grid_facts(grid, metadata)?.write_header(w)?;
    write!(w, "z")?;
    for x in grid.axis() {
        let x = format_float(*x);
        write!(w, ",re@{x},im@{x}")?;
    }
    writeln!(w)?;
    for (i, x) in grid.axis().iter().enumerate() {
        write!(w, "{}", format_float(*x))?;
        for j in 0..grid.axis().len() {
            let v = grid.values()[[i, j]];
            write!(w, ",{},{}", format_float(v.re), format_float(v.im))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Coherence grid as JSON with real and imaginary parts as separate
/// row-major matrices.
pub fn density_to_json(grid: &DensityMatrixGrid, metadata: &Metadata) -> Result<Value> {
    let n = grid.axis().len();
    let part = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| f(&grid.values()[[i, j]])).collect())
            .collect()
    };
    Ok(json!({
        "metadata": grid_facts(grid, metadata)?.json_map(),
        "axis": grid.axis(),
        "n_s": grid.n_s(),
        "re": part(|v| v.re),
        "im": part(|v| v.im),
    }))
}

pub fn write_density_json<W: Write>(
    w: &mut W,
    grid: &DensityMatrixGrid,
    metadata: &Metadata,
) -> Result<()> {
    write_json(w, &density_to_json(grid, metadata)?)
}

/// Pretty-printed JSON plus a trailing newline, for reports and grids.
pub fn write_json<W: Write, T: Serialize + ?Sized>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}
