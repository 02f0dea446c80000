//! Command implementations: each builds its sweep from the run
//! configuration, evaluates the library models (sweep points fan out over
//! the worker pool, assembly stays index-ordered and deterministic), and
//! writes CSV or JSON files with reproducible metadata headers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use spinwave::{
    format_float, mean_retrieved, optimize_absorber, optimize_fidelity, retrieval_efficiency,
    retrieval_saturated_source, run_verification, scattering_probability, search,
    subtract_prob_coherent_source, two_excitation_slice, write_density_csv, write_density_json,
    write_json, EfficiencyCurve, Metadata, VerifyReport,
};

use crate::config::{linspace, Format, RunConfig};

fn base_metadata(cfg: &RunConfig, command: &str) -> Result<Metadata> {
    let mut meta = Metadata::new();
    meta.push("command", command)?;
    meta.push("seed", cfg.output.seed)?;
    Ok(meta)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok((path, file))
}

fn write_curve(cfg: &RunConfig, stem: &str, curve: &EfficiencyCurve) -> Result<PathBuf> {
    let format = cfg.output.format;
    let name = format!("{stem}.{}", format.extension());
    let (path, file) = create(&cfg.output.out, &name)?;
    let mut out = std::io::BufWriter::new(file);
    match format {
        Format::Csv => curve.write_csv(&mut out)?,
        Format::Json => curve.write_json(&mut out)?,
    }
    out.flush()?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Evolved two-excitation coherence slices, one file per spectator
/// position.
pub fn cmd_slice(cfg: &RunConfig) -> Result<()> {
    let params = cfg.model_params()?;
    let mode = cfg.slice.mode.build(&params)?;
    let (shape, center, width) = cfg.slice.mode.describe(&params);
    ensure!(!cfg.slice.r.is_empty(), "slice needs at least one r value");
    for &r in &cfg.slice.r {
        let grid = two_excitation_slice(r, cfg.slice.n_s, &mode, &params)?;
        let mut meta = base_metadata(cfg, "slice")?;
        meta.push_float("r", r)?;
        meta.push("mode_shape", &shape)?;
        meta.push_float("mode_center", center)?;
        meta.push_float("mode_width", width)?;
        meta.push("normalization", "conditional-unit-trace")?;
        let name = format!(
            "slice_r{}.{}",
            format_float(r),
            cfg.output.format.extension()
        );
        let (path, file) = create(&cfg.output.out, &name)?;
        let mut out = std::io::BufWriter::new(file);
        match cfg.output.format {
            Format::Csv => write_density_csv(&mut out, &grid, &meta)?,
            Format::Json => write_density_json(&mut out, &grid, &meta)?,
        }
        out.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Normalized retrieval efficiency against the mean scattered photon
/// number, one file per gate intensity, with the no-protection baseline.
pub fn cmd_retrieval(cfg: &RunConfig) -> Result<()> {
    let (p, p_source) = cfg.scattering(cfg.retrieval.p)?;
    ensure!(
        !cfg.retrieval.alpha_g.is_empty(),
        "retrieval needs at least one alpha_g"
    );
    let axis = linspace(0.0, cfg.retrieval.abar_s_max, cfg.retrieval.points)?;
    for &alpha_g in &cfg.retrieval.alpha_g {
        ensure!(alpha_g > 0.0, "alpha_g = {alpha_g} must be positive");
        // mean scattered photons per source photon sent
        let lift = 1.0 - (-alpha_g * p).exp();
        ensure!(
            lift > 0.0,
            "alpha_g*p = 0: nothing scatters, the measured axis is degenerate"
        );
        let columns: Vec<(f64, f64)> = axis
            .par_iter()
            .map(|&abar_s| {
                let alpha_s = abar_s / lift;
                let eff = retrieval_efficiency(alpha_g, alpha_s, p, 1.0)?;
                Ok((eff, (-abar_s / alpha_g).exp()))
            })
            .collect::<spinwave::Result<_>>()?;
        let mut meta = base_metadata(cfg, "retrieval")?;
        meta.push_float("alpha_g", alpha_g)?;
        meta.push_float("p", p)?;
        meta.push("p_source", p_source)?;
        meta.push_float("eta_r", cfg.field_spec()?.eta_r)?;
        meta.push("normalization", "per-eta_r")?;
        meta.push("baseline", "no-protection-exponential")?;
        let mut curve = EfficiencyCurve::new("abar_s", axis.clone(), meta)?;
        curve.push_series("efficiency", columns.iter().map(|c| c.0).collect())?;
        curve.push_series("baseline", columns.iter().map(|c| c.1).collect())?;
        write_curve(cfg, &format!("retrieval_ag{}", format_float(alpha_g)), &curve)?;
    }
    Ok(())
}

/// Mean retrieved gate photons against gate intensity, one column per
/// source intensity, plus the saturated closed-form column.
pub fn cmd_subtract(cfg: &RunConfig) -> Result<()> {
    let (p, p_source) = cfg.scattering(cfg.subtract.p)?;
    ensure!(
        !cfg.subtract.alpha_s.is_empty(),
        "subtract needs at least one alpha_s"
    );
    let eta_r = cfg.field_spec()?.eta_r;
    let axis = linspace(0.0, cfg.subtract.alpha_g_max, cfg.subtract.points)?;
    let mut meta = base_metadata(cfg, "subtract")?;
    meta.push_float("p", p)?;
    meta.push("p_source", p_source)?;
    meta.push_float("eta_r", eta_r)?;
    meta.push("saturated_column", "p=1,deep-source-limit")?;
    let mut curve = EfficiencyCurve::new("alpha_g", axis.clone(), meta)?;
    for &alpha_s in &cfg.subtract.alpha_s {
        let values: Vec<f64> = axis
            .par_iter()
            .map(|&alpha_g| mean_retrieved(alpha_g, alpha_s, p, eta_r))
            .collect::<spinwave::Result<_>>()?;
        curve.push_series(&format!("alpha_s_{}", format_float(alpha_s)), values)?;
    }
    let saturated: Vec<f64> = axis
        .iter()
        .map(|&alpha_g| Ok(alpha_g * retrieval_saturated_source(alpha_g, eta_r)?))
        .collect::<spinwave::Result<_>>()?;
    curve.push_series("saturated", saturated)?;
    write_curve(cfg, "subtract", &curve)?;
    Ok(())
}

/// Optimized subtraction fidelity of both mechanisms against medium
/// depth, plus the storage/retrieval-efficiency surfaces.
pub fn cmd_fidelity(cfg: &RunConfig) -> Result<()> {
    let f = &cfg.fidelity;
    let fields = cfg.field_spec()?;
    let alpha_g = fields.alpha_g;
    let (eta_s, eta_r) = (fields.eta_s, fields.eta_r);
    let bounds = (f.alpha_s_min, f.alpha_s_max);
    let axis = linspace(f.d_b_min, f.d_b_max, f.points)?;

    struct Point {
        decoherence: f64,
        absorber: f64,
        alpha_s_opt: f64,
        detuning_opt: f64,
        eit_ratio_opt: f64,
    }
    let points: Vec<Point> = axis
        .par_iter()
        .map(|&d_b| {
            let p = scattering_probability(d_b);
            let dec = optimize_fidelity(alpha_g, eta_s, eta_r, p, bounds)?;
            let abs = optimize_absorber(alpha_g, d_b, f.ratio_min)?;
            Ok(Point {
                decoherence: dec.fidelity,
                absorber: abs.fidelity,
                alpha_s_opt: dec.alpha_s_opt,
                detuning_opt: abs.delta_opt,
                eit_ratio_opt: abs.eit_ratio_opt,
            })
        })
        .collect::<spinwave::Result<_>>()?;

    let mut meta = base_metadata(cfg, "fidelity")?;
    meta.push_float("alpha_g", alpha_g)?;
    meta.push_float("eta_s", eta_s)?;
    meta.push_float("eta_r", eta_r)?;
    meta.push_float("ratio_min", f.ratio_min)?;
    meta.push_float("alpha_s_min", bounds.0)?;
    meta.push_float("alpha_s_max", bounds.1)?;
    meta.push("optimizer", "log-grid-scan+golden-section")?;
    let mut curve = EfficiencyCurve::new("d_b", axis, meta)?;
    curve.push_series("decoherence", points.iter().map(|c| c.decoherence).collect())?;
    curve.push_series("absorber", points.iter().map(|c| c.absorber).collect())?;
    curve.push_series("alpha_s_opt", points.iter().map(|c| c.alpha_s_opt).collect())?;
    curve.push_series("detuning_opt", points.iter().map(|c| c.detuning_opt).collect())?;
    curve.push_series(
        "eit_ratio_opt",
        points.iter().map(|c| c.eit_ratio_opt).collect(),
    )?;
    write_curve(cfg, "fidelity_vs_db", &curve)?;

    for &d_b in &f.surface_d_b {
        let p = scattering_probability(d_b);
        let eta_axis = linspace(0.0, 1.0, f.surface_points)?;
        // rows: eta_s axis; one column per eta_r; cell: best single-photon
        // subtraction probability for two stored excitations
        let grid: Vec<Vec<f64>> = eta_axis
            .par_iter()
            .map(|&es| {
                eta_axis
                    .iter()
                    .map(|&er| {
                        let best = search::maximize_log_scalar(
                            |alpha_s| subtract_prob_coherent_source(2, alpha_s, es, er, p),
                            bounds.0,
                            bounds.1,
                            33,
                            1e-10,
                        )?;
                        Ok(best.value)
                    })
                    .collect::<spinwave::Result<Vec<f64>>>()
            })
            .collect::<spinwave::Result<_>>()?;
        let mut meta = base_metadata(cfg, "fidelity")?;
        meta.push_float("d_b", d_b)?;
        meta.push_float("p", p)?;
        meta.push("quantity", "max-single-subtraction-probability-two-excitations")?;
        meta.push_float("alpha_s_min", bounds.0)?;
        meta.push_float("alpha_s_max", bounds.1)?;
        let mut curve = EfficiencyCurve::new("eta_s", eta_axis.clone(), meta)?;
        for (j, &er) in eta_axis.iter().enumerate() {
            curve.push_series(
                &format!("eta_r_{}", format_float(er)),
                grid.iter().map(|row| row[j]).collect(),
            )?;
        }
        write_curve(cfg, &format!("fidelity_surface_db{}", format_float(d_b)), &curve)?;
    }
    Ok(())
}

/// Oracle cross-check matrix; returns the report so the caller can set
/// the exit code. The report always lands as JSON.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let report = run_verification(cfg.output.seed, cfg.verify.tolerance_scale)?;
    let (path, file) = create(&cfg.output.out, "verify.json")?;
    let mut out = std::io::BufWriter::new(file);
    write_json(&mut out, &report)?;
    out.flush()?;
    for check in &report.checks {
        println!(
            "{} {} observed {} allowed {}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            format_float(check.observed),
            format_float(check.allowed),
        );
    }
    println!(
        "{}: {}/{} checks passed, report at {}",
        if report.passed { "ok" } else { "FAILED" },
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        path.display(),
    );
    Ok(report)
}
