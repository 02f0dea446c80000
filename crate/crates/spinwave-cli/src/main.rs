//! Binary entry point: argument parsing, configuration overrides, and
//! worker-pool setup around the library's subcommands.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spinwave_cli::commands;
use spinwave_cli::config::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "spinwave", version, about = "Spin-wave decoherence, retrieval, and photon-subtraction sweeps")]
struct Cli {
    /// TOML run configuration; omitted keys fall back to defaults
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output file format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed for every stochastic oracle
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolved two-excitation coherence slices, one file per spectator
    /// position
    Slice {
        /// Spectator positions, comma separated
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<f64>>,
        /// Scattered source photons
        #[arg(long)]
        n_s: Option<u64>,
        /// Optical depth per blockade radius
        #[arg(long)]
        d_b: Option<f64>,
    },
    /// Retrieval efficiency vs mean scattered photons, one file per gate
    /// intensity, with the no-protection baseline
    Retrieval {
        /// Gate intensities, comma separated
        #[arg(long, value_delimiter = ',')]
        alpha_g: Option<Vec<f64>>,
        /// Scattering probability (default: derived from d_b)
        #[arg(long)]
        p: Option<f64>,
        /// Upper end of the scattered-photon axis
        #[arg(long)]
        abar_s_max: Option<f64>,
        /// Axis resolution
        #[arg(long)]
        points: Option<usize>,
    },
    /// Mean retrieved gate photons vs gate intensity, one column per
    /// source intensity, plus the saturated closed form
    Subtract {
        /// Source intensities, comma separated
        #[arg(long, value_delimiter = ',')]
        alpha_s: Option<Vec<f64>>,
        /// Scattering probability (default: derived from d_b)
        #[arg(long)]
        p: Option<f64>,
        /// Upper end of the gate-intensity axis
        #[arg(long)]
        alpha_g_max: Option<f64>,
        /// Axis resolution
        #[arg(long)]
        points: Option<usize>,
    },
    /// Optimized subtraction fidelity of both mechanisms vs medium depth,
    /// plus storage/retrieval-efficiency surfaces
    Fidelity {
        /// Mean gate photon number
        #[arg(long)]
        alpha_g: Option<f64>,
        /// Lower bound on the EIT-bandwidth ratio
        #[arg(long)]
        ratio_min: Option<f64>,
        /// Lower end of the depth axis
        #[arg(long)]
        d_b_min: Option<f64>,
        /// Upper end of the depth axis
        #[arg(long)]
        d_b_max: Option<f64>,
        /// Depth-axis resolution
        #[arg(long)]
        points: Option<usize>,
        /// Efficiency-surface resolution per axis
        #[arg(long)]
        surface_points: Option<usize>,
    },
    /// Oracle cross-check matrix; exits nonzero on any failed check
    Verify {
        /// Multiplier on every check tolerance
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        cfg.output.out = out;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(seed) = cli.seed {
        cfg.output.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.output.threads = threads;
    }
    if cfg.output.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.output.threads)
            .build_global()
            .context("configuring the worker pool")?;
    }

    match cli.command {
        Command::Slice { r, n_s, d_b } => {
            if let Some(r) = r {
                cfg.slice.r = r;
            }
            if let Some(n_s) = n_s {
                cfg.slice.n_s = n_s;
            }
            if let Some(d_b) = d_b {
                cfg.model.d_b = d_b;
            }
            commands::cmd_slice(&cfg)?;
        }
        Command::Retrieval {
            alpha_g,
            p,
            abar_s_max,
            points,
        } => {
            if let Some(alpha_g) = alpha_g {
                cfg.retrieval.alpha_g = alpha_g;
            }
            if p.is_some() {
                cfg.retrieval.p = p;
            }
            if let Some(abar_s_max) = abar_s_max {
                cfg.retrieval.abar_s_max = abar_s_max;
            }
            if let Some(points) = points {
                cfg.retrieval.points = points;
            }
            commands::cmd_retrieval(&cfg)?;
        }
        Command::Subtract {
            alpha_s,
            p,
            alpha_g_max,
            points,
        } => {
            if let Some(alpha_s) = alpha_s {
                cfg.subtract.alpha_s = alpha_s;
            }
            if p.is_some() {
                cfg.subtract.p = p;
            }
            if let Some(alpha_g_max) = alpha_g_max {
                cfg.subtract.alpha_g_max = alpha_g_max;
            }
            if let Some(points) = points {
                cfg.subtract.points = points;
            }
            commands::cmd_subtract(&cfg)?;
        }
        Command::Fidelity {
            alpha_g,
            ratio_min,
            d_b_min,
            d_b_max,
            points,
            surface_points,
        } => {
            if let Some(alpha_g) = alpha_g {
                cfg.fields.alpha_g = alpha_g;
            }
            if let Some(ratio_min) = ratio_min {
                cfg.fidelity.ratio_min = ratio_min;
            }
            if let Some(d_b_min) = d_b_min {
                cfg.fidelity.d_b_min = d_b_min;
            }
            if let Some(d_b_max) = d_b_max {
                cfg.fidelity.d_b_max = d_b_max;
            }
            if let Some(points) = points {
                cfg.fidelity.points = points;
            }
            if let Some(surface_points) = surface_points {
                cfg.fidelity.surface_points = surface_points;
            }
            commands::cmd_fidelity(&cfg)?;
        }
        Command::Verify { tolerance_scale } => {
            if let Some(scale) = tolerance_scale {
                cfg.verify.tolerance_scale = scale;
            }
            let report = commands::cmd_verify(&cfg)?;
            if !report.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
