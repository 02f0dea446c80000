//! Front end for the spin-wave decoherence and photon-subtraction models:
//! figure-data sweeps, coherence-slice grids, and the oracle verification
//! matrix, driven by a TOML run configuration plus command-line overrides.
//! The binary lives in `main.rs`; this library exposes the configuration
//! schema and the subcommand implementations to tests and fuzz targets.

pub mod commands;
pub mod config;
