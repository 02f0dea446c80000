//! Simulation and optimization engine for the storage, many-body
//! decoherence, and retrieval of collective spin-wave excitations in a
//! blockaded atomic medium, and for the photon-subtraction protocol built
//! on top of them.
//!
//! Lengths are measured in blockade radii, positions along the medium in
//! `[0, length]`, and optical response through the resonant optical depth
//! per blockade radius `d_b`. All heavy numerics live behind small typed
//! entry points; everything is deterministic given explicit seeds.

pub mod absorber;
pub mod density;
pub mod error;
pub mod io;
pub mod kernel;
pub mod model;
pub mod oracle;
mod poisson;
mod quad;
pub mod retrieval;
pub mod search;
pub mod subtraction;
pub mod verify;

pub use absorber::{
    absorber_fidelity, absorber_fidelity_given, absorber_subtract_fock, absorber_subtract_given,
    absorption_probability, optimize_absorber, residual_scattering, AbsorberParams, AbsorberReport,
    DEFAULT_RATIO_MIN,
};
pub use density::{
    default_slice_mode, evolve_density, mode_grid, reduced_density, two_excitation_slice,
    DensityMatrixGrid, PhiSource, PhiTable, SpinWaveMode,
};
pub use error::{Error, Result};
pub use io::{
    density_to_json, format_float, write_density_csv, write_density_json, write_json,
    EfficiencyCurve, Metadata,
};
pub use kernel::{
    decay_exponent_quadrature, phi, phi_approx_sum, phi_infinite_db, transmission_amplitude,
    ComplexAmplitude, PhiValue, Transmission,
};
pub use model::{
    decay_exponent_exact, rescaled_potential, scattering_probability,
    scattering_probability_approx, total_potential, FieldSpec, GateConfig, ModelParams,
};
pub use oracle::{
    mc_decoherence, mc_pipeline, mc_retrieval, ode_convergence_order, ode_transmission,
    ode_transmission_fixed, DecoherenceClasses, McResult, MAX_ODE_STEP, MIN_TRIALS,
    ODE_RICHARDSON_TOL,
};
pub use retrieval::{
    mean_retrieved, mean_scattered, retrieval_efficiency, retrieval_fixed_photons,
    retrieval_saturated_source, retrieval_unshadowed, shadowed_scattering,
};
pub use search::{log_spaced, maximize_log_plane, maximize_log_scalar, PlaneMax, ScalarMax};
pub use subtraction::{
    decoherence_probs, fidelity, optimize_fidelity, retrieval_probs, storage_probs,
    subtract_prob_coherent_source, subtract_prob_fock, StageProbs, SubtractionReport,
    DEFAULT_ALPHA_S_BOUNDS,
};
pub use verify::{run_verification, CheckReport, VerifyReport};
