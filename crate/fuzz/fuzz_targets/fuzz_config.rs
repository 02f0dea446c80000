//! Any byte string fed to the TOML run-configuration parser must either
//! come back as a structured error or as a config whose derived builders
//! are panic-free.

#![no_main]

use libfuzzer_sys::fuzz_target;
use spinwave_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = toml::from_str::<RunConfig>(text) else {
        return;
    };
    // The builders validate numerics; Err is fine, a panic is the bug.
    let _ = cfg.field_spec();
    let _ = cfg.scattering(cfg.retrieval.p);
    let _ = cfg.scattering(cfg.subtract.p);
    if let Ok(params) = cfg.model_params() {
        let _ = cfg.slice.mode.build(&params);
    }
});
