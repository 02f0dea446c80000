//! Raw bytes decoded as packed little-endian f64 coordinates must never
//! panic the excitation-list validator, and every accepted list must
//! evaluate to a finite, nonnegative total potential.

#![no_main]

use libfuzzer_sys::fuzz_target;
use spinwave::{total_potential, GateConfig, ModelParams};

/// Bounded so a long input cannot turn one exec into a quadratic stall.
const MAX_POSITIONS: usize = 64;

fuzz_target!(|data: &[u8]| {
    let positions: Vec<f64> = data
        .chunks_exact(8)
        .take(MAX_POSITIONS)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Ok(config) = GateConfig::new(positions) else {
        return;
    };
    // Accepted lists come back strictly ascending regardless of input order.
    assert!(config.positions().windows(2).all(|w| w[0] < w[1]));
    let params = ModelParams::new(2.0).expect("default params are valid");
    let _ = config.check_in_medium(&params);
    let probes = [0.0, -1.0, params.length / 2.0, config.positions()[0]];
    for z in probes {
        let v = total_potential(z, &config, params.v_cap);
        assert!(v.is_finite() && v >= 0.0, "potential {v} at z = {z}");
    }
});
