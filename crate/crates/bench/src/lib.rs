//! Fixtures shared by the benchmarks.

use vibrosqueeze::units::{energy_to_angular_frequency, rabi_from_s};
use vibrosqueeze::{PhononParams, SystemParams};

pub const EMISSION_RATE: f64 = 1.0 / 700.0;

/// Representative points: weak resonant drive and strong detuned drive.
pub fn fixtures() -> Vec<(&'static str, SystemParams, PhononParams)> {
    let pp = PhononParams::quantum_dot();
    let point = |s: f64, mev: f64| {
        SystemParams::new(rabi_from_s(s, EMISSION_RATE), energy_to_angular_frequency(mev), EMISSION_RATE).expect("valid fixture")
    };
    vec![("weak_resonant", point(1.0 / 3.0, 0.0), pp), ("strong_detuned", point(8e6, 1.0), pp)]
}
