//! Unit conventions.
//!
//! Every frequency and rate inside the crate is an angular frequency in ps⁻¹
//! (ħ = 1). Energies in meV and temperatures in kelvin only appear at the
//! configuration boundary and are converted here.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.086_173_332_62;

/// meV → ps⁻¹.
pub fn energy_to_angular_frequency(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// ps⁻¹ → meV.
pub fn angular_frequency_to_energy(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// ħβ = ħ/(k_B T) in ps, the inverse temperature expressed as a time so that
/// `hbar_beta * omega` is dimensionless.
pub fn hbar_beta(temperature_k: f64) -> f64 {
    HBAR_MEV_PS / (KB_MEV_PER_K * temperature_k)
}

/// Dimensionless driving s = 2(Ω/Γ)² → Ω.
pub fn rabi_from_s(s: f64, emission_rate: f64) -> f64 {
    emission_rate * (0.5 * s).sqrt()
}

pub fn s_from_rabi(rabi: f64, emission_rate: f64) -> f64 {
    2.0 * (rabi / emission_rate).powi(2)
}

/// Dimensionless detuning d = 4(δ/Γ)².
pub fn d_from_detuning(detuning: f64, emission_rate: f64) -> f64 {
    4.0 * (detuning / emission_rate).powi(2)
}
