//! Mach–Zehnder phase estimation with a coherent reference arm.
//!
//! The figure of merit is F = ΔN₋²/⟨N₊⟩, the photon-number-difference
//! variance normalised by the total flux; F = 1 is the shot-noise level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::ObservableSet;

/// Light entering the first arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputState {
    Coherent {
        power: f64,
    },
    /// ξ = |ξ| e^{−iφ_ξ}
    SqueezedVacuum {
        squeeze: f64,
        phase: f64,
    },
    /// Emitter steady state: P, |⟨σ⟩_V|², B and φ with ⟨σ⟩ = |⟨σ⟩|e^{−iφ}.
    ResonanceFluorescence {
        population: f64,
        dipole_power: f64,
        coherence_factor: f64,
        dipole_phase: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerInput {
    pub state: InputState,
    /// P_α = |α|²
    pub reference_power: f64,
    /// φ_α
    pub reference_phase: f64,
    /// Path-length parameter Θ.
    pub path_phase: f64,
}

impl InterferometerInput {
    pub fn new(state: InputState, reference_power: f64, reference_phase: f64, path_phase: f64) -> Result<Self> {
        let i = InterferometerInput {
            state,
            reference_power,
            reference_phase,
            path_phase,
        };
        i.validate()?;
        Ok(i)
    }

    /// Resonance-fluorescence input at Θ = π/2 built from pipeline output.
    pub fn from_observables(obs: &ObservableSet, b: f64, reference_power: f64, reference_phase: f64) -> Result<Self> {
        Self::new(
            InputState::ResonanceFluorescence {
                population: obs.population,
                dipole_power: obs.coherent_power / (b * b),
                coherence_factor: b,
                dipole_phase: obs.dipole_phase,
            },
            reference_power,
            reference_phase,
            std::f64::consts::FRAC_PI_2,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite and >= 0"))
            }
        };
        nonneg("reference_power", self.reference_power)?;
        if !self.reference_phase.is_finite() || !self.path_phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        match self.state {
            InputState::Coherent { power } => nonneg("power", power),
            InputState::SqueezedVacuum { squeeze, phase } => {
                nonneg("squeeze", squeeze)?;
                if phase.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("phase", "must be finite"))
                }
            }
            InputState::ResonanceFluorescence {
                population,
                dipole_power,
                coherence_factor,
                dipole_phase,
            } => {
                if !(0.0..=1.0).contains(&population) {
                    return Err(Error::invalid("population", "must lie in [0, 1]"));
                }
                if !(0.0..=0.25 + 1e-12).contains(&dipole_power) {
                    return Err(Error::invalid("dipole_power", "must lie in [0, 0.25]"));
                }
                if !(coherence_factor > 0.0 && coherence_factor <= 1.0) {
                    return Err(Error::invalid("coherence_factor", "must lie in (0, 1]"));
                }
                if dipole_phase.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("dipole_phase", "must be finite"))
                }
            }
        }
    }

    /// Photon flux entering through the first arm.
    pub fn input_power(&self) -> f64 {
        match self.state {
            InputState::Coherent { power } => power,
            InputState::SqueezedVacuum { squeeze, .. } => squeeze.sinh().powi(2),
            InputState::ResonanceFluorescence { population, .. } => population,
        }
    }
}

fn squeezed(input: &InterferometerInput) -> Result<(f64, f64)> {
    match input.state {
        InputState::SqueezedVacuum { squeeze, phase } => Ok((squeeze, phase)),
        _ => Err(Error::invalid("state", "expected a squeezed-vacuum input")),
    }
}

/// ⟨N₋⟩ = cosΘ (P_ξ − P_α)
pub fn sv_mean_difference(input: &InterferometerInput) -> Result<f64> {
    let (r, _) = squeezed(input)?;
    Ok(input.path_phase.cos() * (r.sinh().powi(2) - input.reference_power))
}

/// ΔN₋² for a squeezed vacuum against the coherent reference, with
/// Δφ = 2φ_α − φ_ξ.
pub fn sv_variance(input: &InterferometerInput) -> Result<f64> {
    let (r, phase) = squeezed(input)?;
    let pa = input.reference_power;
    let px = r.sinh().powi(2);
    let c2 = (2.0 * input.path_phase).cos();
    let dphi = 2.0 * input.reference_phase - phase;
    // √(P_ξ(P_ξ+1)) = sinh|ξ| cosh|ξ|
    let root = 0.5 * (2.0 * r).sinh();
    Ok(pa + px * (px + 1.5) + c2 * px * (px + 0.5) + (1.0 - c2) * pa * (px + root * dphi.cos()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedOptimum {
    pub squeeze: f64,
    pub figure_of_merit: f64,
}

/// |ξ|* = ½ ln(1 + 2√P_α), F* = 1/(1 + √P_α).
pub fn sv_optimal(reference_power: f64) -> Result<SqueezedOptimum> {
    if !(reference_power > 0.0 && reference_power.is_finite()) {
        return Err(Error::invalid("reference_power", "must be finite and > 0"));
    }
    let root = reference_power.sqrt();
    Ok(SqueezedOptimum {
        squeeze: 0.5 * (1.0 + 2.0 * root).ln(),
        figure_of_merit: 1.0 / (1.0 + root),
    })
}

/// ΔN₋² = P + P_α(1 − 4B²|⟨σ⟩|² cos²Δφ) at Θ = π/2, Δφ = φ_α − φ.
pub fn rf_variance(input: &InterferometerInput) -> Result<f64> {
    match input.state {
        InputState::ResonanceFluorescence {
            population,
            dipole_power,
            coherence_factor,
            dipole_phase,
        } => {
            let c = (input.reference_phase - dipole_phase).cos();
            let coherent = coherence_factor * coherence_factor * dipole_power;
            Ok(population + input.reference_power * (1.0 - 4.0 * coherent * c * c))
        }
        _ => Err(Error::invalid("state", "expected a resonance-fluorescence input")),
    }
}

pub fn variance(input: &InterferometerInput) -> Result<f64> {
    match input.state {
        InputState::Coherent { power } => Ok(power + input.reference_power),
        InputState::SqueezedVacuum { .. } => sv_variance(input),
        InputState::ResonanceFluorescence { .. } => rf_variance(input),
    }
}

/// F = ΔN₋²/⟨N₊⟩.
pub fn figure_of_merit(input: &InterferometerInput) -> Result<f64> {
    input.validate()?;
    let flux = input.input_power() + input.reference_power;
    if !(flux > 0.0) {
        return Err(Error::invalid("flux", "total photon flux must be > 0"));
    }
    Ok(variance(input)? / flux)
}

/// |ξ| whose vacuum carries P photons: sinh²|ξ| = P.
pub fn flux_matched_squeeze(power: f64) -> Result<f64> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::invalid("power", "must be finite and >= 0"));
    }
    Ok(power.sqrt().asinh())
}
