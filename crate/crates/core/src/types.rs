//! Shared domain types: parameter blocks, the 2×2 density operator and its
//! Bloch-vector parameterisation.
//!
//! Basis ordering is `{|g⟩, |e⟩}` everywhere, so the dipole operator
//! σ = |g⟩⟨e| is the matrix with a single 1 in row 0, column 1, and
//! ⟨σ⟩ = tr(ρσ) = ρ_eg = `rho[(1, 0)]`.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

pub type Matrix2c = Matrix2<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Two-level operators in the `{|g⟩, |e⟩}` basis.
pub mod ops {
    use super::*;

    /// σ = |g⟩⟨e|
    pub fn sigma() -> Matrix2c {
        Matrix2c::new(ZERO, ONE, ZERO, ZERO)
    }

    /// σ† = |e⟩⟨g|
    pub fn sigma_dag() -> Matrix2c {
        Matrix2c::new(ZERO, ZERO, ONE, ZERO)
    }

    /// σ†σ = |e⟩⟨e|
    pub fn excited() -> Matrix2c {
        Matrix2c::new(ZERO, ZERO, ZERO, ONE)
    }

    /// σ_x = σ + σ†
    pub fn sigma_x() -> Matrix2c {
        Matrix2c::new(ZERO, ONE, ONE, ZERO)
    }

    /// σ_y = i(σ − σ†). This sign pairs with B_y = i(B₊ − B₋)/2 in the
    /// transformed phonon interaction.
    pub fn sigma_y() -> Matrix2c {
        Matrix2c::new(ZERO, I, -I, ZERO)
    }

    /// σ_z = 2σ†σ − 1
    pub fn sigma_z() -> Matrix2c {
        Matrix2c::new(-ONE, ZERO, ZERO, ONE)
    }

    pub fn identity() -> Matrix2c {
        Matrix2c::identity()
    }
}

/// Emitter and drive parameters, all angular frequencies in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub rabi_magnitude: f64,
    pub rabi_phase: f64,
    /// Laser–emitter detuning δ. Whether this is measured from the bare or
    /// the polaron-shifted transition is decided by the caller (see
    /// [`crate::variational::DetuningConvention`]).
    pub detuning: f64,
    pub emission_rate: f64,
    pub pure_dephasing_rate: f64,
}

impl SystemParams {
    pub fn new(rabi_magnitude: f64, detuning: f64, emission_rate: f64) -> Result<Self> {
        let p = SystemParams {
            rabi_magnitude,
            rabi_phase: 0.0,
            detuning,
            emission_rate,
            pure_dephasing_rate: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.rabi_phase = phase.rem_euclid(TAU);
        self
    }

    pub fn with_dephasing(mut self, rate: f64) -> Self {
        self.pure_dephasing_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_magnitude.is_finite() && self.rabi_magnitude >= 0.0) {
            return Err(Error::invalid("rabi_magnitude", "must be finite and >= 0"));
        }
        if !self.rabi_phase.is_finite() {
            return Err(Error::invalid("rabi_phase", "must be finite"));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        if !(self.emission_rate.is_finite() && self.emission_rate > 0.0) {
            return Err(Error::invalid("emission_rate", "must be finite and > 0"));
        }
        if !(self.pure_dephasing_rate.is_finite() && self.pure_dephasing_rate >= 0.0) {
            return Err(Error::invalid("pure_dephasing_rate", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Complex Rabi frequency Ω = |Ω| e^{iφ_Ω}.
    pub fn rabi(&self) -> Complex64 {
        Complex64::from_polar(self.rabi_magnitude, self.rabi_phase)
    }

    /// Saturation parameter S = s/(1+d).
    pub fn saturation(&self) -> f64 {
        units::s_from_rabi(self.rabi_magnitude, self.emission_rate)
            / (1.0 + units::d_from_detuning(self.detuning, self.emission_rate))
    }
}

/// Phonon bath defining J(ω) = α ω³ exp(−ω²/ω_c²) and the temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononParams {
    /// Coupling strength α in ps².
    pub alpha: f64,
    /// Cut-off ω_c in ps⁻¹.
    pub cutoff: f64,
    /// Temperature in kelvin.
    pub temperature: f64,
}

impl PhononParams {
    pub fn new(alpha: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        let p = PhononParams {
            alpha,
            cutoff,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    /// Quantum-dot bath used throughout the figures: α = 0.027 ps²,
    /// ω_c = 2.2 ps⁻¹, T = 4 K.
    pub fn quantum_dot() -> Self {
        PhononParams {
            alpha: 0.027,
            cutoff: 2.2,
            temperature: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", "must be finite and >= 0"));
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(Error::invalid("cutoff", "must be finite and > 0"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be finite and > 0 (beta finite)"));
        }
        Ok(())
    }

    /// ħβ in ps.
    pub fn hbar_beta(&self) -> f64 {
        units::hbar_beta(self.temperature)
    }
}

/// Unit-trace Hermitian 2×2 state in the `{|g⟩, |e⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator2 {
    m: Matrix2c,
}

impl DensityOperator2 {
    pub fn new(m: Matrix2c) -> Result<Self> {
        Self::with_positivity_tolerance(m, POSITIVITY_TOL)
    }

    /// As [`DensityOperator2::new`], tolerating eigenvalues down to `-tol`.
    pub fn with_positivity_tolerance(m: Matrix2c, tol: f64) -> Result<Self> {
        let defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { defect });
        }
        let trace = (m[(0, 0)] + m[(1, 1)]).re;
        if !((trace - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::TraceNotUnity { trace });
        }
        let rho = DensityOperator2 { m };
        let min_eigenvalue = rho.eigenvalues()[0];
        if min_eigenvalue < -tol {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(rho)
    }

    pub fn ground() -> Self {
        DensityOperator2 {
            m: Matrix2c::new(ONE, ZERO, ZERO, ZERO),
        }
    }

    pub fn excited() -> Self {
        DensityOperator2 {
            m: Matrix2c::new(ZERO, ZERO, ZERO, ONE),
        }
    }

    pub fn maximally_mixed() -> Self {
        DensityOperator2 {
            m: Matrix2c::identity().scale(0.5),
        }
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.m
    }

    /// P = ⟨σ†σ⟩
    pub fn excited_population(&self) -> f64 {
        self.m[(1, 1)].re
    }

    /// ⟨σ⟩ = ρ_eg
    pub fn dipole(&self) -> Complex64 {
        self.m[(1, 0)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[(0, 0)].re;
        let d = self.m[(1, 1)].re;
        let b = self.m[(1, 0)].norm();
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d).powi(2) + b * b).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// Applies the diagonal frame rotation |e⟩ → e^{-iφ}|e⟩, which multiplies
    /// the coherence ρ_eg by e^{-iφ}.
    pub fn rotate_dipole_phase(&self, phase: f64) -> Self {
        let r = Complex64::from_polar(1.0, -phase);
        let mut m = self.m;
        m[(1, 0)] *= r;
        m[(0, 1)] *= r.conj();
        DensityOperator2 { m }
    }
}

/// Bloch-vector parameterisation
/// ρ = ½(1 + l[cosθ(2σ†σ − 1) + sinθ X(φ)]), X(φ) = e^{iφ}σ + e^{−iφ}σ†.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub length: f64,
    pub polar: f64,
    pub phase: f64,
}

impl BlochVector {
    pub fn new(length: f64, polar: f64, phase: f64) -> Result<Self> {
        let b = BlochVector {
            length,
            polar,
            phase,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length <= 1.0 + 1e-12) {
            return Err(Error::invalid("length", format!("{} not in [0, 1]", self.length)));
        }
        if !(self.polar >= -1e-12 && self.polar <= PI + 1e-12) {
            return Err(Error::invalid("polar", format!("{} not in [0, pi]", self.polar)));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(())
    }

    /// P = (1 + l cosθ)/2
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.length * self.polar.cos())
    }

    /// |⟨σ⟩|² = l² sin²θ / 4
    pub fn coherent_power(&self) -> f64 {
        0.25 * (self.length * self.polar.sin()).powi(2)
    }
}

pub fn bloch_from_density(rho: &DensityOperator2) -> Result<BlochVector> {
    // Re-validate: the matrix may have been produced by arithmetic elsewhere.
    DensityOperator2::new(rho.m)?;
    let z = 2.0 * rho.excited_population() - 1.0;
    let dipole = rho.dipole();
    let transverse = 2.0 * dipole.norm();
    let length = z.hypot(transverse);
    let polar = transverse.atan2(z);
    let phase = if transverse == 0.0 {
        0.0
    } else {
        (-dipole.arg()).rem_euclid(TAU)
    };
    Ok(BlochVector {
        length: length.min(1.0 + 1e-12),
        polar,
        phase,
    })
}

pub fn density_from_bloch(b: &BlochVector) -> Result<DensityOperator2> {
    b.validate()?;
    let l = b.length.min(1.0);
    let z = l * b.polar.cos();
    let dipole = Complex64::from_polar(0.5 * l * b.polar.sin(), -b.phase);
    let m = Matrix2c::new(
        Complex64::from(0.5 * (1.0 - z)),
        dipole.conj(),
        dipole,
        Complex64::from(0.5 * (1.0 + z)),
    );
    Ok(DensityOperator2 { m })
}
