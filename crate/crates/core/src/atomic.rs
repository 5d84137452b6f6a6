//! Phonon-free resonance fluorescence in closed form, the optimal generic
//! Bloch state and the Gibbs state of the driven emitter.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BlochVector, DensityOperator2, Matrix2c, SystemParams};
use crate::units::{d_from_detuning, s_from_rabi};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicPoint {
    pub s: f64,
    pub d: f64,
    /// S = s/(1+d)
    pub saturation: f64,
    pub population: f64,
    pub coherent_power: f64,
    pub min_variance: f64,
}

pub fn atomic_steady(s: f64, d: f64) -> Result<AtomicPoint> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", "must be finite and >= 0"));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::invalid("d", "must be finite and >= 0"));
    }
    let sat = s / (1.0 + d);
    let population = sat / (2.0 * (sat + 1.0));
    Ok(AtomicPoint {
        s,
        d,
        saturation: sat,
        population,
        coherent_power: population / (sat + 1.0),
        min_variance: sat * (sat - 1.0) / (sat + 1.0).powi(2),
    })
}

pub fn atomic_point(sp: &SystemParams) -> Result<AtomicPoint> {
    sp.validate()?;
    atomic_steady(
        s_from_rabi(sp.rabi_magnitude, sp.emission_rate),
        d_from_detuning(sp.detuning, sp.emission_rate),
    )
}

/// Steady state of the optical Bloch equations with emission rate Γ and
/// pure dephasing γ, for H = δσ†σ + ½(Ωσ + Ω*σ†).
pub fn atomic_density(sp: &SystemParams) -> Result<DensityOperator2> {
    sp.validate()?;
    let g2 = 0.5 * (sp.emission_rate + sp.pure_dephasing_rate);
    let omega = sp.rabi_magnitude;
    let k = omega * omega / (2.0 * sp.emission_rate) * g2 / (g2 * g2 + sp.detuning * sp.detuning);
    let p = k / (1.0 + 2.0 * k);
    let sigma = Complex64::new(0.0, -0.5 * omega * (1.0 - 2.0 * p)) / Complex64::new(g2, sp.detuning);
    let sigma = sigma * Complex64::from_polar(1.0, -sp.rabi_phase);
    DensityOperator2::new(Matrix2c::new((1.0 - p).into(), sigma.conj(), sigma, p.into()))
}

/// Minimal variance of a Bloch state with B = 1: 1 − l|cosθ| − l²sin²θ.
pub fn bloch_min_variance(length: f64, polar: f64) -> f64 {
    1.0 - length * polar.cos().abs() - (length * polar.sin()).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericBlochMinimum {
    pub length: f64,
    pub polar: [f64; 2],
    pub min_variance: f64,
    /// Lowest value found by the brute-force grid.
    pub grid_min_variance: f64,
}

/// The optimum l = 1, θ ∈ {π/3, 2π/3} with variance −1/4, together with a
/// 200×200 scan over (l, θ) confirming nothing lower exists.
pub fn generic_bloch_minimum() -> GenericBlochMinimum {
    let n = 200;
    let mut grid = f64::INFINITY;
    for i in 0..n {
        let l = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let t = PI * j as f64 / (n - 1) as f64;
            grid = grid.min(bloch_min_variance(l, t));
        }
    }
    GenericBlochMinimum {
        length: 1.0,
        polar: [FRAC_PI_3, 2.0 * FRAC_PI_3],
        min_variance: -0.25,
        grid_min_variance: grid,
    }
}

/// Bloch vector of exp(−ħβH)/Z for H = δσ†σ + ½(Ωσ + Ω*σ†).
pub fn thermal_bloch(rabi: Complex64, detuning: f64, hbar_beta: f64) -> Result<BlochVector> {
    let eta = rabi.norm().hypot(detuning);
    if !(eta > 0.0) {
        return Err(Error::invalid("eta", "sqrt(delta^2 + |Omega|^2) must be > 0"));
    }
    if !(hbar_beta >= 0.0) {
        return Err(Error::invalid("hbar_beta", "must be >= 0"));
    }
    let phase = if rabi.norm() == 0.0 { 0.0 } else { (rabi.arg() + PI).rem_euclid(2.0 * PI) };
    BlochVector::new((0.5 * hbar_beta * eta).tanh(), rabi.norm().atan2(-detuning), phase)
}

/// Golden-section minimisation of a unimodal function on [a, b].
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Saturation at which the atomic variance S(S−1)/(S+1)² is least.
///
/// Golden section brackets the minimum; bisection on the derivative
/// (3S − 1)/(S + 1)³ then pins its location to machine precision.
pub fn optimal_saturation() -> (f64, f64) {
    let f = |s: f64| s * (s - 1.0) / (s + 1.0).powi(2);
    let (x, _) = golden_section(f, 0.0, 1.0, 1e-6);
    let slope = |s: f64| (3.0 * s - 1.0) / (s + 1.0).powi(3);
    let (mut a, mut b) = (x - 1e-5, x + 1e-5);
    debug_assert!(slope(a) < 0.0 && slope(b) > 0.0);
    while b - a > f64::EPSILON * b {
        let m = 0.5 * (a + b);
        if slope(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let s = 0.5 * (a + b);
    (s, f(s))
}
