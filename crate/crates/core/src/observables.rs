//! Optical observables of a steady state: emitted powers, the normally
//! ordered quadrature variance, Bloch data and the Wigner function of the
//! emitted field.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::types::DensityOperator2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    /// P = ⟨σ†σ⟩
    pub population: f64,
    /// P_coh = B²|⟨σ⟩|²
    pub coherent_power: f64,
    /// P − P_coh
    pub incoherent_power: f64,
    /// min over φ of ::ΔX(φ)²::
    pub min_variance: f64,
    /// φ with ⟨σ⟩ = |⟨σ⟩|e^{−iφ}, in [0, 2π).
    pub dipole_phase: f64,
    pub bloch_length: f64,
    pub bloch_polar: f64,
    /// ΔX(φ)ΔX(φ+π/2) at the optimal φ.
    pub heisenberg_lhs: f64,
    /// |⟨2σ†σ − 1⟩|
    pub heisenberg_rhs: f64,
    pub g2_zero: f64,
}

/// Observables of ρ with coherence factor `b` multiplying the coherent
/// emission (B = 1 without phonons).
pub fn observables(rho: &DensityOperator2, b: f64) -> Result<ObservableSet> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::invalid("b", "must lie in (0, 1]"));
    }
    let p = rho.excited_population();
    let sigma = rho.dipole();
    let dipole_sq = sigma.norm_sqr();
    let coherent_power = b * b * dipole_sq;
    let z = 2.0 * p - 1.0;
    let dipole_phase = if sigma.norm() == 0.0 { 0.0 } else { (-sigma.arg()).rem_euclid(TAU) };
    Ok(ObservableSet {
        population: p,
        coherent_power,
        incoherent_power: p - coherent_power,
        min_variance: 1.0 - z.abs() - 4.0 * coherent_power,
        dipole_phase,
        bloch_length: z.hypot(2.0 * sigma.norm()),
        bloch_polar: (2.0 * sigma.norm()).atan2(z),
        heisenberg_lhs: (1.0 - 4.0 * coherent_power).max(0.0).sqrt(),
        heisenberg_rhs: z.abs(),
        g2_zero: 0.0,
    })
}

/// Closed-form prediction for the Gibbs state of the emitter Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPrediction {
    pub bloch_length: f64,
    pub bloch_polar: f64,
    pub min_variance: f64,
}

/// Thermal-state variance 1 − (|δ|/η)l − B²(Ω²/η²)l² with l = tanh(ħβη/2).
/// Pass `b = 1` for the uncorrected form.
pub fn thermal_prediction(rabi: f64, detuning: f64, hbar_beta: f64, b: f64) -> Result<ThermalPrediction> {
    let eta = rabi.hypot(detuning);
    if !(eta > 0.0) {
        return Err(Error::invalid("eta", "sqrt(delta^2 + Omega^2) must be > 0"));
    }
    if !(hbar_beta >= 0.0) {
        return Err(Error::invalid("hbar_beta", "must be >= 0"));
    }
    let l = (0.5 * hbar_beta * eta).tanh();
    Ok(ThermalPrediction {
        bloch_length: l,
        bloch_polar: rabi.abs().atan2(-detuning),
        min_variance: 1.0 - detuning.abs() / eta * l - b * b * (rabi / eta).powi(2) * l * l,
    })
}

/// Rectangular phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for WignerGrid {
    fn default() -> Self {
        WignerGrid {
            x_min: -4.0,
            x_max: 4.0,
            p_min: -4.0,
            p_max: 4.0,
            nx: 201,
            np: 201,
        }
    }
}

impl WignerGrid {
    pub fn square(half_width: f64, n: usize) -> Self {
        WignerGrid {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::invalid("grid", "ranges must be finite and increasing"));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::invalid("grid", "needs at least two points per axis"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub grid: WignerGrid,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[i][j]` = W(x_j, p_i).
    pub values: Vec<Vec<f64>>,
}

impl WignerField {
    /// Trapezoidal ∬ W dx dp.
    pub fn integral(&self) -> f64 {
        let hx = (self.grid.x_max - self.grid.x_min) / (self.grid.nx - 1) as f64;
        let hp = (self.grid.p_max - self.grid.p_min) / (self.grid.np - 1) as f64;
        let rows: Vec<f64> = self.values.iter().map(|r| trapezoid(r, hx)).collect();
        trapezoid(&rows, hp)
    }

    /// Trapezoidal ∫ W dp at each x.
    pub fn position_marginal(&self) -> Vec<f64> {
        let hp = (self.grid.p_max - self.grid.p_min) / (self.grid.np - 1) as f64;
        (0..self.grid.nx)
            .map(|j| {
                let col: Vec<f64> = self.values.iter().map(|r| r[j]).collect();
                trapezoid(&col, hp)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// W(x, p) of the field state Σ ρ_nm |n⟩⟨m| on the Fock states {|0⟩, |1⟩},
/// with |g⟩ → |0⟩ and |e⟩ → |1⟩.
pub fn wigner_point(rho: &DensityOperator2, x: f64, p: f64) -> f64 {
    let m = rho.matrix();
    let r2 = x * x + p * p;
    let cross = m[(1, 0)] * Complex64::new(x, -p);
    (-r2).exp() / PI * (m[(0, 0)].re + m[(1, 1)].re * (2.0 * r2 - 1.0) + 2.0 * SQRT_2 * cross.re)
}

pub fn wigner(rho: &DensityOperator2, grid: &WignerGrid) -> Result<WignerField> {
    grid.validate()?;
    let x = grid.xs();
    let p = grid.ps();
    let values = p.par_iter().map(|&pi| x.iter().map(|&xj| wigner_point(rho, xj, pi)).collect()).collect();
    Ok(WignerField {
        grid: *grid,
        x,
        p,
        values,
    })
}

/// ⟨x|ρ|x⟩ on the {|0⟩, |1⟩} subspace.
pub fn position_density(rho: &DensityOperator2, x: f64) -> f64 {
    let (a, b) = (psi0(x), psi1(x));
    let m = rho.matrix();
    m[(0, 0)].re * a * a + m[(1, 1)].re * b * b + 2.0 * m[(1, 0)].re * a * b
}

fn psi0(x: f64) -> f64 {
    PI.powf(-0.25) * (-0.5 * x * x).exp()
}

fn psi1(x: f64) -> f64 {
    SQRT_2 * x * psi0(x)
}

/// W(x, p) by adaptive quadrature of π⁻¹∫⟨x+y|ρ|x−y⟩e^{−2ipy}dy.
pub fn wigner_by_quadrature(rho: &DensityOperator2, x: f64, p: f64) -> Result<f64> {
    let m = *rho.matrix();
    let psi = |u: f64| [psi0(u), psi1(u)];
    let mut f = |y: f64, out: &mut [f64]| {
        let (l, r) = (psi(x + y), psi(x - y));
        let mut k = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                k += m[(a, b)] * l[a] * r[b];
            }
        }
        let v = k * Complex64::from_polar(1.0, -2.0 * p * y);
        out[0] = v.re;
        out[1] = v.im;
    };
    let breaks: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect();
    let v = integrate_adaptive(&breaks, 2, &mut f, 1e-13, 1e-15, 10_000)?;
    Ok(v[0] / PI)
}
