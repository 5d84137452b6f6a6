//! Self-consistent variational polaron frame.
//!
//! Each phonon mode is displaced by a fraction F(ω) of its full polaron
//! displacement. F depends on the renormalised drive Ω_r = ΩB and detuning
//! δ_r, which in turn are integrals over F, so the pair (Ω_r, δ_r) is found
//! by damped fixed-point iteration. Two starting points are tried and the
//! fixed point with the lower free-energy bound wins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_frequency_vec, omega_coth, QuadratureSettings};
use crate::types::{PhononParams, SystemParams};
use crate::units::HBAR_MEV_PS;

/// Which displacement function defines the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Optimal F(ω) from the free-energy bound.
    #[default]
    Variational,
    /// F ≡ 1.
    FullPolaron,
    /// F ≡ 0.
    WeakCoupling,
}

/// How the input detuning relates to the bare transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningConvention {
    /// Input δ is measured from the polaron-shifted line: δ_bare = δ + ∫J/ω.
    #[default]
    Shifted,
    /// Input δ is the bare detuning.
    Raw,
}

/// Sign of the renormalisation δ_r − δ_bare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSign {
    /// δ_r = δ_bare + ∫ J F(F−2)/ω dω
    #[default]
    FMinusTwo,
    /// δ_r = δ_bare + ∫ J F(2−F)/ω dω
    TwoMinusF,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalOptions {
    pub frame: Frame,
    pub convention: DetuningConvention,
    pub shift_sign: ShiftSign,
    pub damping: f64,
    pub fallback_damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub quadrature: QuadratureSettings,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            frame: Frame::Variational,
            convention: DetuningConvention::Shifted,
            shift_sign: ShiftSign::FMinusTwo,
            damping: 0.5,
            fallback_damping: 0.1,
            tolerance: 1e-10,
            max_iterations: 10_000,
            quadrature: QuadratureSettings::default(),
        }
    }
}

/// Starting guess for the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// F ≡ 1: Ω_r = Ω·B_polaron, δ_r = δ_bare − ∫J/ω.
    Polaron,
    /// F ≡ 0: Ω_r = Ω, δ_r = δ_bare.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub omega_r: f64,
    pub delta_r: f64,
    /// Coherence factor B = ⟨B_±⟩.
    pub b: f64,
    pub eta_r: f64,
    /// Free-energy bound A_B in meV.
    pub free_energy_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub delta_bare: f64,
    /// ∫ J(ω)/ω dω
    pub polaron_shift: f64,
    pub rabi: f64,
    pub hbar_beta: f64,
    pub frame: Frame,
}

impl VariationalSolution {
    /// F(ω) of this frame.
    pub fn displacement(&self, omega: f64) -> f64 {
        self.displacement_pair(omega).0
    }

    /// (F(ω), 1 − F(ω)).
    pub fn displacement_pair(&self, omega: f64) -> (f64, f64) {
        match self.frame {
            Frame::FullPolaron => (1.0, 0.0),
            Frame::WeakCoupling => (0.0, 1.0),
            Frame::Variational => displacement_pair(omega, self.delta_r, self.omega_r, self.hbar_beta),
        }
    }

    /// Slowest rate at which F(ω) switches on at low frequency. Bath
    /// correlations built from F decay no faster than e^{−ω* τ}.
    pub fn crossover_frequency(&self) -> Option<f64> {
        if self.frame != Frame::Variational || self.omega_r == 0.0 {
            return None;
        }
        let t = tau_prime(self.eta_r, self.hbar_beta);
        let gap = 1.0 - self.delta_r * t;
        Some(self.omega_r * (t / (self.hbar_beta * gap)).sqrt())
    }
}

/// tanh(ħβη/2)/η, continued to ħβ/2 at η = 0.
fn tau_prime(eta: f64, hbar_beta: f64) -> f64 {
    let x = 0.5 * hbar_beta * eta;
    if x < 1e-8 {
        0.5 * hbar_beta
    } else {
        x.tanh() / eta
    }
}

/// F(ω) = [η_r − δ_r t] / [η_r − t(δ_r − Ω_r² coth(ħβω/2)/(2ω))],
/// t = tanh(ħβη_r/2).
pub fn displacement_fraction(omega: f64, delta_r: f64, omega_r: f64, hbar_beta: f64) -> f64 {
    displacement_pair(omega, delta_r, omega_r, hbar_beta).0
}

/// (F, 1 − F), the complement formed without cancellation.
pub fn displacement_pair(omega: f64, delta_r: f64, omega_r: f64, hbar_beta: f64) -> (f64, f64) {
    if omega_r == 0.0 {
        return (1.0, 0.0);
    }
    if omega <= 0.0 {
        return (0.0, 1.0);
    }
    let eta = delta_r.hypot(omega_r);
    let tp = tau_prime(eta, hbar_beta);
    let num = 1.0 - delta_r * tp;
    let extra = tp * omega_r * omega_r * omega_coth(omega, hbar_beta) / (2.0 * omega * omega);
    let den = num + extra;
    (num / den, extra / den)
}

/// ∫ J(ω)/ω dω, the full polaron shift.
pub fn polaron_shift(pp: &PhononParams, s: &QuadratureSettings) -> Result<f64> {
    let v = integrate_frequency_vec(
        1,
        |w, o| {
            let u = w / pp.cutoff;
            o[0] = pp.alpha * w * w * (-u * u).exp();
        },
        pp.cutoff,
        s,
    )?;
    Ok(v[0])
}

fn bare_detuning(sp: &SystemParams, shift: f64, c: DetuningConvention) -> f64 {
    match c {
        DetuningConvention::Shifted => sp.detuning + shift,
        DetuningConvention::Raw => sp.detuning,
    }
}

/// A_B = ħ[(δ_r − δ_bare)/2 − (ħβ)⁻¹ ln(2 cosh(ħβη_r/2))] in meV.
pub fn free_energy_bound(candidate: &VariationalSolution) -> f64 {
    let x = (0.5 * candidate.hbar_beta * candidate.eta_r).abs();
    let ln2cosh = x + (-2.0 * x).exp().ln_1p();
    HBAR_MEV_PS * (0.5 * (candidate.delta_r - candidate.delta_bare) - ln2cosh / candidate.hbar_beta)
}

struct Problem<'a> {
    pp: &'a PhononParams,
    rabi: f64,
    delta_bare: f64,
    shift: f64,
    hbar_beta: f64,
    sign: f64,
    inner: QuadratureSettings,
}

impl Problem<'_> {
    /// One application of the self-consistency map. Returns (Ω_r', δ_r', B).
    fn map(&self, omega_r: f64, delta_r: f64) -> Result<(f64, f64, f64)> {
        let pp = self.pp;
        let hb = self.hbar_beta;
        let v = integrate_frequency_vec(
            2,
            |w, o| {
                let u = w / pp.cutoff;
                let g = pp.alpha * (-u * u).exp();
                let f = displacement_fraction(w, delta_r, omega_r, hb);
                o[0] = g * f * f * omega_coth(w, hb);
                o[1] = g * w * w * f * (f - 2.0);
            },
            pp.cutoff,
            &self.inner,
        )?;
        let b = (-0.5 * v[0]).exp();
        Ok((self.rabi * b, self.delta_bare + self.sign * v[1], b))
    }

    fn full_polaron(&self) -> Result<(f64, f64, f64)> {
        let pp = self.pp;
        let hb = self.hbar_beta;
        let v = integrate_frequency_vec(
            1,
            |w, o| {
                let u = w / pp.cutoff;
                o[0] = pp.alpha * (-u * u).exp() * omega_coth(w, hb);
            },
            pp.cutoff,
            &self.inner,
        )?;
        let b = (-0.5 * v[0]).exp();
        Ok((self.rabi * b, self.delta_bare - self.sign * self.shift, b))
    }

    fn solution(&self, omega_r: f64, delta_r: f64, b: f64, frame: Frame, iterations: usize, residual: f64) -> VariationalSolution {
        let mut s = VariationalSolution {
            omega_r,
            delta_r,
            b,
            eta_r: delta_r.hypot(omega_r),
            free_energy_bound: 0.0,
            iterations,
            converged: true,
            residual,
            delta_bare: self.delta_bare,
            polaron_shift: self.shift,
            rabi: self.rabi,
            hbar_beta: self.hbar_beta,
            frame,
        };
        s.free_energy_bound = free_energy_bound(&s);
        s
    }

    fn scale(&self, omega_r: f64, delta_r: f64) -> f64 {
        delta_r
            .hypot(omega_r)
            .max(self.rabi)
            .max(self.delta_bare.abs())
            .max(f64::MIN_POSITIVE)
    }

    fn iterate(&self, start: Start, opts: &VariationalOptions) -> Result<VariationalSolution> {
        let (mut x_o, mut x_d) = match start {
            Start::Polaron => {
                let (o, d, _) = self.full_polaron()?;
                (o, d)
            }
            Start::Bare => (self.rabi, self.delta_bare),
        };
        let mut theta = opts.damping;
        let mut prev = (0.0, 0.0);
        let mut alternations = 0;
        let mut residual = f64::INFINITY;
        for it in 1..=opts.max_iterations {
            let (m_o, m_d, b) = self.map(x_o, x_d)?;
            let (d_o, d_d) = (m_o - x_o, m_d - x_d);
            residual = d_o.abs().max(d_d.abs()) / self.scale(x_o, x_d);
            if residual < opts.tolerance {
                return Ok(self.solution(m_o, m_d, b, Frame::Variational, it, residual));
            }
            if d_o * prev.0 + d_d * prev.1 < 0.0 {
                alternations += 1;
                if alternations >= 3 {
                    theta = opts.fallback_damping;
                }
            } else {
                alternations = 0;
            }
            prev = (d_o, d_d);
            x_o += theta * d_o;
            x_d += theta * d_d;
        }
        Err(Error::VariationalNonConvergence {
            iterations: opts.max_iterations,
            residual,
            omega_r: x_o,
            delta_r: x_d,
        })
    }
}

fn problem<'a>(sp: &SystemParams, pp: &'a PhononParams, opts: &VariationalOptions) -> Result<Problem<'a>> {
    sp.validate()?;
    pp.validate()?;
    opts.quadrature.validate()?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0 && opts.fallback_damping > 0.0 && opts.fallback_damping <= 1.0) {
        return Err(Error::invalid("damping", "must lie in (0, 1]"));
    }
    // The map must be smoother than the convergence test resolves.
    let inner = QuadratureSettings {
        rel_tol: opts.quadrature.rel_tol.min(1e-13),
        abs_tol: opts.quadrature.abs_tol.min(1e-16),
        ..opts.quadrature
    };
    let shift = polaron_shift(pp, &inner)?;
    Ok(Problem {
        pp,
        rabi: sp.rabi_magnitude,
        delta_bare: bare_detuning(sp, shift, opts.convention),
        shift,
        hbar_beta: pp.hbar_beta(),
        sign: match opts.shift_sign {
            ShiftSign::FMinusTwo => 1.0,
            ShiftSign::TwoMinusF => -1.0,
        },
        inner,
    })
}

/// Fixed points reached from each starting guess, in the order
/// [`Start::Polaron`], [`Start::Bare`].
pub fn fixed_point_candidates(
    sp: &SystemParams,
    pp: &PhononParams,
    opts: &VariationalOptions,
) -> Result<Vec<Result<VariationalSolution>>> {
    let p = problem(sp, pp, opts)?;
    Ok(vec![p.iterate(Start::Polaron, opts), p.iterate(Start::Bare, opts)])
}

pub fn solve_variational(sp: &SystemParams, pp: &PhononParams, opts: &VariationalOptions) -> Result<VariationalSolution> {
    let p = problem(sp, pp, opts)?;
    match opts.frame {
        Frame::FullPolaron => {
            let (o, d, b) = p.full_polaron()?;
            Ok(p.solution(o, d, b, Frame::FullPolaron, 1, 0.0))
        }
        Frame::WeakCoupling => Ok(p.solution(p.rabi, p.delta_bare, 1.0, Frame::WeakCoupling, 1, 0.0)),
        Frame::Variational => {
            let polaron = p.iterate(Start::Polaron, opts);
            let bare = p.iterate(Start::Bare, opts);
            match (polaron, bare) {
                (Ok(a), Ok(b)) => Ok(if b.free_energy_bound < a.free_energy_bound { b } else { a }),
                (Ok(a), Err(_)) => Ok(a),
                (Err(_), Ok(b)) => Ok(b),
                (Err(e), Err(_)) => Err(e),
            }
        }
    }
}

/// Relative change of (Ω_r, δ_r) under one more application of the map.
pub fn fixed_point_residual(sol: &VariationalSolution, sp: &SystemParams, pp: &PhononParams, opts: &VariationalOptions) -> Result<f64> {
    let p = problem(sp, pp, opts)?;
    let (o, d, _) = p.map(sol.omega_r, sol.delta_r)?;
    Ok((o - sol.omega_r).abs().max((d - sol.delta_r).abs()) / p.scale(sol.omega_r, sol.delta_r))
}
