//! Variational-frame master equation of the driven emitter and its steady
//! state.
//!
//! Superoperators act on the column-stacked density matrix
//! `vec ρ = [ρ_gg, ρ_eg, ρ_ge, ρ_ee]`, so that `vec(XρY) = (Yᵀ ⊗ X) vec ρ`.
//!
//! A complex drive Ω = |Ω|e^{iφ} is handled in the frame |e⟩ → e^{iφ}|e⟩
//! where the drive is real; every 2×2 operator is built there and mapped
//! back, so [`Liouvillian`] always acts on lab-frame states.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::correlations::CorrelationContext;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSettings;
use crate::types::{ops, DensityOperator2, Matrix2c, PhononParams, SystemParams, I, ONE, ZERO};
use crate::variational::{solve_variational, VariationalOptions, VariationalSolution};

pub type Matrix4c = Matrix4<Complex64>;
pub type Vector4c = Vector4<Complex64>;

/// Relative singular-value threshold separating the kernel from the rest.
const KERNEL_TOL: f64 = 1e-10;
/// Negative eigenvalues above this are tolerated in steady states.
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const RK4_STEP_BUDGET: u64 = 100_000_000;

/// `vec(XρY)` as a 4×4 matrix.
pub fn sandwich(x: &Matrix2c, y: &Matrix2c) -> Matrix4c {
    let mut m = Matrix4c::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(i + 2 * j, k + 2 * l)] = x[(i, k)] * y[(l, j)];
                }
            }
        }
    }
    m
}

pub fn vectorize(rho: &Matrix2c) -> Vector4c {
    Vector4c::new(rho[(0, 0)], rho[(1, 0)], rho[(0, 1)], rho[(1, 1)])
}

pub fn unvectorize(v: &Vector4c) -> Matrix2c {
    Matrix2c::new(v[0], v[2], v[1], v[3])
}

/// Eigenbasis of H_r = δ_r σ†σ + (Ω_r/2)(e^{iφ}σ + e^{−iφ}σ†).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    /// ψ₁ ≤ ψ₂ in ps⁻¹.
    pub eigenvalues: [f64; 2],
    /// Columns are |ψ₁⟩, |ψ₂⟩ in the `{|g⟩, |e⟩}` basis.
    pub eigenvectors: Matrix2c,
    /// Mixing angle atan2(Ω_r, δ_r).
    pub theta: f64,
    pub drive_phase: f64,
}

impl DressedBasis {
    pub fn new(omega_r: f64, delta_r: f64, drive_phase: f64) -> Self {
        let eta = omega_r.hypot(delta_r);
        let theta = omega_r.atan2(delta_r);
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let r = Complex64::from_polar(1.0, -drive_phase);
        let eigenvectors = Matrix2c::new(ONE * c, ONE * s, r * (-s), r * c);
        DressedBasis {
            eigenvalues: [0.5 * (delta_r - eta), 0.5 * (delta_r + eta)],
            eigenvectors,
            theta,
            drive_phase,
        }
    }

    /// λ_jk = ψ_j − ψ_k.
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.eigenvalues[j] - self.eigenvalues[k]
    }

    pub fn gaps(&self) -> [[f64; 2]; 2] {
        [[0.0, self.gap(0, 1)], [self.gap(1, 0), 0.0]]
    }

    /// ⟨ψ_j|A|ψ_k⟩.
    pub fn matrix_elements(&self, a: &Matrix2c) -> Matrix2c {
        self.eigenvectors.adjoint() * a * self.eigenvectors
    }

    pub fn hamiltonian(&self) -> Matrix2c {
        let d = Matrix2c::new(ONE * self.eigenvalues[0], ZERO, ZERO, ONE * self.eigenvalues[1]);
        self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Frame map |e⟩ → e^{−iφ}|e⟩ taking real-drive operators to the lab.
    fn lab_frame(&self, a: &Matrix2c) -> Matrix2c {
        let w = Matrix2c::new(ONE, ZERO, ZERO, Complex64::from_polar(1.0, self.drive_phase));
        w.adjoint() * a * w
    }
}

pub fn dressed_basis(vs: &VariationalSolution, sp: &SystemParams) -> DressedBasis {
    DressedBasis::new(vs.omega_r, vs.delta_r, sp.rabi_phase)
}

/// Phonon dissipator from the second-order expansion in the variational
/// coupling H_I = Σ_i A_i ⊗ B_i with A_x = (Ω/2)σ_x, A_y = (Ω/2)σ_y,
/// A_z = σ†σ:
///
/// K[ρ] = Σ_ij (Â_ij ρ A_i − A_i Â_ij ρ) + h.c.,
/// Â_ij = Σ_mn A_j^{mn} Γ_ij(ψ_n − ψ_m) |ψ_m⟩⟨ψ_n|,
///
/// with Γ_ij(λ) = ∫₀^∞ e^{iλτ} ⟨B_i(τ)B_j⟩ dτ, ⟨B_xB_x⟩ = Λ_xx,
/// ⟨B_yB_y⟩ = Λ_yy, ⟨B_zB_z⟩ = Λ_zz and ⟨B_yB_z⟩ = −⟨B_zB_y⟩ = Λ_yz/2.
pub fn phonon_dissipator(db: &DressedBasis, ctx: &CorrelationContext, sp: &SystemParams) -> Result<Matrix4c> {
    let gap = db.gap(1, 0);
    // Γ at λ = 0, ψ₂ − ψ₁ and ψ₁ − ψ₂.
    let table = ctx.response_table(&[0.0, gap, -gap])?;
    let response = |m: usize, n: usize, kind: usize| -> Complex64 {
        let idx = match (m, n) {
            (0, 1) => 1,
            (1, 0) => 2,
            _ => 0,
        };
        table[idx][kind]
    };

    let half = 0.5 * sp.rabi_magnitude;
    let a = [ops::sigma_x().scale(half), ops::sigma_y().scale(half), ops::excited()];
    // Real-drive frame: the basis vectors without the phase.
    let frame = DressedBasis {
        drive_phase: 0.0,
        eigenvectors: rotate_out(&db.eigenvectors, db.drive_phase),
        ..*db
    };
    let hat = |j: usize, kind: usize, weight: f64| -> Matrix2c {
        let el = frame.matrix_elements(&a[j]);
        let mut d = Matrix2c::zeros();
        for m in 0..2 {
            for n in 0..2 {
                d[(m, n)] = el[(m, n)] * response(m, n, kind) * weight;
            }
        }
        frame.eigenvectors * d * frame.eigenvectors.adjoint()
    };
    // (i, Â_ij) pairs; kinds index [xx, yy, zz, yz].
    let terms = [
        (0, hat(0, 0, 1.0)),
        (1, hat(1, 1, 1.0)),
        (2, hat(2, 2, 1.0)),
        (1, hat(2, 3, 0.5)),
        (2, hat(1, 3, -0.5)),
    ];

    let id = Matrix2c::identity();
    let mut k = Matrix4c::zeros();
    for (i, ah) in terms {
        let ai = db.lab_frame(&a[i]);
        let ah = db.lab_frame(&ah);
        let ahd = ah.adjoint();
        k += sandwich(&ah, &ai) - sandwich(&(ai * ah), &id) + sandwich(&ai, &ahd) - sandwich(&id, &(ahd * ai));
    }
    Ok(k)
}

/// Undo the |e⟩ phase carried by lab-frame eigenvectors.
fn rotate_out(v: &Matrix2c, phase: f64) -> Matrix2c {
    let mut out = *v;
    let r = Complex64::from_polar(1.0, phase);
    out[(1, 0)] *= r;
    out[(1, 1)] *= r;
    out
}

/// −i[H, ·]
pub fn commutator_superop(h: &Matrix2c) -> Matrix4c {
    let id = Matrix2c::identity();
    (sandwich(h, &id) - sandwich(&id, h)) * (-I)
}

/// D[c] = c·c† − ½{c†c, ·}
pub fn lindblad_superop(c: &Matrix2c) -> Matrix4c {
    let id = Matrix2c::identity();
    let cdc = c.adjoint() * c;
    sandwich(c, &c.adjoint()) - (sandwich(&cdc, &id) + sandwich(&id, &cdc)).scale(0.5)
}

/// Generator split into its physical parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub hamiltonian: Matrix4c,
    pub phonon: Matrix4c,
    pub emission: Matrix4c,
    pub dephasing: Matrix4c,
}

impl Liouvillian {
    pub fn total(&self) -> Matrix4c {
        self.hamiltonian + self.phonon + self.emission + self.dephasing
    }

    pub fn apply(&self, rho: &Matrix2c) -> Matrix2c {
        unvectorize(&(self.total() * vectorize(rho)))
    }

    /// Component matrices as `[[re, im], …]` rows.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump {
            convention: &'static str,
            hamiltonian: Vec<Vec<[f64; 2]>>,
            phonon: Vec<Vec<[f64; 2]>>,
            emission: Vec<Vec<[f64; 2]>>,
            dephasing: Vec<Vec<[f64; 2]>>,
        }
        let rows = |m: &Matrix4c| -> Vec<Vec<[f64; 2]>> {
            (0..4).map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
        };
        serde_json::to_value(Dump {
            convention: "column-stacked vec rho = [rho_gg, rho_eg, rho_ge, rho_ee]",
            hamiltonian: rows(&self.hamiltonian),
            phonon: rows(&self.phonon),
            emission: rows(&self.emission),
            dephasing: rows(&self.dephasing),
        })
        .expect("plain numeric structure")
    }
}

/// Builds the generator, computing the bath correlations unless α = 0.
pub fn assemble_liouvillian(
    vs: &VariationalSolution,
    sp: &SystemParams,
    pp: &PhononParams,
    settings: &QuadratureSettings,
) -> Result<Liouvillian> {
    let ctx = if pp.alpha > 0.0 {
        Some(CorrelationContext::new(vs, pp, settings)?)
    } else {
        None
    };
    assemble_with_context(vs, sp, ctx.as_ref())
}

pub fn assemble_with_context(vs: &VariationalSolution, sp: &SystemParams, ctx: Option<&CorrelationContext>) -> Result<Liouvillian> {
    sp.validate()?;
    let db = dressed_basis(vs, sp);
    let phonon = match ctx {
        Some(c) => phonon_dissipator(&db, c, sp)?,
        None => Matrix4c::zeros(),
    };
    Ok(Liouvillian {
        hamiltonian: commutator_superop(&db.hamiltonian()),
        phonon,
        emission: lindblad_superop(&ops::sigma()).scale(sp.emission_rate),
        dephasing: lindblad_superop(&ops::excited()).scale(sp.pure_dephasing_rate),
    })
}

/// Null-space steady state with solve diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub rho: DensityOperator2,
    /// ‖L vec ρ‖₂
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub smallest_singular: f64,
    pub second_singular: f64,
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    null_space_state(&l.total())
}

/// Kernel of an arbitrary generator, reshaped, Hermitised and normalised.
pub fn null_space_state(l: &Matrix4c) -> Result<SteadyState> {
    let svd = l.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|a, b| sv[*a].total_cmp(&sv[*b]));
    let (smallest, second, largest) = (sv[order[0]], sv[order[1]], sv[order[3]]);
    let scale = largest.max(f64::MIN_POSITIVE);
    if !(smallest <= KERNEL_TOL * scale && second > KERNEL_TOL * scale) {
        return Err(Error::DegenerateKernel { smallest, second });
    }
    let v: Vector4c = v_t.row(order[0]).adjoint();
    let trace = v[0] + v[3];
    if trace.norm() < 1e-300 {
        return Err(Error::DegenerateKernel { smallest, second });
    }
    let m = unvectorize(&(v / trace));
    let mut m = (m + m.adjoint()).scale(0.5);
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    m = m.unscale(tr);
    let residual = (l * vectorize(&m)).norm();
    let rho = DensityOperator2::with_positivity_tolerance(m, POSITIVITY_TOL)?;
    Ok(SteadyState {
        rho,
        residual,
        min_eigenvalue: rho.eigenvalues()[0],
        smallest_singular: smallest,
        second_singular: second,
    })
}

/// One classical RK4 step of a linear system as a matrix.
pub fn rk4_propagator(l: &Matrix4c, dt: f64) -> Matrix4c {
    let hl = l.scale(dt);
    let hl2 = hl * hl;
    let hl3 = hl2 * hl;
    let hl4 = hl3 * hl;
    Matrix4c::identity() + hl + hl2.scale(0.5) + hl3.scale(1.0 / 6.0) + hl4.scale(1.0 / 24.0)
}

/// Integrates ρ̇ = L[ρ] with RK4 until ‖L vec ρ‖ < tol. `dt` defaults to
/// 0.1/‖L‖_F and may not exceed it.
pub fn propagate_to_steady_state(l: &Matrix4c, rho0: &DensityOperator2, dt: Option<f64>, tol: f64) -> Result<DensityOperator2> {
    let norm = l.norm();
    let mut v = vectorize(rho0.matrix());
    let mut residual = (l * v).norm();
    if residual < tol {
        return Ok(*rho0);
    }
    let limit = 0.1 / norm;
    let dt = match dt {
        None => limit,
        Some(h) if h > 0.0 && h <= limit * (1.0 + 1e-12) => h,
        Some(_) => return Err(Error::invalid("dt", "must lie in (0, 0.1/|L|]")),
    };
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let step = rk4_propagator(l, dt);
    let mut steps: u64 = 0;
    while residual >= tol {
        if steps >= RK4_STEP_BUDGET {
            return Err(Error::StepBudgetExceeded { steps, residual });
        }
        v = step * v;
        steps += 1;
        residual = (l * v).norm();
    }
    let m = unvectorize(&v);
    let m = (m + m.adjoint()).scale(0.5);
    // Long runs drift in trace by rounding alone.
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    DensityOperator2::with_positivity_tolerance(m.unscale(tr), POSITIVITY_TOL)
}

/// Steady state of one parameter point together with the data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterSolution {
    pub variational: VariationalSolution,
    pub liouvillian: Liouvillian,
    pub steady: SteadyState,
}

/// Variational frame, generator and steady state in one call.
pub fn solve_emitter(sp: &SystemParams, pp: &PhononParams, opts: &VariationalOptions) -> Result<EmitterSolution> {
    let variational = solve_variational(sp, pp, opts)?;
    let liouvillian = assemble_liouvillian(&variational, sp, pp, &opts.quadrature)?;
    let steady = steady_state(&liouvillian)?;
    Ok(EmitterSolution {
        variational,
        liouvillian,
        steady,
    })
}
