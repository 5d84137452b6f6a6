//! Bath correlation functions of the variational frame and their half-line
//! Fourier transforms.
//!
//! With C_∥(τ,ω) = coth(ħβω/2)cos ωτ − i sin ωτ and
//! C_⊥(τ,ω) = coth(ħβω/2)sin ωτ + i cos ωτ:
//!
//! * κ(τ)    = ∫ J F² ω⁻² C_∥
//! * Λ_xx(τ) = (B²/2)(e^κ + e^{−κ} − 2)
//! * Λ_yy(τ) = (B²/2)(e^κ − e^{−κ})
//! * Λ_zz(τ) = ∫ J (1−F)² C_∥
//! * Λ_yz(τ) = −2B ∫ J F(1−F) ω⁻¹ C_⊥
//! * G(τ)    = B² exp[∫ J F² ω⁻² (coth cos ωτ + i sin ωτ)]
//!
//! The six real envelopes under these integrals are held as one
//! [`SpectralExpansion`], so each τ costs a handful of Bessel recurrences.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::{half_fourier_batch, omega_coth, QuadratureSettings, SpectralExpansion, TimeHorizon};
use crate::types::PhononParams;
use crate::variational::VariationalSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Xx,
    Yy,
    Zz,
    Yz,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 4] = [CorrelationKind::Xx, CorrelationKind::Yy, CorrelationKind::Zz, CorrelationKind::Yz];

    fn index(self) -> usize {
        self as usize
    }
}

// Envelope slots.
const QC: usize = 0;
const QS: usize = 1;
const ZC: usize = 2;
const ZS: usize = 3;
const KC: usize = 4;
const KS: usize = 5;

pub struct CorrelationContext {
    solution: VariationalSolution,
    phonons: PhononParams,
    settings: QuadratureSettings,
    envelopes: SpectralExpansion,
    horizon: TimeHorizon,
    memo: Mutex<HashMap<(CorrelationKind, String), Complex64>>,
}

impl std::fmt::Debug for CorrelationContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorrelationContext")
            .field("solution", &self.solution)
            .field("phonons", &self.phonons)
            .field("panels", &self.envelopes.panel_count())
            .field("horizon", &self.horizon)
            .finish()
    }
}

/// Memo key: λ to 12 significant digits, so jitter in eigenvalue gaps
/// below 1e-12 relative lands on the same entry.
fn memo_key(lambda: f64) -> String {
    format!("{:.11e}", lambda)
}

impl CorrelationContext {
    pub fn new(solution: &VariationalSolution, phonons: &PhononParams, settings: &QuadratureSettings) -> Result<Self> {
        phonons.validate()?;
        settings.validate()?;
        let hb = solution.hbar_beta;
        let pp = *phonons;
        let sol = *solution;
        let top = settings.cutoff_multiple * pp.cutoff;
        let mut breaks = Vec::new();
        let mut w = 0.0;
        while w < top {
            breaks.push(w);
            w += 0.25 * pp.cutoff;
        }
        breaks.push(top);
        let envelopes = SpectralExpansion::build(
            6,
            |w, o| {
                let u = w / pp.cutoff;
                let g = pp.alpha * (-u * u).exp();
                let (f, fb) = sol.displacement_pair(w);
                let oc = omega_coth(w, hb);
                o[QC] = g * f * f * oc;
                o[QS] = g * w * f * f;
                o[ZC] = g * w * w * fb * fb * oc;
                o[ZS] = g * w * w * w * fb * fb;
                o[KC] = g * w * f * fb * oc;
                o[KS] = g * w * w * f * fb;
            },
            &breaks,
            settings.rel_tol.min(1e-12),
            0.0,
            100_000,
        )?;

        let mut horizon = settings.horizon(1.0 / pp.cutoff);
        if let Some(w_star) = solution.crossover_frequency() {
            // κ inherits an e^{−ω* τ} tail from the low-frequency onset of F.
            horizon.ceiling = horizon.ceiling.max(64.0 / w_star);
        }
        Ok(CorrelationContext {
            solution: *solution,
            phonons: *phonons,
            settings: *settings,
            envelopes,
            horizon,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn solution(&self) -> &VariationalSolution {
        &self.solution
    }

    pub fn horizon(&self) -> &TimeHorizon {
        &self.horizon
    }

    fn transforms(&self, tau: f64) -> [Complex64; 6] {
        let mut t = [Complex64::new(0.0, 0.0); 6];
        self.envelopes.fourier(tau, &mut t);
        t
    }

    fn kappa_from(t: &[Complex64; 6]) -> Complex64 {
        Complex64::new(t[QC].re, -t[QS].im)
    }

    pub fn kappa(&self, tau: f64) -> Complex64 {
        Self::kappa_from(&self.transforms(tau))
    }

    /// [Λ_xx, Λ_yy, Λ_zz, Λ_yz] at τ.
    pub fn correlations(&self, tau: f64) -> [Complex64; 4] {
        let t = self.transforms(tau);
        let b2 = self.solution.b * self.solution.b;
        let k = Self::kappa_from(&t);
        let (ep, em) = (k.exp(), (-k).exp());
        // e^κ + e^{−κ} − 2 = 4 sinh²(κ/2), exact for small κ.
        let sh = (0.5 * k).sinh();
        let xx = 2.0 * b2 * sh * sh;
        let yy = 0.5 * b2 * (ep - em);
        let zz = Complex64::new(t[ZC].re, -t[ZS].im);
        let kperp = Complex64::new(t[KC].im, t[KS].re);
        let yz = -2.0 * self.solution.b * kperp;
        [xx, yy, zz, yz]
    }

    pub fn lambda_xx(&self, tau: f64) -> Complex64 {
        self.correlations(tau)[0]
    }

    pub fn lambda_yy(&self, tau: f64) -> Complex64 {
        self.correlations(tau)[1]
    }

    pub fn lambda_zz(&self, tau: f64) -> Complex64 {
        self.correlations(tau)[2]
    }

    pub fn lambda_yz(&self, tau: f64) -> Complex64 {
        self.correlations(tau)[3]
    }

    pub fn sideband_g(&self, tau: f64) -> Complex64 {
        let t = self.transforms(tau);
        let b2 = self.solution.b * self.solution.b;
        b2 * Complex64::new(t[QC].re, t[QS].im).exp()
    }

    /// ∫₀^∞ e^{iλτ} Λ_kind(τ) dτ, memoised per (kind, λ).
    pub fn response_coefficient(&self, kind: CorrelationKind, lambda: f64) -> Result<Complex64> {
        Ok(self.response_table(&[lambda])?[0][kind.index()])
    }

    /// Response coefficients of all four kinds at each λ. Frequencies missing
    /// from the memo are computed together on shared τ samples.
    pub fn response_table(&self, lambdas: &[f64]) -> Result<Vec<[Complex64; 4]>> {
        let missing: Vec<f64> = {
            let memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
            let mut m: Vec<f64> = Vec::new();
            for &l in lambdas {
                let key = memo_key(l);
                if !memo.contains_key(&(CorrelationKind::Xx, key.clone())) && !m.iter().any(|x| memo_key(*x) == key) {
                    m.push(l);
                }
            }
            m
        };
        if !missing.is_empty() {
            let values = self.compute(&missing)?;
            let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
            for (i, l) in missing.iter().enumerate() {
                for kind in CorrelationKind::ALL {
                    // First writer wins, so every reader sees one value per key.
                    memo.entry((kind, memo_key(*l))).or_insert(values[i * 4 + kind.index()]);
                }
            }
        }
        let memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        Ok(lambdas
            .iter()
            .map(|l| {
                let key = memo_key(*l);
                CorrelationKind::ALL.map(|k| memo[&(k, key.clone())])
            })
            .collect())
    }

    /// Uncached half-line transforms, index `l·4 + kind`.
    pub fn compute(&self, lambdas: &[f64]) -> Result<Vec<Complex64>> {
        half_fourier_batch(
            4,
            |t, out| out.copy_from_slice(&self.correlations(t)),
            lambdas,
            &self.horizon,
            &self.settings,
        )
    }
}
