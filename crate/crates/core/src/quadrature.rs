//! Spectral density and the integration machinery behind every bath integral.
//!
//! Frequency integrals run on `[0, m·ω_c]` with global adaptive
//! Gauss–Legendre bisection. [`SpectralExpansion`] stores smooth functions as
//! piecewise Legendre series whose Fourier integrals are known in closed
//! form; it carries both the frequency envelopes of the bath correlations
//! (transformed to τ) and the half-line τ integrals (transformed to λ), the
//! latter over a horizon that doubles until the integrand has decayed.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::PhononParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Frequency integrals stop at `cutoff_multiple · ω_c`.
    pub cutoff_multiple: f64,
    /// First time-domain block, in units of the caller's time scale.
    pub horizon_start: f64,
    /// Largest admissible τ_max, in units of the caller's time scale.
    pub horizon_ceiling: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            cutoff_multiple: 12.0,
            horizon_start: 16.0,
            horizon_ceiling: 1e4,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("abs_tol", "must be > 0"));
        }
        if !(self.cutoff_multiple >= 6.0 && self.cutoff_multiple.is_finite()) {
            return Err(Error::invalid("cutoff_multiple", "must be >= 6"));
        }
        if !(self.horizon_start > 0.0 && self.horizon_ceiling >= self.horizon_start) {
            return Err(Error::invalid("horizon", "need 0 < horizon_start <= horizon_ceiling"));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::invalid("max_subdivisions", "must be >= 16"));
        }
        Ok(())
    }

    /// Time horizon for correlations whose natural time scale is `scale`.
    pub fn horizon(&self, scale: f64) -> TimeHorizon {
        TimeHorizon {
            scale,
            start: self.horizon_start * scale,
            ceiling: self.horizon_ceiling * scale,
        }
    }
}

/// τ-domain integration window for [`half_fourier`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeHorizon {
    /// Shortest feature expected in the integrand; sets the first panel width.
    pub scale: f64,
    pub start: f64,
    pub ceiling: f64,
}

/// J(ω) = α ω³ exp(−ω²/ω_c²).
pub fn spectral_density(omega: f64, p: &PhononParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::invalid("omega", "spectral density needs omega >= 0"));
    }
    Ok(spectral_density_unchecked(omega, p))
}

#[inline]
pub(crate) fn spectral_density_unchecked(omega: f64, p: &PhononParams) -> f64 {
    let u = omega / p.cutoff;
    p.alpha * omega * omega * omega * (-u * u).exp()
}

/// ω·coth(ħβω/2), the regular combination in which coth always appears.
/// Tends to 2/(ħβ) as ω → 0; the series branch avoids 0/0 there.
#[inline]
pub fn omega_coth(omega: f64, hbar_beta: f64) -> f64 {
    let x = 0.5 * hbar_beta * omega;
    if x < 1e-4 {
        let x2 = x * x;
        (2.0 / hbar_beta) * (1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        omega / x.tanh()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

const RULE_POINTS: usize = 10;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RULE_POINTS))
}

fn apply_rule(a: f64, b: f64, dim: usize, f: &mut dyn FnMut(f64, &mut [f64]), buf: &mut [f64]) -> Vec<f64> {
    let (x, w) = rule();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = vec![0.0; dim];
    for (xi, wi) in x.iter().zip(w) {
        f(c + r * xi, buf);
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += wi * r * v;
        }
    }
    acc
}

struct Panel {
    a: f64,
    b: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    err: f64,
}

impl Panel {
    fn new(a: f64, b: f64, coarse: Vec<f64>, dim: usize, f: &mut dyn FnMut(f64, &mut [f64]), buf: &mut [f64]) -> Panel {
        let m = 0.5 * (a + b);
        let left = apply_rule(a, m, dim, f, buf);
        let right = apply_rule(m, b, dim, f, buf);
        let err = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| (c - l - r).abs())
            .fold(0.0, f64::max);
        Panel {
            a,
            b,
            left,
            right,
            err,
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken by position so the bisection order is deterministic.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Global adaptive integration of a `dim`-vector integrand over the
/// partition `breaks`. Converged when the summed error estimate is below
/// `max(abs_tol, rel_tol·‖I‖∞)`.
pub fn integrate_adaptive(
    breaks: &[f64],
    dim: usize,
    f: &mut dyn FnMut(f64, &mut [f64]),
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let coarse = apply_rule(w[0], w[1], dim, f, &mut buf);
            heap.push(Panel::new(w[0], w[1], coarse, dim, f, &mut buf));
        }
    }
    let mut count = heap.len();
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for k in 0..dim {
                total[k] += p.left[k] + p.right[k];
            }
            err += p.err;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok(total);
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(total),
        };
        let m = 0.5 * (worst.a + worst.b);
        if count >= max_subdivisions || !(m > worst.a && m < worst.b) {
            return Err(Error::QuadratureNonConvergence {
                estimate: scale,
                error_bound: err,
            });
        }
        heap.push(Panel::new(worst.a, m, worst.left, dim, f, &mut buf));
        heap.push(Panel::new(m, worst.b, worst.right, dim, f, &mut buf));
        count += 1;
    }
}

fn frequency_breaks(cutoff: f64, s: &QuadratureSettings) -> Vec<f64> {
    let top = s.cutoff_multiple * cutoff;
    let mut b = vec![0.0];
    // Geometric grading towards ω = 0 where low-frequency structure lives.
    let mut x = 0.5 * cutoff / 1024.0;
    while x < 0.5 * cutoff {
        b.push(x);
        x *= 2.0;
    }
    let mut x = 0.5 * cutoff;
    while x < top - 1e-12 * top {
        b.push(x);
        x += 0.5 * cutoff;
    }
    b.push(top);
    b
}

/// ∫₀^{m·ω_c} f(ω) dω for a complex integrand.
pub fn integrate_frequency(
    f: impl Fn(f64) -> Complex64,
    cutoff: f64,
    s: &QuadratureSettings,
) -> Result<Complex64> {
    let v = integrate_frequency_vec(
        2,
        |w, out| {
            let z = f(w);
            out[0] = z.re;
            out[1] = z.im;
        },
        cutoff,
        s,
    )?;
    Ok(Complex64::new(v[0], v[1]))
}

/// Real vector-valued frequency integral; `f(ω, out)` fills `dim` values.
pub fn integrate_frequency_vec(
    dim: usize,
    mut f: impl FnMut(f64, &mut [f64]),
    cutoff: f64,
    s: &QuadratureSettings,
) -> Result<Vec<f64>> {
    integrate_adaptive(
        &frequency_breaks(cutoff, s),
        dim,
        &mut f,
        s.rel_tol,
        s.abs_tol,
        s.max_subdivisions,
    )
}

/// ∫₀^∞ e^{iλτ} Λ(τ) dτ.
pub fn half_fourier(
    f: impl Fn(f64) -> Complex64,
    lambda: f64,
    horizon: &TimeHorizon,
    s: &QuadratureSettings,
) -> Result<Complex64> {
    let v = half_fourier_batch(1, |t, out| out[0] = f(t), &[lambda], horizon, s)?;
    Ok(v[0])
}

/// Half-line Fourier integrals of `dim` correlation functions at several
/// frequencies. Each τ block is fitted by piecewise Legendre series and the
/// factor e^{iλτ} is integrated exactly against them, so panel widths follow
/// the smoothness of Λ alone and every λ shares the same samples.
/// Result index is `l·dim + k`.
pub fn half_fourier_batch(
    dim: usize,
    mut f: impl FnMut(f64, &mut [Complex64]),
    lambdas: &[f64],
    horizon: &TimeHorizon,
    s: &QuadratureSettings,
) -> Result<Vec<Complex64>> {
    let nl = lambdas.len();
    let mut vals = vec![Complex64::new(0.0, 0.0); dim];
    let mut real = |t: f64, out: &mut [f64]| {
        f(t, &mut vals);
        for (k, z) in vals.iter().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
    };
    let mut total = vec![Complex64::new(0.0, 0.0); nl * dim];
    let mut mass = 0.0f64;
    let mut moments = vec![Complex64::new(0.0, 0.0); 2 * dim];
    let mut probe = vec![0.0; 2 * dim];
    let mut lo = 0.0;
    let mut hi = horizon.start.min(horizon.ceiling);
    loop {
        let mut breaks = vec![lo];
        let mut t = lo;
        while t < hi {
            t = (t + (0.5 * t).max(0.25 * horizon.scale)).min(hi);
            breaks.push(t);
        }
        let block = SpectralExpansion::build(
            2 * dim,
            &mut real,
            &breaks,
            s.rel_tol,
            s.abs_tol.max(s.rel_tol * mass),
            s.max_subdivisions,
        )?;
        mass += block.absolute_mass().iter().fold(0.0f64, |m, v| m.max(*v));
        let mut change = 0.0f64;
        for (l, lam) in lambdas.iter().enumerate() {
            block.fourier(*lam, &mut moments);
            for k in 0..dim {
                let z = moments[2 * k] + Complex64::i() * moments[2 * k + 1];
                total[l * dim + k] += z;
                change = change.max(z.norm());
            }
        }
        let scale = total.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        real(hi, &mut probe);
        let tail = probe
            .chunks_exact(2)
            .fold(0.0f64, |m, z| m.max(z[0].hypot(z[1])));
        // The first block is never judged on its own: doubling must be seen
        // to change nothing before the horizon is accepted.
        if lo > 0.0 && tail < s.abs_tol && change <= s.rel_tol * scale + s.abs_tol {
            return Ok(total);
        }
        if hi >= horizon.ceiling {
            return Err(Error::NotDecayed {
                tau_max: hi,
                magnitude: tail.max(change),
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(horizon.ceiling);
    }
}

/// Spherical Bessel functions j_0(μ) … j_{n−1}(μ) for μ ≥ 0.
pub fn spherical_bessel(mu: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    if mu == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if mu < 0.5 {
        let h = -0.5 * mu * mu;
        let mut lead = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= mu / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..30 {
                term *= h / (m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
        return;
    }
    let (sn, cs) = mu.sin_cos();
    let j0 = sn / mu;
    let j1 = sn / (mu * mu) - cs / mu;
    if mu > n as f64 + 2.0 {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2 * k + 1) as f64 / mu * out[k] - out[k - 1];
        }
        return;
    }
    // Miller's backward recurrence, normalised on whichever of j_0, j_1 is
    // further from a zero.
    let start = n.max(mu.ceil() as usize) + 40;
    let (mut fp1, mut fk) = (0.0f64, 1e-200f64);
    for k in (1..=start).rev() {
        let fm1 = (2 * k + 1) as f64 / mu * fk - fp1;
        fp1 = fk;
        fk = fm1;
        if k - 1 < n {
            out[k - 1] = fk;
        }
        if fk.abs() > 1e200 {
            fk *= 1e-200;
            fp1 *= 1e-200;
            for o in out.iter_mut().skip(k - 1) {
                *o *= 1e-200;
            }
        }
    }
    let norm = if j0.abs() >= j1.abs() || n < 2 {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for o in out.iter_mut() {
        *o *= norm;
    }
}

const EXPANSION_ORDER: usize = 24;

struct LegendreBasis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// analysis[k][j] = (2k+1)/2 · w_j · P_k(x_j)
    analysis: Vec<Vec<f64>>,
}

fn legendre_basis() -> &'static LegendreBasis {
    static BASIS: OnceLock<LegendreBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(EXPANSION_ORDER);
        let mut analysis = vec![vec![0.0; EXPANSION_ORDER]; EXPANSION_ORDER];
        for (j, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
            let (mut p0, mut p1) = (1.0, x);
            for (k, row) in analysis.iter_mut().enumerate() {
                let pk = match k {
                    0 => 1.0,
                    1 => x,
                    _ => {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                        p2
                    }
                };
                row[j] = 0.5 * (2 * k + 1) as f64 * w * pk;
            }
        }
        LegendreBasis { nodes, weights, analysis }
    })
}

#[derive(Debug, Clone)]
struct ExpansionPanel {
    center: f64,
    half_width: f64,
    /// coeffs[m·ORDER + k]
    coeffs: Vec<f64>,
}

/// Piecewise Legendre representation of `dim` real functions h_m(x) on an
/// interval, giving ∫ h_m(x) e^{iyx} dx for any y in closed form through
/// ∫₋₁¹ P_k(u) e^{iμu} du = 2 i^k j_k(μ).
#[derive(Debug, Clone)]
pub struct SpectralExpansion {
    dim: usize,
    panels: Vec<ExpansionPanel>,
    mass: Vec<f64>,
}

impl SpectralExpansion {
    /// Fits `h` starting from the partition `breaks`, bisecting panels until
    /// the trailing Legendre coefficients of every component fall below
    /// `(rel_tol·∫|h_m| + abs_tol)` prorated by panel width.
    pub fn build(
        dim: usize,
        mut h: impl FnMut(f64, &mut [f64]),
        breaks: &[f64],
        rel_tol: f64,
        abs_tol: f64,
        max_panels: usize,
    ) -> Result<Self> {
        let basis = legendre_basis();
        let mut buf = vec![0.0; dim];
        let mut fit = |a: f64, b: f64| -> (ExpansionPanel, Vec<f64>, Vec<f64>) {
            let center = 0.5 * (a + b);
            let half_width = 0.5 * (b - a);
            let mut samples = vec![0.0; dim * EXPANSION_ORDER];
            for (j, x) in basis.nodes.iter().enumerate() {
                h(center + half_width * x, &mut buf);
                for m in 0..dim {
                    samples[m * EXPANSION_ORDER + j] = buf[m];
                }
            }
            let mut coeffs = vec![0.0; dim * EXPANSION_ORDER];
            let mut tail = vec![0.0; dim];
            let mut mass = vec![0.0; dim];
            for m in 0..dim {
                let s = &samples[m * EXPANSION_ORDER..(m + 1) * EXPANSION_ORDER];
                let peak = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for k in 0..EXPANSION_ORDER {
                    coeffs[m * EXPANSION_ORDER + k] = basis.analysis[k].iter().zip(s).map(|(a, v)| a * v).sum();
                }
                let c = &coeffs[m * EXPANSION_ORDER..(m + 1) * EXPANSION_ORDER];
                // Coefficients cannot resolve below the rounding noise of the samples.
                let noise = 64.0 * f64::EPSILON * peak;
                tail[m] = 2.0 * half_width * (c[EXPANSION_ORDER - 3..].iter().map(|v| v.abs()).sum::<f64>() - noise).max(0.0);
                mass[m] = half_width * s.iter().zip(&basis.weights).map(|(v, w)| w * v.abs()).sum::<f64>();
            }
            (
                ExpansionPanel {
                    center,
                    half_width,
                    coeffs,
                },
                tail,
                mass,
            )
        };

        let width = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
        let mut work = Vec::new();
        let mut scale = vec![0.0; dim];
        for w in breaks.windows(2).rev() {
            if w[1] > w[0] {
                let (p, tail, mass) = fit(w[0], w[1]);
                for m in 0..dim {
                    scale[m] += mass[m];
                }
                work.push((p, tail));
            }
        }

        let mut done = Vec::new();
        while let Some((p, tail)) = work.pop() {
            let share = 2.0 * p.half_width / width;
            let ok = (0..dim).all(|m| tail[m] <= (rel_tol * scale[m] + abs_tol) * share);
            if ok || p.half_width < 1e-12 * width {
                done.push(p);
                continue;
            }
            if done.len() + work.len() + 2 > max_panels {
                return Err(Error::QuadratureNonConvergence {
                    estimate: scale.iter().fold(0.0, |x, y| x.max(*y)),
                    error_bound: tail.iter().fold(0.0, |x, y| x.max(*y)),
                });
            }
            let a = p.center - p.half_width;
            let b = p.center + p.half_width;
            let (l, lt, _) = fit(a, p.center);
            let (r, rt, _) = fit(p.center, b);
            work.push((r, rt));
            work.push((l, lt));
        }
        done.sort_by(|a, b| a.center.total_cmp(&b.center));
        let mut mass = vec![0.0; dim];
        for p in &done {
            for m in 0..dim {
                let c = &p.coeffs[m * EXPANSION_ORDER..(m + 1) * EXPANSION_ORDER];
                mass[m] += 2.0 * p.half_width * c[0].abs();
            }
        }
        for m in 0..dim {
            mass[m] = mass[m].max(scale[m]);
        }
        Ok(SpectralExpansion {
            dim,
            panels: done,
            mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Estimate of ∫|h_m|, used to scale tolerances.
    pub fn absolute_mass(&self) -> &[f64] {
        &self.mass
    }

    /// out[m] = ∫ h_m(x) e^{iyx} dx.
    pub fn fourier(&self, y: f64, out: &mut [Complex64]) {
        let mut jk = [0.0; EXPANSION_ORDER];
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for p in &self.panels {
            spherical_bessel((p.half_width * y).abs(), &mut jk);
            if y < 0.0 {
                for j in jk.iter_mut().skip(1).step_by(2) {
                    *j = -*j;
                }
            }
            let ph = Complex64::from_polar(2.0 * p.half_width, p.center * y);
            for (m, o) in out.iter_mut().enumerate() {
                let c = &p.coeffs[m * EXPANSION_ORDER..(m + 1) * EXPANSION_ORDER];
                let (mut e, mut od) = (0.0, 0.0);
                for k in (0..EXPANSION_ORDER).step_by(4) {
                    e += c[k] * jk[k] - c[k + 2] * jk[k + 2];
                    od += c[k + 1] * jk[k + 1] - c[k + 3] * jk[k + 3];
                }
                *o += ph * Complex64::new(e, od);
            }
        }
    }

    /// out[m] = ∫ h_m(x) dx.
    pub fn integral(&self, out: &mut [f64]) {
        out.fill(0.0);
        for p in &self.panels {
            for (m, o) in out.iter_mut().enumerate() {
                *o += 2.0 * p.half_width * p.coeffs[m * EXPANSION_ORDER];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn qd() -> PhononParams {
        PhononParams::quantum_dot()
    }

    #[test]
    fn spectral_density_values() {
        assert_eq!(spectral_density(0.0, &qd()).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(2.2, &qd()).unwrap(), 0.027 * 2.2f64.powi(3) / 1f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(spectral_density(2.2, &qd()).unwrap(), 0.10576, epsilon = 5e-6);
        assert!(spectral_density(-1.0, &qd()).is_err());
    }

    #[test]
    fn spectral_density_peak() {
        let p = qd();
        let peak = (1.5f64).sqrt() * p.cutoff;
        let j = |w: f64| spectral_density(w, &p).unwrap();
        for d in [1e-3, 1e-2, 1e-1] {
            assert!(j(peak) > j(peak + d) && j(peak) > j(peak - d));
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let m18: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert_abs_diff_eq!(m18, 2.0 / 19.0, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        let p = qd();
        let s = QuadratureSettings::default();
        let m1 = integrate_frequency(|w| Complex64::from(spectral_density_unchecked(w, &p) / w), p.cutoff, &s).unwrap();
        assert_relative_eq!(m1.re, p.alpha * PI.sqrt() / 4.0 * p.cutoff.powi(3), max_relative = 1e-9);
        // Quoted to five figures as 0.12741; the closed form gives 0.127393.
        assert_abs_diff_eq!(m1.re, 0.12741, epsilon = 2e-5);
        let m2 = integrate_frequency(|w| Complex64::from(spectral_density_unchecked(w, &p) / (w * w)), p.cutoff, &s).unwrap();
        assert_relative_eq!(m2.re, p.alpha * p.cutoff.powi(2) / 2.0, max_relative = 1e-9);
        assert_abs_diff_eq!(m2.re, 0.065340, epsilon = 1e-6);
        let z = integrate_frequency(|_| Complex64::new(0.0, 0.0), p.cutoff, &s).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn omega_coth_is_continuous_at_series_switch() {
        let hb = 1.909558;
        let x = 1e-4;
        let w = 2.0 * x / hb;
        let below = omega_coth(w * (1.0 - 1e-9), hb);
        let above = omega_coth(w * (1.0 + 1e-9), hb);
        assert_relative_eq!(below, above, max_relative = 1e-12);
        assert_relative_eq!(omega_coth(0.0, hb), 2.0 / hb);
    }

    #[test]
    fn half_fourier_analytic_cases() {
        let s = QuadratureSettings::default();
        let h = s.horizon(1.0);
        let a = half_fourier(|t| Complex64::from((-t).exp()), 0.0, &h, &s).unwrap();
        assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        let b = half_fourier(|t| Complex64::from((-t).exp()), 1.0, &h, &s).unwrap();
        assert_abs_diff_eq!(b.re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(b.im, 0.5, epsilon = 1e-10);
        let c = half_fourier(|t| Complex64::from((-t * t).exp()), 0.0, &h, &s).unwrap();
        assert_abs_diff_eq!(c.re, 0.886_226_925_452_758, epsilon = 1e-10);
    }

    #[test]
    fn half_fourier_reports_slow_decay() {
        let s = QuadratureSettings::default();
        let h = s.horizon(1.0);
        let r = half_fourier(|t| Complex64::from(1.0 / (1.0 + t)), 0.0, &h, &s);
        assert!(matches!(r, Err(Error::NotDecayed { .. })));
    }

    #[test]
    fn spherical_bessel_reference_values() {
        let cases = [
            (0, 1.0, 0.8414709848078965),
            (1, 1.0, 0.3011686789397571),
            (2, 1.0, 0.062035052011373916),
            (5, 10.0, -0.05553451162145216),
            (23, 3.0, 7.200278505566309e-20),
            (10, 0.3, 4.2862929705601055e-16),
            (7, 57.5, 0.002296914691044049),
            (23, 150.0, 0.003353500080168276),
            (0, 1e-3, 0.9999998333333416),
            (3, 22.0, -0.04393494456577372),
        ];
        let mut out = [0.0; 24];
        for (k, mu, expected) in cases {
            spherical_bessel(mu, &mut out);
            assert_relative_eq!(out[k], expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn expansion_transform_matches_gaussian() {
        // ∫₀^∞ e^{−ω²} e^{iωτ} dω has real part (√π/2) e^{−τ²/4}.
        let breaks: Vec<f64> = (0..=24).map(|i| 0.5 * i as f64).collect();
        let e = SpectralExpansion::build(1, |w, o| o[0] = (-w * w).exp(), &breaks, 1e-13, 0.0, 2000).unwrap();
        let mut out = [Complex64::new(0.0, 0.0)];
        for tau in [0.0, 0.5, 3.0, 7.0] {
            e.fourier(tau, &mut out);
            assert_abs_diff_eq!(out[0].re, 0.5 * PI.sqrt() * (-tau * tau / 4.0).exp(), epsilon = 1e-12);
        }
        // Imaginary part at τ = 1 against direct quadrature.
        let s = QuadratureSettings { rel_tol: 1e-13, abs_tol: 1e-15, ..Default::default() };
        let direct = integrate_frequency(|w| Complex64::from((-w * w).exp() * w.sin()), 1.0, &s).unwrap();
        e.fourier(1.0, &mut out);
        assert_abs_diff_eq!(out[0].im, direct.re, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn spectral_density_linear_in_alpha(w in 0.0f64..30.0, a in 0.0f64..1.0) {
            let p1 = PhononParams { alpha: a, ..qd() };
            let p2 = PhononParams { alpha: 2.0 * a, ..qd() };
            prop_assert_eq!(spectral_density(w, &p2).unwrap(), 2.0 * spectral_density(w, &p1).unwrap());
        }

        #[test]
        fn half_fourier_conjugate_symmetry(lam in 0.0f64..5.0, rate in 0.3f64..3.0, w0 in 0.0f64..4.0) {
            let s = QuadratureSettings::default();
            let h = s.horizon(1.0);
            let g = |t: f64| Complex64::from((-rate * t).exp() * (w0 * t).cos());
            let plus = half_fourier(g, lam, &h, &s).unwrap();
            let minus = half_fourier(g, -lam, &h, &s).unwrap();
            prop_assert!((plus - minus.conj()).norm() < 1e-9);
        }
    }
}
