//! Point evaluation and deterministic parallel sweeps over configuration
//! grids, with CSV and JSON emission.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::atomic::{atomic_density, thermal_bloch};
use crate::config::{matched_squeeze, wrap_phase, Format, Model, Parameter, PointInputs, SweepConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::master::solve_emitter;
use crate::metrology::{figure_of_merit, sv_optimal, InputState, InterferometerInput};
use crate::observables::{observables, wigner, ObservableSet, WignerField, WignerGrid};
use crate::types::{density_from_bloch, DensityOperator2};
use crate::units::{d_from_detuning, s_from_rabi};
use crate::variational::{solve_variational, VariationalSolution};

/// Version of the tabular column layout.
pub const CSV_SCHEMA_VERSION: u32 = 1;

const INPUT_COLUMNS: [&str; 11] = [
    "s",
    "d",
    "saturation",
    "rabi",
    "detuning",
    "drive_phase",
    "emission_rate",
    "dephasing_rate",
    "alpha",
    "cutoff",
    "temperature",
];
const VARIATIONAL_COLUMNS: [&str; 8] = [
    "omega_r",
    "delta_r",
    "b",
    "eta_r",
    "polaron_shift",
    "free_energy_bound",
    "iterations",
    "converged",
];
const OBSERVABLE_COLUMNS: [&str; 10] = [
    "population",
    "coherent_power",
    "incoherent_power",
    "min_variance",
    "dipole_phase",
    "bloch_length",
    "bloch_polar",
    "purity",
    "heisenberg_lhs",
    "heisenberg_rhs",
];
const METROLOGY_COLUMNS: [&str; 7] = [
    "reference_power",
    "reference_phase",
    "f_rf",
    "f_coherent",
    "sv_squeeze",
    "f_sv_matched",
    "f_sv_optimal",
];
const RESIDUAL_COLUMNS: [&str; 3] = ["steady_residual", "variational_residual", "min_eigenvalue"];

/// Column names for a sweep over `axes`, in emission order.
pub fn columns(axes: &[Parameter]) -> Vec<String> {
    let mut c: Vec<String> = axes.iter().map(|p| format!("axis_{}", p.name())).collect();
    c.push("model".into());
    for group in [&INPUT_COLUMNS[..], &VARIATIONAL_COLUMNS, &OBSERVABLE_COLUMNS, &METROLOGY_COLUMNS, &RESIDUAL_COLUMNS] {
        c.extend(group.iter().map(|s| s.to_string()));
    }
    c.push("error_code".into());
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputSummary {
    pub s: f64,
    pub d: f64,
    pub saturation: f64,
    /// |Ω| in ps⁻¹.
    pub rabi: f64,
    pub detuning: f64,
    pub drive_phase: f64,
    pub emission_rate: f64,
    pub dephasing_rate: f64,
    pub alpha: f64,
    pub cutoff: f64,
    pub temperature: f64,
}

impl InputSummary {
    fn new(p: &PointInputs) -> Self {
        let sp = &p.system;
        let s = s_from_rabi(sp.rabi_magnitude, sp.emission_rate);
        let d = d_from_detuning(sp.detuning, sp.emission_rate);
        InputSummary {
            s,
            d,
            saturation: s / (1.0 + d),
            rabi: sp.rabi_magnitude,
            detuning: sp.detuning,
            drive_phase: sp.rabi_phase,
            emission_rate: sp.emission_rate,
            dephasing_rate: sp.pure_dephasing_rate,
            alpha: p.phonons.alpha,
            cutoff: p.phonons.cutoff,
            temperature: p.phonons.temperature,
        }
    }

    fn cells(&self) -> Vec<Option<f64>> {
        vec![
            Some(self.s),
            Some(self.d),
            Some(self.saturation),
            Some(self.rabi),
            Some(self.detuning),
            Some(self.drive_phase),
            Some(self.emission_rate),
            Some(self.dephasing_rate),
            Some(self.alpha),
            Some(self.cutoff),
            Some(self.temperature),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetrologySummary {
    pub reference_power: f64,
    /// φ_α, aligned with the dipole phase.
    pub reference_phase: f64,
    pub f_rf: f64,
    /// Coherent light of equal flux; 1 by construction.
    pub f_coherent: f64,
    pub sv_squeeze: Option<f64>,
    pub f_sv_matched: Option<f64>,
    pub f_sv_optimal: Option<f64>,
}

/// One flat output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub axes: Vec<(Parameter, f64)>,
    pub model: Model,
    pub inputs: Option<InputSummary>,
    pub variational: Option<VariationalSolution>,
    pub observables: Option<ObservableSet>,
    pub purity: Option<f64>,
    pub metrology: Option<MetrologySummary>,
    pub steady_residual: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    /// Steady state the observables were computed from.
    #[serde(skip)]
    pub state: Option<DensityOperator2>,
    pub error_code: Option<&'static str>,
    pub error_message: Option<String>,
}

impl PointRecord {
    fn empty(axes: Vec<(Parameter, f64)>, model: Model) -> Self {
        PointRecord {
            axes,
            model,
            inputs: None,
            variational: None,
            observables: None,
            purity: None,
            metrology: None,
            steady_residual: None,
            min_eigenvalue: None,
            state: None,
            error_code: None,
            error_message: None,
        }
    }

    pub fn is_error(&self) -> bool {
        self.error_code.is_some()
    }

    fn numeric_cells(&self) -> Vec<Option<f64>> {
        let mut c = match &self.inputs {
            Some(i) => i.cells(),
            None => vec![None; INPUT_COLUMNS.len()],
        };
        match &self.variational {
            Some(v) => c.extend([
                Some(v.omega_r),
                Some(v.delta_r),
                Some(v.b),
                Some(v.eta_r),
                Some(v.polaron_shift),
                Some(v.free_energy_bound),
                Some(v.iterations as f64),
                Some(if v.converged { 1.0 } else { 0.0 }),
            ]),
            None => c.extend([None; VARIATIONAL_COLUMNS.len()]),
        }
        match &self.observables {
            Some(o) => c.extend([
                Some(o.population),
                Some(o.coherent_power),
                Some(o.incoherent_power),
                Some(o.min_variance),
                Some(o.dipole_phase),
                Some(o.bloch_length),
                Some(o.bloch_polar),
                self.purity,
                Some(o.heisenberg_lhs),
                Some(o.heisenberg_rhs),
            ]),
            None => c.extend([None; OBSERVABLE_COLUMNS.len()]),
        }
        match &self.metrology {
            Some(m) => c.extend([
                Some(m.reference_power),
                Some(m.reference_phase),
                Some(m.f_rf),
                Some(m.f_coherent),
                m.sv_squeeze,
                m.f_sv_matched,
                m.f_sv_optimal,
            ]),
            None => c.extend([None; METROLOGY_COLUMNS.len()]),
        }
        c.extend([
            self.steady_residual,
            self.variational.map(|v| v.residual),
            self.min_eigenvalue,
        ]);
        c
    }

    /// Cells as text, floats in scientific notation with `precision` digits.
    pub fn cells(&self, precision: usize) -> Vec<String> {
        let mut out: Vec<String> = self.axes.iter().map(|(_, v)| fmt_float(*v, precision)).collect();
        out.push(self.model.name().into());
        for v in self.numeric_cells() {
            out.push(v.map(|v| fmt_float(v, precision)).unwrap_or_default());
        }
        out.push(self.error_code.unwrap_or("").into());
        out
    }

    fn json_cells(&self, precision: usize) -> Vec<Value> {
        let num = |v: f64| {
            let rounded: f64 = fmt_float(v, precision).parse().unwrap_or(v);
            serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
        };
        let mut out: Vec<Value> = self.axes.iter().map(|(_, v)| num(*v)).collect();
        out.push(Value::String(self.model.name().into()));
        for v in self.numeric_cells() {
            out.push(v.map(num).unwrap_or(Value::Null));
        }
        out.push(self.error_code.map(|c| Value::String(c.into())).unwrap_or(Value::Null));
        out
    }
}

fn fmt_float(v: f64, precision: usize) -> String {
    if v.is_finite() {
        format!("{v:.precision$e}")
    } else {
        format!("{v}")
    }
}

/// Evaluates one model at resolved inputs. Solver failures land in the
/// record's error fields.
pub fn run_point(inputs: &PointInputs, model: Model, axes: Vec<(Parameter, f64)>) -> PointRecord {
    let mut rec = PointRecord::empty(axes, model);
    rec.inputs = Some(InputSummary::new(inputs));
    if let Err(e) = evaluate(inputs, model, &mut rec) {
        rec.error_code = Some(e.code());
        rec.error_message = Some(e.to_string());
    }
    rec
}

fn evaluate(inputs: &PointInputs, model: Model, rec: &mut PointRecord) -> Result<()> {
    let sp = &inputs.system;
    let pp = &inputs.phonons;
    let (rho, b) = match model {
        Model::Atomic => {
            let rho = atomic_density(sp)?;
            (rho, 1.0)
        }
        Model::FullPhonon => {
            let sol = solve_emitter(sp, pp, &inputs.options)?;
            rec.variational = Some(sol.variational);
            rec.steady_residual = Some(sol.steady.residual);
            rec.min_eigenvalue = Some(sol.steady.min_eigenvalue);
            (sol.steady.rho, sol.variational.b)
        }
        Model::ThermalApprox => {
            let vs = solve_variational(sp, pp, &inputs.options)?;
            rec.variational = Some(vs);
            let rabi_r = Complex64::from_polar(vs.omega_r, sp.rabi_phase);
            let rho = density_from_bloch(&thermal_bloch(rabi_r, vs.delta_r, vs.hbar_beta)?)?;
            (rho, vs.b)
        }
    };
    let b = if inputs.include_sideband_b2 { b } else { 1.0 };
    rec.min_eigenvalue.get_or_insert(rho.eigenvalues()[0]);
    let obs = observables(&rho, b)?;
    rec.purity = Some((rho.matrix() * rho.matrix()).trace().re);
    rec.observables = Some(obs);
    rec.state = Some(rho);
    if let Some(pa) = inputs.reference_power {
        rec.metrology = Some(metrology_summary(&obs, b, pa, inputs.squeezed_vacuum)?);
    }
    Ok(())
}

fn metrology_summary(obs: &ObservableSet, b: f64, pa: f64, with_sv: bool) -> Result<MetrologySummary> {
    // cos²(φ_α − φ) = 1 minimises the resonance-fluorescence variance.
    let phase = obs.dipole_phase;
    let f_rf = figure_of_merit(&InterferometerInput::from_observables(obs, b, pa, phase)?)?;
    let f_coherent = figure_of_merit(&InterferometerInput::new(
        InputState::Coherent {
            power: obs.population,
        },
        pa,
        phase,
        PI / 2.0,
    )?)?;
    let (sv_squeeze, f_sv_matched, f_sv_optimal) = if with_sv {
        let r = matched_squeeze(obs.population)?;
        // cos(2φ_α − φ_ξ) = −1 is optimal for the squeezed vacuum.
        let sv = InterferometerInput::new(
            InputState::SqueezedVacuum {
                squeeze: r,
                phase: wrap_phase(2.0 * phase - PI),
            },
            pa,
            phase,
            PI / 2.0,
        )?;
        (Some(r), Some(figure_of_merit(&sv)?), Some(sv_optimal(pa)?.figure_of_merit))
    } else {
        (None, None, None)
    };
    Ok(MetrologySummary {
        reference_power: pa,
        reference_phase: phase,
        f_rf,
        f_coherent,
        sv_squeeze,
        f_sv_matched,
        f_sv_optimal,
    })
}

/// Evaluates every model of `cfg` at the base point with `set` applied.
pub fn run_config_point(cfg: &SweepConfig, set: &BTreeMap<Parameter, f64>) -> Vec<PointRecord> {
    let axes: Vec<(Parameter, f64)> = cfg
        .axes
        .iter()
        .map(|a| (a.parameter, set.get(&a.parameter).copied().unwrap_or(f64::NAN)))
        .collect();
    match cfg.resolve(set) {
        Ok(inputs) => cfg.models.iter().map(|&m| run_point(&inputs, m, axes.clone())).collect(),
        Err(e) => cfg
            .models
            .iter()
            .map(|&m| {
                let mut r = PointRecord::empty(axes.clone(), m);
                r.error_code = Some(match e {
                    Error::Config { .. } => "invalid_parameter",
                    _ => e.code(),
                });
                r.error_message = Some(e.to_string());
                r
            })
            .collect(),
    }
}

/// Sweep result in emission order: grid points lexicographic in axis
/// order, models in configuration order within each point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<Parameter>,
    pub rows: Vec<PointRecord>,
}

impl SweepTable {
    pub fn columns(&self) -> Vec<String> {
        columns(&self.axes)
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }

    pub fn write_csv<W: Write>(&self, w: W, precision: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Config {
            path: "output".into(),
            message: e.to_string(),
        };
        out.write_record(self.columns()).map_err(io)?;
        for r in &self.rows {
            out.write_record(r.cells(precision)).map_err(io)?;
        }
        out.flush().map_err(|e| io(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self, precision: usize) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, precision).expect("in-memory write");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn to_json(&self, precision: usize) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "columns": self.columns(),
            "rows": self.rows.iter().map(|r| Value::Array(r.json_cells(precision))).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format, precision: usize) -> String {
        match format {
            Format::Csv => self.to_csv_string(precision),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(precision)).expect("plain data");
                s.push('\n');
                s
            }
        }
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config {
        path: "threads".into(),
        message: e.to_string(),
    })
}

/// Evaluates the full grid on `threads` workers (0 picks the core count).
/// The output does not depend on the worker count.
pub fn run_sweep(cfg: &SweepConfig, threads: usize) -> Result<SweepTable> {
    cfg.validate()?;
    let grid = cfg.grid();
    let rows: Vec<Vec<PointRecord>> = pool(threads)?.install(|| grid.par_iter().map(|set| run_config_point(cfg, set)).collect());
    Ok(SweepTable {
        axes: cfg.axes.iter().map(|a| a.parameter).collect(),
        rows: rows.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerOutput {
    pub label: String,
    pub model: Model,
    pub population: f64,
    pub min_variance: f64,
    pub field: WignerField,
}

/// Wigner functions of the configured states, in configuration order.
pub fn run_wigner(cfg: &SweepConfig, threads: usize) -> Result<(WignerGrid, Vec<WignerOutput>)> {
    cfg.validate()?;
    let block = cfg.wigner.as_ref().ok_or_else(|| Error::Config {
        path: "wigner".into(),
        message: "no wigner block in configuration".into(),
    })?;
    let grid = block.grid;
    let out = pool(threads)?.install(|| {
        block
            .states
            .par_iter()
            .map(|st| {
                let inputs = cfg.resolve(&st.set)?;
                let rec = run_point(&inputs, st.model, Vec::new());
                if let (Some(code), Some(msg)) = (rec.error_code, &rec.error_message) {
                    return Err(Error::Config {
                        path: format!("wigner.states[{}]", st.label),
                        message: format!("{code}: {msg}"),
                    });
                }
                let rho = rec.state.expect("successful record carries a state");
                let obs = rec.observables.expect("successful record carries observables");
                Ok(WignerOutput {
                    label: st.label.clone(),
                    model: st.model,
                    population: obs.population,
                    min_variance: obs.min_variance,
                    field: wigner(&rho, &grid)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((grid, out))
}

pub fn wigner_json(grid: &WignerGrid, states: &[WignerOutput]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "grid": grid,
        "states": states.iter().map(|s| json!({
            "label": s.label,
            "model": s.model,
            "population": s.population,
            "min_variance": s.min_variance,
            "values": s.field.values,
        })).collect::<Vec<_>>(),
    })
}
