//! JSON run configuration, its resolution into solver inputs, and the
//! built-in figure presets.
//!
//! Every physical quantity carries its unit. Frequencies accept `"meV"`,
//! `"ps^-1"` or `"ps"`; the last reads the value as a lifetime, so an
//! emission rate of `{"value": 700, "unit": "ps"}` means Γ = 1/700 ps⁻¹.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::flux_matched_squeeze;
use crate::observables::WignerGrid;
use crate::quadrature::QuadratureSettings;
use crate::types::{PhononParams, SystemParams};
use crate::units::{d_from_detuning, energy_to_angular_frequency, rabi_from_s};
use crate::variational::{DetuningConvention, Frame, ShiftSign, VariationalOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "meV")]
    MilliElectronVolt,
    #[serde(rename = "ps^-1")]
    PerPicosecond,
    /// Value is a lifetime τ; the frequency is 1/τ.
    #[serde(rename = "ps")]
    Lifetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    pub value: f64,
    pub unit: FrequencyUnit,
}

impl Frequency {
    pub fn mev(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::MilliElectronVolt,
        }
    }

    pub fn per_ps(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::PerPicosecond,
        }
    }

    pub fn lifetime_ps(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::Lifetime,
        }
    }

    /// Angular frequency in ps⁻¹.
    pub fn angular(&self) -> f64 {
        match self.unit {
            FrequencyUnit::MilliElectronVolt => energy_to_angular_frequency(self.value),
            FrequencyUnit::PerPicosecond => self.value,
            FrequencyUnit::Lifetime => 1.0 / self.value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemperatureUnit {
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Temperature {
    pub value: f64,
    pub unit: TemperatureUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingUnit {
    #[serde(rename = "ps^2")]
    PicosecondSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub value: f64,
    pub unit: CouplingUnit,
}

/// Drive strength as s = 2(Ω/Γ)², as S = s/(1+d), or as a Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Drive {
    S(f64),
    Saturation(f64),
    Rabi(Frequency),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemBlock {
    pub drive: Drive,
    /// Phase of Ω in radians.
    pub drive_phase: f64,
    pub detuning: Frequency,
    pub emission_rate: Frequency,
    pub pure_dephasing_rate: Frequency,
}

impl Default for SystemBlock {
    fn default() -> Self {
        SystemBlock {
            drive: Drive::S(1.0),
            drive_phase: 0.0,
            detuning: Frequency::mev(0.0),
            emission_rate: Frequency::lifetime_ps(700.0),
            pure_dephasing_rate: Frequency::per_ps(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhononBlock {
    pub alpha: Coupling,
    pub cutoff: Frequency,
    pub temperature: Temperature,
}

impl Default for PhononBlock {
    fn default() -> Self {
        PhononBlock {
            alpha: Coupling {
                value: 0.027,
                unit: CouplingUnit::PicosecondSquared,
            },
            cutoff: Frequency::per_ps(2.2),
            temperature: Temperature {
                value: 4.0,
                unit: TemperatureUnit::K,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Variational polaron master equation.
    FullPhonon,
    /// Phonon-free optical Bloch equations in closed form.
    Atomic,
    /// Gibbs state of the renormalised Hamiltonian at the bath temperature.
    ThermalApprox,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::FullPhonon => "full_phonon",
            Model::Atomic => "atomic",
            Model::ThermalApprox => "thermal_approx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Toggles {
    /// Scale coherent emission by B².
    pub include_sideband_b2: bool,
    pub polaron_shift_convention: DetuningConvention,
    pub shift_sign: ShiftSign,
    pub frame: Frame,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            include_sideband_b2: true,
            polaron_shift_convention: DetuningConvention::Shifted,
            shift_sign: ShiftSign::FMinusTwo,
            frame: Frame::Variational,
        }
    }
}

/// Parameters an axis or override may set. Units are in the name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    S,
    Saturation,
    RabiMev,
    DetuningMev,
    DrivePhase,
    AlphaPs2,
    TemperatureK,
    /// γ/Γ
    DephasingRatio,
    ReferencePower,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::S => "s",
            Parameter::Saturation => "saturation",
            Parameter::RabiMev => "rabi_mev",
            Parameter::DetuningMev => "detuning_mev",
            Parameter::DrivePhase => "drive_phase",
            Parameter::AlphaPs2 => "alpha_ps2",
            Parameter::TemperatureK => "temperature_k",
            Parameter::DephasingRatio => "dephasing_ratio",
            Parameter::ReferencePower => "reference_power",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    pub scale: Scale,
    /// For log10 axes the actual values, not exponents.
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log10 => {
                        let (a, b) = (self.min.log10(), self.max.log10());
                        10f64.powf(a + (b - a) * t)
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetrologyBlock {
    /// |α|² of the coherent reference arm.
    pub reference_power: f64,
    /// Also report a squeezed vacuum carrying the same photon flux.
    pub squeezed_vacuum: bool,
}

impl Default for MetrologyBlock {
    fn default() -> Self {
        MetrologyBlock {
            reference_power: 1.0,
            squeezed_vacuum: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub path: Option<String>,
    pub format: Format,
    /// Significant digits after the point in scientific notation.
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            path: None,
            format: Format::Csv,
            precision: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerState {
    pub label: String,
    pub model: Model,
    #[serde(default)]
    pub set: BTreeMap<Parameter, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerBlock {
    #[serde(default)]
    pub grid: WignerGrid,
    pub states: Vec<WignerState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub system: SystemBlock,
    #[serde(default)]
    pub phonons: PhononBlock,
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrology: Option<MetrologyBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerBlock>,
}

fn default_models() -> Vec<Model> {
    vec![Model::FullPhonon]
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schema_version: SCHEMA_VERSION,
            system: SystemBlock::default(),
            phonons: PhononBlock::default(),
            models: default_models(),
            toggles: Toggles::default(),
            quadrature: QuadratureSettings::default(),
            axes: Vec::new(),
            metrology: None,
            output: OutputBlock::default(),
            wigner: None,
        }
    }
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a configuration, reporting the offending field path.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: SweepConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl SweepConfig {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.models.is_empty() {
            return Err(config_error("models", "at least one model is required"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            let path = format!("axes[{i}]");
            if a.count == 0 {
                return Err(config_error(format!("{path}.count"), "must be >= 1"));
            }
            if !a.min.is_finite() || !a.max.is_finite() {
                return Err(config_error(path, "bounds must be finite"));
            }
            if a.scale == Scale::Log10 && !(a.min > 0.0 && a.max > 0.0) {
                return Err(config_error(format!("{path}.min"), "log10 axes need positive bounds"));
            }
            if self.axes[..i].iter().any(|b| b.parameter == a.parameter) {
                return Err(config_error(format!("{path}.parameter"), "axis parameter repeated"));
            }
        }
        if self.output.precision == 0 || self.output.precision > 17 {
            return Err(config_error("output.precision", "must lie in 1..=17"));
        }
        if let Some(m) = &self.metrology {
            if !(m.reference_power > 0.0 && m.reference_power.is_finite()) {
                return Err(config_error("metrology.reference_power", "must be finite and > 0"));
            }
        }
        if let Some(w) = &self.wigner {
            w.grid.validate().map_err(|e| config_error("wigner.grid", e.to_string()))?;
        }
        self.quadrature.validate().map_err(|e| config_error("quadrature", e.to_string()))?;
        // Resolve the base point so unit and range errors surface at parse time.
        self.resolve(&BTreeMap::new())?;
        Ok(())
    }

    /// Solver inputs at the base point with `set` applied on top.
    pub fn resolve(&self, set: &BTreeMap<Parameter, f64>) -> Result<PointInputs> {
        let mut sys = self.system;
        let mut ph = self.phonons;
        let mut reference_power = self.metrology.map(|m| m.reference_power);
        let mut dephasing_ratio = None;
        for (&p, &v) in set {
            match p {
                Parameter::S => sys.drive = Drive::S(v),
                Parameter::Saturation => sys.drive = Drive::Saturation(v),
                Parameter::RabiMev => sys.drive = Drive::Rabi(Frequency::mev(v)),
                Parameter::DetuningMev => sys.detuning = Frequency::mev(v),
                Parameter::DrivePhase => sys.drive_phase = v,
                Parameter::AlphaPs2 => ph.alpha.value = v,
                Parameter::TemperatureK => ph.temperature.value = v,
                Parameter::DephasingRatio => dephasing_ratio = Some(v),
                Parameter::ReferencePower => reference_power = Some(v),
            }
        }

        let gamma = sys.emission_rate.angular();
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(config_error("system.emission_rate", "must be finite and > 0"));
        }
        let detuning = sys.detuning.angular();
        if !detuning.is_finite() {
            return Err(config_error("system.detuning", "must be finite"));
        }
        let dephasing = match dephasing_ratio {
            Some(r) => r * gamma,
            None => sys.pure_dephasing_rate.angular(),
        };
        if !(dephasing >= 0.0 && dephasing.is_finite()) {
            return Err(config_error("system.pure_dephasing_rate", "must be finite and >= 0"));
        }
        let d = d_from_detuning(detuning, gamma);
        let rabi = match sys.drive {
            Drive::S(s) if s >= 0.0 => rabi_from_s(s, gamma),
            Drive::Saturation(sat) if sat >= 0.0 => rabi_from_s(sat * (1.0 + d), gamma),
            Drive::Rabi(f) => f.angular(),
            _ => return Err(config_error("system.drive", "must be >= 0")),
        };
        if !(rabi >= 0.0 && rabi.is_finite()) {
            return Err(config_error("system.drive", "must be finite and >= 0"));
        }
        let system = SystemParams::new(rabi, detuning, gamma)
            .map_err(|e| config_error("system", e.to_string()))?
            .with_phase(sys.drive_phase)
            .with_dephasing(dephasing);
        if !sys.drive_phase.is_finite() {
            return Err(config_error("system.drive_phase", "must be finite"));
        }
        let phonons = PhononParams::new(ph.alpha.value, ph.cutoff.angular(), ph.temperature.value).map_err(|e| {
            let field = match e {
                Error::InvalidParameter { name, .. } => name,
                _ => "",
            };
            config_error(format!("phonons.{field}"), e.to_string())
        })?;
        if let Some(p) = reference_power {
            if !(p > 0.0 && p.is_finite()) {
                return Err(config_error("metrology.reference_power", "must be finite and > 0"));
            }
        }
        Ok(PointInputs {
            system,
            phonons,
            options: VariationalOptions {
                frame: self.toggles.frame,
                convention: self.toggles.polaron_shift_convention,
                shift_sign: self.toggles.shift_sign,
                quadrature: self.quadrature,
                ..VariationalOptions::default()
            },
            include_sideband_b2: self.toggles.include_sideband_b2,
            reference_power: reference_power.filter(|_| self.metrology.is_some()),
            squeezed_vacuum: self.metrology.map(|m| m.squeezed_vacuum).unwrap_or(false),
        })
    }

    /// Grid points in lexicographic axis order (last axis fastest).
    pub fn grid(&self) -> Vec<BTreeMap<Parameter, f64>> {
        let mut points = vec![Vec::<(Parameter, f64)>::new()];
        for a in &self.axes {
            let vals = a.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((a.parameter, v));
                        q
                    })
                })
                .collect();
        }
        points.into_iter().map(|p| p.into_iter().collect()).collect()
    }

    /// Command-line style overrides applied to the whole run.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if o.no_phonons {
            self.phonons.alpha.value = 0.0;
        }
        if let Some(g) = o.dephasing_rate {
            self.system.pure_dephasing_rate = Frequency::per_ps(g);
        }
        if o.raw_detuning {
            self.toggles.polaron_shift_convention = DetuningConvention::Raw;
        }
        self.validate()
    }
}

/// Run-wide overrides mirroring the command-line flags.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub no_phonons: bool,
    /// γ in ps⁻¹.
    pub dephasing_rate: Option<f64>,
    pub raw_detuning: bool,
}

/// Fully resolved inputs for one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointInputs {
    pub system: SystemParams,
    pub phonons: PhononParams,
    pub options: VariationalOptions,
    pub include_sideband_b2: bool,
    pub reference_power: Option<f64>,
    pub squeezed_vacuum: bool,
}

/// Points per continuous axis when no resolution is given.
pub const DEFAULT_RESOLUTION: usize = 101;

pub const PRESETS: [&str; 13] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig3b", "fig3c", "fig3d", "supp1", "supp2", "wigner",
];

/// Drive window of the off-resonant sections, s ∈ [10^5.5, 10^7.5] at
/// ħδ = 1 meV, expressed as saturation S = s/(1+d).
pub fn section_saturation_window() -> (f64, f64) {
    let gamma = 1.0 / 700.0;
    let d = d_from_detuning(energy_to_angular_frequency(1.0), gamma);
    (10f64.powf(5.5) / (1.0 + d), 10f64.powf(7.5) / (1.0 + d))
}

fn log_axis(parameter: Parameter, min: f64, max: f64, count: usize) -> Axis {
    Axis {
        parameter,
        scale: Scale::Log10,
        min,
        max,
        count,
    }
}

fn lin_axis(parameter: Parameter, min: f64, max: f64, count: usize) -> Axis {
    Axis {
        parameter,
        scale: Scale::Linear,
        min,
        max,
        count,
    }
}

/// Configuration reproducing a figure's data. `resolution` sets the number
/// of points per continuous axis.
pub fn preset(name: &str, resolution: usize) -> Result<SweepConfig> {
    if resolution == 0 {
        return Err(Error::invalid("resolution", "must be >= 1"));
    }
    let n = resolution;
    let base = SweepConfig::default();
    let (lo, hi) = section_saturation_window();
    let section = |detuning: f64, metrology: bool| {
        let mut c = base.clone();
        c.system.detuning = Frequency::mev(detuning);
        c.models = vec![Model::FullPhonon, Model::Atomic, Model::ThermalApprox];
        c.axes = vec![if detuning == 0.0 {
            log_axis(Parameter::Saturation, lo, hi, n)
        } else {
            log_axis(Parameter::S, 10f64.powf(5.5), 10f64.powf(7.5), n)
        }];
        if metrology {
            c.models = vec![Model::FullPhonon, Model::Atomic];
            c.metrology = Some(MetrologyBlock::default());
        }
        c
    };
    let map = |model: Model| {
        let mut c = base.clone();
        c.models = vec![model];
        c.axes = vec![
            log_axis(Parameter::S, 1e-1, 1e8, n),
            lin_axis(Parameter::DetuningMev, -1.5, 1.5, n),
        ];
        c
    };
    let cfg = match name {
        "fig1a" | "fig1c" => map(Model::FullPhonon),
        "fig1b" | "fig1d" => map(Model::Atomic),
        "fig2a" => section(0.0, false),
        "fig2b" => section(1.0, false),
        "fig2c" => section(-1.0, false),
        "fig3b" => section(0.0, true),
        "fig3c" => section(1.0, true),
        "fig3d" => section(-1.0, true),
        "supp1" => {
            let mut c = base.clone();
            c.axes = vec![log_axis(Parameter::Saturation, 1e-2, 1e8, n)];
            c
        }
        "supp2" => {
            let mut c = base.clone();
            c.axes = vec![
                lin_axis(Parameter::DetuningMev, 0.0, 1.0, 2),
                lin_axis(Parameter::DephasingRatio, 0.0, 1.0, 2),
                log_axis(Parameter::Saturation, lo, hi, n),
            ];
            c
        }
        "wigner" => {
            let mut c = base.clone();
            let state = |label: &str, model: Model, s: f64, dm: f64| WignerState {
                label: label.to_string(),
                model,
                set: [(Parameter::S, s), (Parameter::DetuningMev, dm)].into_iter().collect(),
            };
            c.wigner = Some(WignerBlock {
                grid: WignerGrid::default(),
                states: vec![
                    state("vacuum", Model::Atomic, 0.0, 0.0),
                    state("resonant_weak", Model::FullPhonon, 1.0 / 3.0, 0.0),
                    state("blue_detuned_strong", Model::FullPhonon, 8e6, 1.0),
                    state("red_detuned_strong", Model::FullPhonon, 1e7, -1.0),
                ],
            });
            c
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Squeezing parameter of a vacuum matched in flux to `power`.
pub(crate) fn matched_squeeze(power: f64) -> Result<f64> {
    flux_matched_squeeze(power.max(0.0))
}

pub(crate) fn wrap_phase(phase: f64) -> f64 {
    phase.rem_euclid(TAU)
}
