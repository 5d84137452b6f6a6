//! `vibrosqueeze` command-line interface.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vibrosqueeze::config::{self, parse_config, Format, Overrides, Parameter, SweepConfig};
use vibrosqueeze::sweep::{run_config_point, run_sweep, run_wigner, wigner_json, SweepTable};
use vibrosqueeze::Error;

#[derive(Parser, Debug)]
#[command(name = "vibrosqueeze", version, about = "Squeezing in phonon-dressed resonance fluorescence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted and the config names none).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "VIBROSQUEEZE_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Set the phonon coupling to zero.
    #[arg(long, global = true)]
    no_phonons: bool,
    /// Pure dephasing rate γ in ps⁻¹.
    #[arg(long, global = true, value_name = "RATE")]
    dephasing_rate: Option<f64>,
    /// Treat the detuning as measured from the bare transition.
    #[arg(long, global = true)]
    raw_detuning: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every configured model at one parameter point.
    Point {
        /// Parameter override, e.g. `--set s=0.333 --set detuning_mev=1`.
        #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
        set: Vec<(Parameter, f64)>,
    },
    /// Evaluate the configured parameter grid.
    Sweep,
    /// Emit or run a built-in figure configuration.
    Preset {
        name: String,
        /// Print the configuration instead of running it (default).
        #[arg(long, conflicts_with = "run")]
        emit_config: bool,
        #[arg(long)]
        run: bool,
        /// Points per continuous axis.
        #[arg(long, default_value_t = config::DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Wigner functions of the states in the configuration's wigner block.
    Wigner,
}

fn parse_assignment(s: &str) -> Result<(Parameter, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let p = Parameter::from_name(name.trim()).ok_or_else(|| format!("unknown parameter `{name}`"))?;
    let v: f64 = value.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((p, v))
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::UnknownPreset(_) => Failure::Config(format!("{} ({})", e, e.code())),
            other => Failure::Runtime(format!("{} ({})", other, other.code())),
        }
    }
}

fn load_config(c: &Common) -> Result<SweepConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => SweepConfig::default(),
    };
    apply_common(&mut cfg, c)?;
    Ok(cfg)
}

fn apply_common(cfg: &mut SweepConfig, c: &Common) -> Result<(), Failure> {
    cfg.apply_overrides(&Overrides {
        no_phonons: c.no_phonons,
        dephasing_rate: c.dephasing_rate,
        raw_detuning: c.raw_detuning,
    })?;
    if let Some(f) = c.format {
        cfg.output.format = match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        };
    }
    if let Some(out) = &c.out {
        cfg.output.path = Some(out.display().to_string());
    }
    Ok(())
}

fn emit(text: &str, path: Option<&str>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(Path::new(p), text).map_err(|e| Failure::Runtime(format!("{p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_table(cfg: &SweepConfig, table: &SweepTable) -> Result<(), Failure> {
    emit(&table.render(cfg.output.format, cfg.output.precision), cfg.output.path.as_deref())
}

fn point(c: &Common, set: &[(Parameter, f64)]) -> Result<(), Failure> {
    let mut cfg = load_config(c)?;
    let set: BTreeMap<Parameter, f64> = set.iter().copied().collect();
    cfg.resolve(&set)?;
    cfg.axes.clear();
    let rows = run_config_point(&cfg, &set);
    let table = SweepTable { axes: Vec::new(), rows };
    emit_table(&cfg, &table)?;
    let failed: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| {
            r.error_code.map(|code| format!("{}: {} ({code})", r.model.name(), r.error_message.as_deref().unwrap_or("")))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(failed.join("; ")))
    }
}

fn sweep(c: &Common, cfg: SweepConfig) -> Result<(), Failure> {
    let table = run_sweep(&cfg, c.threads)?;
    emit_table(&cfg, &table)?;
    let n = table.error_count();
    if n > 0 {
        eprintln!("warning: {n} of {} rows carry an error code", table.rows.len());
    }
    Ok(())
}

fn wigner(c: &Common, cfg: SweepConfig) -> Result<(), Failure> {
    let (grid, states) = run_wigner(&cfg, c.threads)?;
    let text = match cfg.output.format {
        Format::Json => {
            let mut s = format!("{:#}", wigner_json(&grid, &states));
            s.push('\n');
            s
        }
        Format::Csv => states.iter().map(|s| format!("# {}\n{}", s.label, s.field.to_csv())).collect(),
    };
    emit(&text, cfg.output.path.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Point { set } => point(c, set),
        Command::Sweep => {
            if c.config.is_none() {
                return Err(Failure::Config("sweep requires --config".into()));
            }
            sweep(c, load_config(c)?)
        }
        Command::Preset {
            name,
            run,
            resolution,
            ..
        } => {
            let mut cfg = config::preset(name, *resolution).map_err(|e| Failure::Config(format!("{e} ({})", e.code())))?;
            if !run {
                let mut text = cfg.to_json_pretty();
                text.push('\n');
                return emit(&text, c.out.as_ref().and_then(|p| p.to_str()));
            }
            apply_common(&mut cfg, c)?;
            if cfg.wigner.is_some() && cfg.axes.is_empty() {
                if c.format.is_none() {
                    cfg.output.format = Format::Json;
                }
                wigner(c, cfg)
            } else {
                sweep(c, cfg)
            }
        }
        Command::Wigner => {
            let mut cfg = load_config(c)?;
            if c.format.is_none() {
                cfg.output.format = Format::Json;
            }
            wigner(c, cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_parse() {
        assert_eq!(parse_assignment("s=0.5"), Ok((Parameter::S, 0.5)));
        assert_eq!(parse_assignment(" detuning_mev = -1 "), Ok((Parameter::DetuningMev, -1.0)));
        assert!(parse_assignment("s").is_err());
        assert!(parse_assignment("bogus=1").is_err());
        assert!(parse_assignment("s=abc").is_err());
    }
}
