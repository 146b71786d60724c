//! `cavityband` — band-structure, wave-packet and scattering runs from
//! sectioned TOML configs, with CSV/JSON/SVG bundles per run.
//!
//! ```text
//! cavityband <bands|masses|error-map|fidelity-map|propagate|scatter|sweep>
//!            (--config FILE | --preset NAME) [--out DIR] [--parallel N]
//!            [--section.key=value ...]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 integrity failure (norm drift).

mod commands;
mod config;
mod outputs;
mod presets;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad usage, unparsable config, failed validation. Exit 2.
    Config(String),
    /// Numeric failure inside a computation. Exit 3.
    Numeric(String),
    /// Integrity failure (lost unitarity). Exit 4.
    Integrity(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn numeric(msg: impl fmt::Display) -> Self {
        Self::Numeric(msg.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Config(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Integrity(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numeric error: {m}"),
            Self::Integrity(m) => write!(f, "integrity error: {m}"),
        }
    }
}

/// Maps core evolution errors onto the exit-code contract.
pub fn map_wavepacket_error(e: cavityband_core::wavepacket::WavepacketError) -> CliError {
    use cavityband_core::wavepacket::WavepacketError as W;
    match e {
        W::NormDrift { norm } => CliError::Integrity(format!("norm drifted to {norm}")),
        other => CliError::numeric(other),
    }
}

pub struct Invocation {
    pub command: String,
    pub config: RunConfig,
    /// Raw config text + overrides, for sweep cells.
    pub config_text: String,
    pub overrides: Vec<(String, String)>,
    pub out_dir: PathBuf,
    pub parallel: usize,
}

const USAGE: &str = "usage: cavityband <bands|masses|error-map|fidelity-map|propagate|scatter|sweep> \
(--config FILE | --preset NAME) [--out DIR] [--parallel N] [--section.key=value ...]";

fn parse_args(args: &[String]) -> Result<Invocation, CliError> {
    if args.is_empty() {
        return Err(CliError::config(USAGE));
    }
    let command = args[0].clone();
    match command.as_str() {
        "bands" | "masses" | "error-map" | "fidelity-map" | "propagate" | "scatter" | "sweep" => {}
        other => return Err(CliError::config(format!("unknown command '{other}'\n{USAGE}"))),
    }

    let mut config_path: Option<PathBuf> = None;
    let mut preset: Option<String> = None;
    let mut out_flag: Option<PathBuf> = None;
    let mut parallel = 1usize;
    let mut overrides: Vec<(String, String)> = Vec::new();

    let mut it = args[1..].iter().peekable();
    while let Some(arg) = it.next() {
        let take_value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>,
                          flag: &str|
         -> Result<String, CliError> {
            it.next().cloned().ok_or_else(|| CliError::config(format!("{flag} needs a value")))
        };
        match arg.as_str() {
            "--config" => config_path = Some(PathBuf::from(take_value(&mut it, "--config")?)),
            "--preset" => preset = Some(take_value(&mut it, "--preset")?),
            "--out" => out_flag = Some(PathBuf::from(take_value(&mut it, "--out")?)),
            "--parallel" => {
                parallel = take_value(&mut it, "--parallel")?
                    .parse()
                    .map_err(|_| CliError::config("--parallel needs a positive integer"))?;
                if parallel == 0 {
                    return Err(CliError::config("--parallel needs a positive integer"));
                }
            }
            other if other.starts_with("--") && other.contains('=') => {
                let body = &other[2..];
                let (path, value) = body.split_once('=').unwrap();
                if !path.contains('.') {
                    return Err(CliError::config(format!(
                        "override '{other}' must look like --section.key=value"
                    )));
                }
                overrides.push((path.to_string(), value.to_string()));
            }
            other => return Err(CliError::config(format!("unknown argument '{other}'\n{USAGE}"))),
        }
    }

    let config_text = match (&config_path, &preset) {
        (Some(path), None) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        (None, Some(name)) => presets::lookup(name)
            .ok_or_else(|| {
                CliError::config(format!("unknown preset '{name}'; known: {}", presets::names()))
            })?
            .to_string(),
        (Some(_), Some(_)) => return Err(CliError::config("give --config or --preset, not both")),
        (None, None) => return Err(CliError::config(format!("missing --config/--preset\n{USAGE}"))),
    };

    let config = RunConfig::from_toml(&config_text, &overrides)?;
    // Output directory: CAVITYBAND_OUT env > --out flag > config.
    let out_dir = match std::env::var_os("CAVITYBAND_OUT") {
        Some(dir) => PathBuf::from(dir),
        None => out_flag.unwrap_or_else(|| PathBuf::from(&config.output.dir)),
    };

    Ok(Invocation { command, config, config_text, overrides, out_dir, parallel })
}

fn run(args: &[String]) -> Result<(), CliError> {
    let inv = parse_args(args)?;
    match inv.command.as_str() {
        "bands" => commands::bands::run(&inv.config, &inv.out_dir).map(|_| ()),
        "masses" => commands::masses::run(&inv.config, &inv.out_dir).map(|_| ()),
        "error-map" => commands::maps::run_error_map(&inv.config, &inv.out_dir).map(|_| ()),
        "fidelity-map" => commands::maps::run_fidelity_map(&inv.config, &inv.out_dir).map(|_| ()),
        "propagate" => commands::propagate::run(&inv.config, &inv.out_dir).map(|_| ()),
        "scatter" => commands::scatter::run(&inv.config, &inv.out_dir).map(|_| ()),
        "sweep" => commands::sweep::run(&inv),
        _ => unreachable!("validated in parse_args"),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavityband: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
