//! Global options, the optional config file, and the constants file.
//!
//! Precedence: command-line flags win over config-file keys, which win over
//! built-in defaults. The config file carries the global keys only; every
//! per-command option is a flag.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thr_core::constants::PhysicalConstants;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Global flags shared by every subcommand.
#[derive(Debug, clap::Args)]
pub struct GlobalOpts {
    /// Base random seed; commands derive their streams from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory receiving every output file.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Format of spectrum artifacts.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// TOML file overriding the physical constants.
    #[arg(long, global = true)]
    pub constants_file: Option<PathBuf>,

    /// Optional TOML config carrying the global keys; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for dataset generation and paired optimizer runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// `[global]` and `[constants]` tables of the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    global: ConfigGlobal,
    constants: Option<ConstantsFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigGlobal {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    format: Option<String>,
    constants_file: Option<PathBuf>,
    threads: Option<usize>,
}

/// Constants file: any subset of the physical constants.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsFile {
    air_density: Option<f64>,
    sound_speed: Option<f64>,
    air_viscosity: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
}

impl ConstantsFile {
    fn apply(&self, pc: &mut PhysicalConstants) {
        if let Some(v) = self.air_density {
            pc.air_density = v;
        }
        if let Some(v) = self.sound_speed {
            pc.sound_speed = v;
        }
        if let Some(v) = self.air_viscosity {
            pc.air_viscosity = v;
        }
        if let Some(v) = self.beta1 {
            pc.beta1 = v;
        }
        if let Some(v) = self.beta2 {
            pc.beta2 = v;
        }
    }
}

/// Fully resolved global configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub constants: PhysicalConstants,
    pub threads: usize,
}

impl Resolved {
    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::malformed(path, e))
}

pub fn resolve(opts: &GlobalOpts) -> Result<Resolved, CliError> {
    let file: ConfigFile = match &opts.config {
        Some(path) => parse_toml(path)?,
        None => ConfigFile::default(),
    };

    let format = match (&opts.format, file.global.format.as_deref()) {
        (Some(f), _) => *f,
        (None, Some("csv")) => OutputFormat::Csv,
        (None, Some("json")) => OutputFormat::Json,
        (None, Some(other)) => {
            return Err(CliError::Validation(format!(
                "config format must be \"csv\" or \"json\", got \"{other}\""
            )))
        }
        (None, None) => OutputFormat::Csv,
    };

    let mut constants = PhysicalConstants::default();
    if let Some(inline) = &file.constants {
        inline.apply(&mut constants);
    }
    let constants_path = opts
        .constants_file
        .clone()
        .or(file.global.constants_file.clone());
    if let Some(path) = &constants_path {
        let overrides: ConstantsFile = parse_toml(path)?;
        overrides.apply(&mut constants);
    }
    constants
        .validate()
        .map_err(|e| CliError::Validation(format!("physical constants: {e}")))?;

    Ok(Resolved {
        seed: opts.seed.or(file.global.seed).unwrap_or(0),
        output_dir: opts
            .output_dir
            .clone()
            .or(file.global.output_dir)
            .unwrap_or_else(|| PathBuf::from(".")),
        format,
        constants,
        threads: opts.threads.or(file.global.threads).unwrap_or(1).max(1),
    })
}

/// Splits a comma-separated list into exactly `N` floats.
pub fn parse_float_list<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::Validation(format!(
            "{what} needs {N} comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse()
            .map_err(|e| CliError::Validation(format!("{what}: \"{p}\": {e}")))?;
    }
    Ok(out)
}
