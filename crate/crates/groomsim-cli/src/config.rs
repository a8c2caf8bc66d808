//! Config-file loading and flag resolution. Precedence: built-in defaults,
//! then the `--config` file, then flags given explicitly on the command
//! line. Config keys mirror the long flag names (kebab-case).

use std::path::{Path, PathBuf};

use clap::parser::{ArgMatches, ValueSource};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
}

/// Flag-by-flag overlay against one subcommand's matches.
pub struct Overlay<'a> {
    matches: &'a ArgMatches,
}

impl<'a> Overlay<'a> {
    pub fn new(matches: &'a ArgMatches) -> Self {
        Self { matches }
    }

    fn explicit(&self, id: &str) -> bool {
        self.matches.value_source(id) == Some(ValueSource::CommandLine)
    }

    /// A flag with a built-in default: explicit flag wins, then config,
    /// then the default already held in `flag`.
    pub fn pick<T>(&self, id: &str, flag: T, config: Option<T>) -> T {
        if self.explicit(id) {
            flag
        } else {
            config.unwrap_or(flag)
        }
    }

    /// A flag without a default that must come from somewhere.
    pub fn require<T>(&self, id: &str, flag: Option<T>, config: Option<T>) -> Result<T, CliError> {
        let value = if self.explicit(id) { flag } else { flag.or(config) };
        value.ok_or_else(|| {
            CliError::Usage(format!(
                "--{} is required (pass the flag or set it in --config)",
                id.replace('_', "-")
            ))
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfigFile {
    pub rc: Option<u32>,
    pub m: Option<u32>,
    pub rg: Option<u32>,
    pub t: Option<u32>,
    pub n: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub capture_event_log: Option<bool>,
    pub reproducible: Option<bool>,
}

/// Fully resolved `run` invocation, embedded in output metadata.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub rc: u32,
    pub m: u32,
    pub rg: u32,
    pub t: u32,
    pub n: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub capture_event_log: bool,
    pub reproducible: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AgosConfigFile {
    pub rc: Option<u32>,
    pub m: Option<u32>,
    pub rg: Option<u32>,
    pub n: Option<u32>,
    pub replicates: Option<u32>,
    pub sample_sigma: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub s_step: Option<f64>,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_step: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reproducible: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AgosConfig {
    pub rc: u32,
    pub m: u32,
    pub rg: u32,
    pub n: u32,
    pub replicates: u32,
    pub sample_sigma: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_step: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub reproducible: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OrbitConfigFile {
    pub rc: Option<u32>,
    pub m: Option<u32>,
    pub rg: Option<u32>,
    pub n: Option<u32>,
    pub s0: Option<f64>,
    pub q0: Option<f64>,
    pub steps: Option<u32>,
    pub noise_sigma: Option<f64>,
    pub replicates: Option<u32>,
    pub sample_sigma: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reproducible: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OrbitConfig {
    pub rc: u32,
    pub m: u32,
    pub rg: u32,
    pub n: u32,
    pub s0: f64,
    pub q0: f64,
    pub steps: u32,
    pub noise_sigma: f64,
    pub replicates: u32,
    pub sample_sigma: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub reproducible: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AnalyzeConfigFile {
    pub result: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reproducible: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AnalyzeConfig {
    pub result: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub reproducible: bool,
}
