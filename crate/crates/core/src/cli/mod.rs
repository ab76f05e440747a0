//! Command-line front end: configuration parsing, scenario dispatch and
//! deterministic output files.

mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::scenarios::{run_scenario, FrequencyKind, RunConfig, ScenarioError, ScenarioKind};

pub use output::{
    emit_series, format_real, read_manifest, render_manifest, render_spectrum, render_summary, render_trajectory,
    MANIFEST_KEYS, SPECTRUM_HEADER, SUMMARY_HEADER, TRAJECTORY_HEADER,
};

/// Exit code for a completed run whose diagnostics exceed their bounds.
pub const EXIT_DIAGNOSTICS: i32 = 2;
/// Exit code for configuration, computation or I/O errors.
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Scenario(e) => e.kind(),
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn config_error(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Exact dynamics of a central spin in a self-interacting spin bath.
#[derive(Debug, Parser)]
#[command(name = "spinbath", version)]
pub struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// antiferro-scan, ferro-scan, temp-scan, odd-even, sigma-x-spectrum,
    /// interaction-average or isolation-check.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of bath spins.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated bath couplings.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Comma-separated temperatures.
    #[arg(long, allow_hyphen_values = true)]
    pub kt: Option<String>,
    /// Ensemble size [default: 20].
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bath frequency density: debye or box.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    #[arg(long = "dt-out", allow_hyphen_values = true)]
    pub dt_out: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| config_error(key, format!("`{}`: {e}", s.trim())))
        })
        .collect()
}

fn toml_error(e: toml::de::Error) -> CliError {
    let msg = e.message().to_string();
    // Messages name the offending key in backticks, e.g. "missing field `N`".
    let key = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string());
    config_error(&key, msg)
}

/// Merges the config file (if any) with the flags and validates the result.
pub fn parse_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut table = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            text.parse::<toml::Table>().map_err(toml_error)?
        }
        None => toml::Table::new(),
    };
    use toml::Value;
    if let Some(s) = &cli.scenario {
        let kind: ScenarioKind = s.parse().map_err(|e: String| config_error("scenario", e))?;
        table.insert("scenario".into(), Value::String(kind.as_str().into()));
    }
    if let Some(n) = cli.n {
        table.insert("N".into(), Value::Integer(n as i64));
    }
    let float_list = |v: Vec<f64>| Value::Array(v.into_iter().map(Value::Float).collect());
    if let Some(s) = &cli.lambda {
        table.insert("lambda".into(), float_list(parse_list("lambda", s)?));
    }
    if let Some(s) = &cli.kt {
        table.insert("kT".into(), float_list(parse_list("kT", s)?));
    }
    if let Some(m) = cli.m {
        table.insert("M".into(), Value::Integer(m as i64));
    }
    if let Some(seed) = cli.seed {
        let seed = i64::try_from(seed).map_err(|_| config_error("seed", "must be below 2^63"))?;
        table.insert("seed".into(), Value::Integer(seed));
    }
    if let Some(d) = &cli.dist {
        let kind: FrequencyKind = d.parse().map_err(|e: String| config_error("dist", e))?;
        table.insert("dist".into(), Value::String(kind.as_str().into()));
    }
    if let Some(t) = cli.tmax {
        table.insert("tmax".into(), Value::Float(t));
    }
    if let Some(t) = cli.dt_out {
        table.insert("dt_out".into(), Value::Float(t));
    }
    let config: RunConfig = table.try_into().map_err(toml_error)?;
    let config = config.resolved();
    config.validate()?;
    Ok(config)
}

/// Outcome of a successful invocation.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let config = parse_config(cli)?;
    let output = run_scenario::<f64>(&config)?;
    let files = emit_series(&output, &cli.out)?;
    Ok(RunReport {
        files,
        failures: output.failures(),
    })
}

/// Parses `args`, runs, and returns the process exit code. Failures are
/// reported as one JSON object on stderr.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            if report.failures.is_empty() {
                0
            } else {
                let line = serde_json::json!({
                    "status": "failed",
                    "kind": "diagnostics",
                    "failures": report.failures,
                });
                eprintln!("{line}");
                EXIT_DIAGNOSTICS
            }
        }
        Err(e) => {
            let line = serde_json::json!({
                "status": "failed",
                "kind": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{line}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("spinbath").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn missing_bath_size_is_named() {
        let err = parse_config(&cli(&["--scenario", "antiferro-scan"])).unwrap_err();
        match err {
            CliError::Config { key, .. } => assert_eq!(key, "N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lists_keep_their_order() {
        let c = parse_config(&cli(&[
            "--scenario",
            "antiferro-scan",
            "--n",
            "4",
            "--lambda",
            "0,1,2,5,10",
        ]))
        .unwrap();
        assert_eq!(c.lambda, vec![0.0, 1.0, 2.0, 5.0, 10.0]);
        assert_eq!(c.m, 20);
        let c = parse_config(&cli(&["--scenario", "ferro-scan", "--n", "4", "--lambda", "-2,-10"])).unwrap();
        assert_eq!(c.lambda, vec![-2.0, -10.0]);
    }

    #[test]
    fn negative_temperature_is_a_domain_error() {
        let err = parse_config(&cli(&["--scenario", "temp-scan", "--n", "4", "--kt", "-1"])).unwrap_err();
        assert_eq!(err.kind(), "config");
        assert!(err.to_string().contains("kT"), "{err}");
    }

    #[test]
    fn bad_flags_name_their_key() {
        let err = parse_config(&cli(&["--scenario", "temp-scan", "--n", "4", "--lambda", "1,x"])).unwrap_err();
        assert!(err.to_string().contains("lambda"));
        let err = parse_config(&cli(&["--scenario", "nope", "--n", "4"])).unwrap_err();
        assert!(err.to_string().contains("scenario"));
        let err = parse_config(&cli(&["--scenario", "temp-scan", "--n", "4", "--dist", "flat"])).unwrap_err();
        assert!(err.to_string().contains("dist"));
    }
}
