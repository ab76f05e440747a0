use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::Value;

use super::{config_error, CliError};
use crate::ensemble::ObservableSeries;
use crate::scenarios::{RunConfig, ScenarioOutput, ScenarioPoint};

pub const TRAJECTORY_HEADER: &str = "t,Px,Py,Pz,S0,HI_avg";
pub const SPECTRUM_HEADER: &str = "n,E_n,sigma_x_expect";
pub const SUMMARY_HEADER: &str = "lambda,kT,S0_late_avg,Pz_late_avg,HI_time_avg,avg_sigma_x,beta_prime,flatness";

/// Manifest keys beyond the echoed run configuration.
pub const MANIFEST_KEYS: [&str; 10] = [
    "truncation_bound",
    "ratio_r",
    "max_norm_drift",
    "max_energy_drift",
    "solver_method",
    "max_residual",
    "propagator_used",
    "code_version",
    "frequencies",
    "points",
];

/// Twelve significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn opt(x: Option<f64>) -> String {
    format_real(x.unwrap_or(f64::NAN))
}

pub fn render_trajectory(series: &ObservableSeries<f64>) -> String {
    let mut s = String::with_capacity(100 * (series.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for (k, d) in series.densities.iter().enumerate() {
        let p = d.polarization;
        let row = [series.times[k], p[0], p[1], p[2], d.entropy, series.interaction[k]];
        let cells: Vec<String> = row.iter().map(|&x| format_real(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Rows `(E_n, <Sx>_n)`, numbered from 1.
pub fn render_spectrum(rows: &[(f64, f64)]) -> String {
    let mut s = String::new();
    s.push_str(SPECTRUM_HEADER);
    s.push('\n');
    for (k, (e, sx)) in rows.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", k + 1, format_real(*e), format_real(*sx));
    }
    s
}

pub fn render_summary<'a>(points: impl IntoIterator<Item = &'a ScenarioPoint<f64>>) -> String {
    let mut s = String::new();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for p in points {
        let m = &p.summary;
        let cells = [
            format_real(p.lambda),
            format_real(p.kt),
            opt(m.s0_late_avg),
            opt(m.pz_late_avg),
            opt(m.hi_time_avg),
            opt(m.avg_sigma_x),
            opt(m.beta_prime),
            opt(m.flatness),
        ];
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn point_file(scenario: &str, p: &ScenarioPoint<f64>) -> String {
    if p.series.is_some() {
        format!("{scenario}_N{}_lambda{}_kT{}.csv", p.n_bath, p.lambda, p.kt)
    } else {
        format!("{scenario}_N{}_lambda{}_spectrum.csv", p.n_bath, p.lambda)
    }
}

fn summary_file(scenario: &str, n: usize) -> String {
    format!("{scenario}_N{n}_summary.csv")
}

fn manifest_file(scenario: &str) -> String {
    format!("{scenario}_manifest.toml")
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NAN, f64::max)
}

/// Run configuration followed by run-level and per-point diagnostics.
pub fn render_manifest(output: &ScenarioOutput<f64>) -> String {
    let mut table = toml::Table::try_from(&output.config).expect("config serializes to a table");
    let pts = &output.points;
    let diag = |f: fn(&ScenarioPoint<f64>) -> Option<f64>| max_of(pts.iter().filter_map(f));
    let mut methods: Vec<&str> = pts.iter().map(|p| p.diagnostics.solver_method.as_str()).collect();
    methods.dedup();
    let mut props: Vec<&str> = pts
        .iter()
        .filter_map(|p| p.diagnostics.propagator.map(|k| k.as_str()))
        .collect();
    props.dedup();
    let entries = [
        (
            "truncation_bound",
            Value::Float(diag(|p| p.diagnostics.truncation_bound)),
        ),
        ("ratio_r", Value::Float(diag(|p| p.diagnostics.ratio_r))),
        (
            "max_norm_drift",
            Value::Float(diag(|p| Some(p.diagnostics.max_norm_drift))),
        ),
        (
            "max_energy_drift",
            Value::Float(diag(|p| Some(p.diagnostics.max_energy_drift))),
        ),
        ("solver_method", Value::String(methods.join(","))),
        ("max_residual", Value::Float(diag(|p| Some(p.diagnostics.max_residual)))),
        ("propagator_used", Value::String(props.join(","))),
        ("code_version", Value::String(env!("CARGO_PKG_VERSION").to_string())),
        (
            "frequencies",
            Value::Array(output.omegas.iter().map(|&w| Value::Float(w)).collect()),
        ),
    ];
    for (k, v) in entries {
        table.insert(k.to_string(), v);
    }
    let scenario = output.config.scenario.as_str();
    let points: Vec<Value> = pts
        .iter()
        .map(|p| {
            let d = &p.diagnostics;
            let mut t = toml::Table::new();
            t.insert("file".into(), Value::String(point_file(scenario, p)));
            t.insert("N".into(), Value::Integer(p.n_bath as i64));
            t.insert("lambda".into(), Value::Float(p.lambda));
            t.insert("kT".into(), Value::Float(p.kt));
            t.insert("solver_method".into(), Value::String(d.solver_method.as_str().into()));
            t.insert("max_residual".into(), Value::Float(d.max_residual));
            t.insert(
                "truncation_bound".into(),
                Value::Float(d.truncation_bound.unwrap_or(f64::NAN)),
            );
            t.insert("ratio_r".into(), Value::Float(d.ratio_r.unwrap_or(f64::NAN)));
            t.insert("ensemble_size".into(), Value::Integer(d.ensemble_size as i64));
            if let Some(k) = d.propagator {
                t.insert("propagator".into(), Value::String(k.as_str().into()));
            }
            t.insert("max_norm_drift".into(), Value::Float(d.max_norm_drift));
            t.insert("max_energy_drift".into(), Value::Float(d.max_energy_drift));
            if let Some(r) = d.reference_rms {
                t.insert(
                    "reference_rms".into(),
                    Value::Array(r.iter().map(|&x| Value::Float(x)).collect()),
                );
            }
            if let Some(e) = d.isolation_error {
                t.insert("isolation_error".into(), Value::Float(e));
            }
            Value::Table(t)
        })
        .collect();
    table.insert("points".into(), Value::Array(points));
    toml::to_string(&table).expect("manifest serializes")
}

/// Recovers the run configuration from a manifest.
pub fn read_manifest(text: &str) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| config_error("manifest", e.message().to_string()))?;
    for k in MANIFEST_KEYS {
        table.remove(k);
    }
    table.try_into().map_err(super::toml_error)
}

/// Writes one CSV per job, one summary per bath size and the manifest.
///
/// Every file is first written under a temporary name; the renames happen
/// only after all writes succeeded.
pub fn emit_series(output: &ScenarioOutput<f64>, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let scenario = output.config.scenario.as_str();
    let mut files: Vec<(String, String)> = Vec::new();
    for p in &output.points {
        let body = match (&p.series, &p.spectrum) {
            (Some(series), _) => render_trajectory(series),
            (None, Some(rows)) => render_spectrum(rows),
            (None, None) => continue,
        };
        files.push((point_file(scenario, p), body));
    }
    for n in output.config.bath_sizes() {
        let body = render_summary(output.points.iter().filter(|p| p.n_bath == n));
        files.push((summary_file(scenario, n), body));
    }
    files.push((manifest_file(scenario), render_manifest(output)));

    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, body) in &files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = std::fs::write(&tmp, body) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(CliError::io(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, dest) in staged {
        std::fs::rename(&tmp, &dest).map_err(|e| CliError::io(&dest, e))?;
        written.push(dest);
    }
    Ok(written)
}
