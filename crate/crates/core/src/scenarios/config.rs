use serde::{Deserialize, Serialize};

use super::frequency::FrequencyKind;
use super::ScenarioError;
use crate::ensemble::DEFAULT_BOUND_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    AntiferroScan,
    FerroScan,
    TempScan,
    OddEven,
    SigmaXSpectrum,
    InteractionAverage,
    IsolationCheck,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::AntiferroScan,
        ScenarioKind::FerroScan,
        ScenarioKind::TempScan,
        ScenarioKind::OddEven,
        ScenarioKind::SigmaXSpectrum,
        ScenarioKind::InteractionAverage,
        ScenarioKind::IsolationCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::AntiferroScan => "antiferro-scan",
            ScenarioKind::FerroScan => "ferro-scan",
            ScenarioKind::TempScan => "temp-scan",
            ScenarioKind::OddEven => "odd-even",
            ScenarioKind::SigmaXSpectrum => "sigma-x-spectrum",
            ScenarioKind::InteractionAverage => "interaction-average",
            ScenarioKind::IsolationCheck => "isolation-check",
        }
    }

    pub fn default_lambdas(self) -> Vec<f64> {
        match self {
            ScenarioKind::AntiferroScan | ScenarioKind::InteractionAverage => {
                vec![0.0, 1.0, 2.0, 5.0, 10.0]
            }
            ScenarioKind::FerroScan => vec![0.0, -1.0, -2.0, -5.0, -10.0],
            ScenarioKind::TempScan => vec![10.0],
            ScenarioKind::OddEven | ScenarioKind::SigmaXSpectrum | ScenarioKind::IsolationCheck => {
                vec![0.0, 10.0]
            }
        }
    }

    pub fn default_kts(self) -> Vec<f64> {
        match self {
            ScenarioKind::TempScan => vec![0.02, 0.2, 2.0, 300.0],
            _ => vec![0.02],
        }
    }

    /// Whether the scenario produces trajectories (all but the bath spectrum).
    pub fn evolves(self) -> bool {
        self != ScenarioKind::SigmaXSpectrum
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.as_str()).collect();
            format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorChoice {
    /// Spectral when the full space fits the dense solver, else `rk8`.
    #[default]
    Auto,
    Rk8,
    Spectral,
}

impl PropagatorChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            PropagatorChoice::Auto => "auto",
            PropagatorChoice::Rk8 => "rk8",
            PropagatorChoice::Spectral => "spectral",
        }
    }
}

mod defaults {
    use super::*;

    pub fn m() -> usize {
        20
    }
    pub fn omega0() -> f64 {
        0.8288
    }
    pub fn beta() -> f64 {
        0.01
    }
    pub fn lambda0() -> f64 {
        1.0
    }
    pub fn omega_c() -> f64 {
        1.0
    }
    pub fn tmax() -> f64 {
        250.0
    }
    pub fn dt_out() -> f64 {
        0.1
    }
    pub fn rel_tol() -> f64 {
        1e-10
    }
    pub fn abs_tol() -> f64 {
        1e-12
    }
    pub fn max_step() -> f64 {
        1.0
    }
    pub fn norm_drift_limit() -> f64 {
        1e-8
    }
    pub fn bound_tol() -> f64 {
        DEFAULT_BOUND_TOL
    }
    pub fn residual_tol() -> f64 {
        1e-8
    }
    pub fn late_fraction() -> f64 {
        0.6
    }
    pub fn dist() -> FrequencyKind {
        FrequencyKind::Debye
    }
}

/// Everything needed to reproduce a run. Field names are the config-file
/// and manifest keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Number of bath spins. Required.
    #[serde(rename = "N")]
    pub n: usize,
    /// Empty means the scenario default.
    #[serde(default)]
    pub lambda: Vec<f64>,
    /// Empty means the scenario default.
    #[serde(rename = "kT", default)]
    pub kt: Vec<f64>,
    /// Ensemble size; a minimum when the full bath spectrum is available.
    #[serde(rename = "M", default = "defaults::m")]
    pub m: usize,
    #[serde(default = "defaults::omega0")]
    pub omega0: f64,
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    #[serde(default = "defaults::lambda0")]
    pub lambda0: f64,
    #[serde(default = "defaults::omega_c")]
    pub omega_c: f64,
    #[serde(default = "defaults::dist")]
    pub dist: FrequencyKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::tmax")]
    pub tmax: f64,
    #[serde(default = "defaults::dt_out")]
    pub dt_out: f64,
    #[serde(default = "defaults::rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "defaults::abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "defaults::max_step")]
    pub max_step: f64,
    #[serde(default = "defaults::norm_drift_limit")]
    pub norm_drift_limit: f64,
    #[serde(default)]
    pub propagator: PropagatorChoice,
    #[serde(default = "defaults::bound_tol")]
    pub bound_tol: f64,
    /// Largest accepted eigenpair residual.
    #[serde(default = "defaults::residual_tol")]
    pub residual_tol: f64,
    /// The late window is `[late_fraction * tmax, tmax]`.
    #[serde(default = "defaults::late_fraction")]
    pub late_fraction: f64,
}

fn invalid(key: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Configuration with every optional field at its default.
    pub fn new(scenario: ScenarioKind, n: usize) -> Self {
        Self {
            scenario,
            n,
            lambda: Vec::new(),
            kt: Vec::new(),
            m: defaults::m(),
            omega0: defaults::omega0(),
            beta: defaults::beta(),
            lambda0: defaults::lambda0(),
            omega_c: defaults::omega_c(),
            dist: defaults::dist(),
            seed: 0,
            tmax: defaults::tmax(),
            dt_out: defaults::dt_out(),
            rel_tol: defaults::rel_tol(),
            abs_tol: defaults::abs_tol(),
            max_step: defaults::max_step(),
            norm_drift_limit: defaults::norm_drift_limit(),
            propagator: PropagatorChoice::Auto,
            bound_tol: defaults::bound_tol(),
            residual_tol: defaults::residual_tol(),
            late_fraction: defaults::late_fraction(),
        }
        .resolved()
    }

    /// Fills empty lists with the scenario defaults.
    pub fn resolved(mut self) -> Self {
        if self.lambda.is_empty() {
            self.lambda = self.scenario.default_lambdas();
        }
        if self.kt.is_empty() {
            self.kt = self.scenario.default_kts();
        }
        self
    }

    /// Bath sizes visited by the run.
    pub fn bath_sizes(&self) -> Vec<usize> {
        match self.scenario {
            ScenarioKind::OddEven => vec![self.n, self.n + 1],
            _ => vec![self.n],
        }
    }

    pub fn late_window(&self) -> (f64, f64) {
        (self.late_fraction * self.tmax, self.tmax)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        use crate::hilbert::MAX_BATH_SPINS;
        let largest = self.bath_sizes().into_iter().max().unwrap_or(self.n);
        if self.n == 0 || largest > MAX_BATH_SPINS {
            return Err(invalid("N", format!("must be in 1..={MAX_BATH_SPINS}, got {}", self.n)));
        }
        if self.lambda.iter().any(|x| !x.is_finite()) {
            return Err(invalid("lambda", "values must be finite"));
        }
        if let Some(kt) = self.kt.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid("kT", format!("temperature must be positive, got {kt}")));
        }
        if self.m == 0 {
            return Err(invalid("M", "must be at least 1"));
        }
        for (key, v) in [
            ("omega_c", self.omega_c),
            ("tmax", self.tmax),
            ("dt_out", self.dt_out),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("norm_drift_limit", self.norm_drift_limit),
            ("bound_tol", self.bound_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [("omega0", self.omega0), ("beta", self.beta), ("lambda0", self.lambda0)] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }
        if self.dt_out > self.tmax {
            return Err(invalid("dt_out", "must not exceed tmax"));
        }
        if !(self.late_fraction >= 0.0 && self.late_fraction < 1.0) {
            return Err(invalid("late_fraction", "must be in [0, 1)"));
        }
        Ok(())
    }
}
