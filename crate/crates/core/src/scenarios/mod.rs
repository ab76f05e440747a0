//! Experiment drivers: frequency draws, coupling and temperature scans,
//! analytic references and the scalar summaries derived from each run.

mod analysis;
mod analytic;
mod config;
mod frequency;
mod runner;

use thiserror::Error;

use crate::eigensolve::EigenError;
use crate::ensemble::EnsembleError;
use crate::hilbert::HilbertError;
use crate::propagate::PropagateError;

pub use analysis::{fit_beta_prime, fit_ratio, time_average, RatioFit, FIT_MASK_FRACTION, FIT_WINDOW_END};
pub use analytic::{analytic_polarization, reference_rms, AnalyticReference};
pub use config::{PropagatorChoice, RunConfig, ScenarioKind};
pub use frequency::{rng_for, sample_frequencies, FrequencyKind, FrequencySpec};
pub use runner::{
    bath_spectrum, run_scenario, thermal_ensemble, PointDiagnostics, PointSummary, ScenarioOutput, ScenarioPoint,
    ISOLATION_TOL, SIGMA_X_COUNT,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("averaging window [{start}, {end}] is empty or outside the series")]
    EmptyWindow { start: f64, end: f64 },
    #[error("ratio fit has {found} usable points, needs {needed}")]
    InsufficientPoints { found: usize, needed: usize },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: HilbertError,
    },
    #[error("{context}: {source}")]
    Eigen {
        context: String,
        #[source]
        source: EigenError,
    },
    #[error("{context}: {source}")]
    Ensemble {
        context: String,
        #[source]
        source: EnsembleError,
    },
    #[error("{context}: {source}")]
    Propagate {
        context: String,
        #[source]
        source: PropagateError,
    },
}

impl ScenarioError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Config { .. } => "config",
            ScenarioError::EmptyWindow { .. } => "empty-window",
            ScenarioError::InsufficientPoints { .. } => "insufficient-points",
            ScenarioError::Model { .. } => "model",
            ScenarioError::Eigen { .. } => "eigensolver",
            ScenarioError::Ensemble {
                source: EnsembleError::TruncationBound { .. },
                ..
            } => "truncation-bound",
            ScenarioError::Ensemble { .. } => "ensemble",
            ScenarioError::Propagate {
                source: PropagateError::NormDrift { .. },
                ..
            } => "norm-drift",
            ScenarioError::Propagate { .. } => "propagation",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ScenarioKind) -> RunConfig {
        RunConfig {
            lambda: vec![0.0, 2.0],
            kt: vec![0.5],
            m: 4,
            tmax: 10.0,
            dt_out: 0.5,
            bound_tol: 1.0,
            ..RunConfig::new(kind, 3)
        }
    }

    #[test]
    fn isolated_spin_precesses_freely() {
        let out = run_scenario::<f64>(&small(ScenarioKind::IsolationCheck)).unwrap();
        assert_eq!(out.points.len(), 2);
        for p in &out.points {
            assert!(p.diagnostics.isolation_error.unwrap() < 1e-6);
            let s = p.series.as_ref().unwrap();
            assert!(s.entropy().iter().all(|&x| x.abs() < 1e-9));
        }
        assert!(out.failures().is_empty());
    }

    #[test]
    fn both_propagators_agree() {
        let spectral = run_scenario::<f64>(&small(ScenarioKind::AntiferroScan)).unwrap();
        let rk = run_scenario::<f64>(&RunConfig {
            propagator: PropagatorChoice::Rk8,
            ..small(ScenarioKind::AntiferroScan)
        })
        .unwrap();
        for (a, b) in spectral.points.iter().zip(&rk.points) {
            assert_eq!(a.diagnostics.propagator, Some(PropagatorChoice::Spectral));
            assert_eq!(b.diagnostics.propagator, Some(PropagatorChoice::Rk8));
            let (sa, sb) = (a.series.as_ref().unwrap(), b.series.as_ref().unwrap());
            for (x, y) in sa.pz().iter().zip(sb.pz()) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = small(ScenarioKind::OddEven);
        let a = run_scenario::<f64>(&cfg).unwrap();
        let b = run_scenario::<f64>(&cfg).unwrap();
        assert_eq!(a.omegas, b.omegas);
        assert_eq!(a.points.len(), 4);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.n_bath, q.n_bath);
            assert_eq!(p.summary, q.summary);
            assert_eq!(p.series.as_ref().unwrap().pz(), q.series.as_ref().unwrap().pz());
        }
    }

    #[test]
    fn spectrum_scenario_lists_every_level() {
        let out = run_scenario::<f64>(&small(ScenarioKind::SigmaXSpectrum)).unwrap();
        let rows = out.points[0].spectrum.as_ref().unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0 + 1e-9));
        assert!(out.points[0].series.is_none());
    }

    #[test]
    fn truncation_failure_names_the_job() {
        let cfg = RunConfig {
            bound_tol: 1e-12,
            kt: vec![50.0],
            ..small(ScenarioKind::AntiferroScan)
        };
        let cfg = RunConfig { m: 2, ..cfg };
        // A complete spectrum grows the ensemble instead of failing.
        assert!(run_scenario::<f64>(&cfg).is_ok());
        let err = run_scenario::<f64>(&RunConfig {
            n: 13,
            tmax: 0.5,
            dt_out: 0.5,
            ..cfg
        })
        .unwrap_err();
        assert_eq!(err.kind(), "truncation-bound");
        assert!(err.to_string().contains("N=13"), "{err}");
    }
}
