use super::analysis::{fit_beta_prime, time_average, FIT_WINDOW_END};
use super::analytic::{reference_rms, AnalyticReference};
use super::config::{PropagatorChoice, RunConfig, ScenarioKind};
use super::frequency::{sample_frequencies, FrequencySpec};
use super::ScenarioError;
use crate::eigensolve::{
    dense_spectrum, lanczos_lowest, resolve_multiplets, BathSpectrum, EigenError, LanczosOptions, SolverMethod,
    DEFAULT_MULTIPLET_GAP, MAX_DENSE_DIM,
};
use crate::ensemble::{
    avg_sigma_x, observe_trajectories, sigma_x_expectations, ObservableSeries, SpectralObservables, ThermalEnsemble,
};
use crate::hilbert::{FlipOperator, ModelParams, SpinBathModel};
use crate::propagate::{PropagationSettings, SpectralPropagator};
use crate::scalar::Real;

/// Largest deviation from free precession accepted when the central spin is
/// decoupled.
pub const ISOLATION_TOL: f64 = 1e-6;

/// Number of lowest bath states averaged by `avg_sigma_x`.
pub const SIGMA_X_COUNT: usize = 20;

/// Bath spectrum with degenerate multiplets rotated to diagonalize `Sx`.
///
/// Dense when the bath space fits the dense solver (every eigenpair),
/// otherwise the `m` lowest pairs from Lanczos.
pub fn bath_spectrum<T: Real>(model: &SpinBathModel<T>, m: usize, seed: u64) -> Result<BathSpectrum<T>, EigenError> {
    let hb = FlipOperator::bath_hamiltonian(model);
    let mut spec = if model.bath_dim() <= MAX_DENSE_DIM {
        dense_spectrum(&hb)?
    } else {
        lanczos_lowest(&hb, m, &LanczosOptions::new(seed))?
    };
    let sx = FlipOperator::total_sigma_x(model.n_bath(), true);
    resolve_multiplets(&mut spec, &hb, &sx, T::lit(DEFAULT_MULTIPLET_GAP))?;
    Ok(spec)
}

/// Thermal ensemble of at least `m` states. With a complete spectrum the
/// ensemble grows until the discarded weight is within `bound_tol`.
pub fn thermal_ensemble<T: Real>(
    spectrum: &BathSpectrum<T>,
    m: usize,
    kt: T,
    bound_tol: T,
) -> Result<ThermalEnsemble<T>, crate::ensemble::EnsembleError> {
    if spectrum.is_complete() {
        ThermalEnsemble::build_converged(spectrum, m.min(spectrum.len()), kt, bound_tol)
    } else {
        ThermalEnsemble::build(spectrum, m, kt, bound_tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary<T> {
    pub s0_late_avg: Option<T>,
    pub pz_late_avg: Option<T>,
    pub hi_time_avg: Option<T>,
    pub avg_sigma_x: Option<T>,
    pub beta_prime: Option<T>,
    pub flatness: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointDiagnostics<T> {
    pub solver_method: SolverMethod,
    pub max_residual: T,
    /// `None` when the bath spectrum is truncated.
    pub truncation_bound: Option<T>,
    pub ratio_r: Option<T>,
    pub ensemble_size: usize,
    /// `Rk8` or `Spectral`; `None` when nothing was evolved.
    pub propagator: Option<PropagatorChoice>,
    pub max_norm_drift: T,
    pub max_energy_drift: T,
    /// RMS distance per component to the analytic precession on `[0, 20]`.
    pub reference_rms: Option<[T; 3]>,
    /// Largest deviation from free precession over the whole run.
    pub isolation_error: Option<T>,
}

/// One `(N, lambda, kT)` job.
#[derive(Debug, Clone)]
pub struct ScenarioPoint<T> {
    pub n_bath: usize,
    pub lambda: T,
    pub kt: T,
    pub series: Option<ObservableSeries<T>>,
    /// `(E_n, <Sx>_n)` in ascending energy.
    pub spectrum: Option<Vec<(T, T)>>,
    pub summary: PointSummary<T>,
    pub diagnostics: PointDiagnostics<T>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput<T> {
    pub config: RunConfig,
    /// The shared frequency draw; smaller baths use a prefix.
    pub omegas: Vec<T>,
    pub points: Vec<ScenarioPoint<T>>,
}

impl<T: Real> ScenarioOutput<T> {
    /// Diagnostics outside their configured bounds, one message each.
    pub fn failures(&self) -> Vec<String> {
        let cfg = &self.config;
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let mut out = Vec::new();
        for p in &self.points {
            let tag = format!("N={} lambda={} kT={}", p.n_bath, f(p.lambda), f(p.kt));
            let d = &p.diagnostics;
            if !(f(d.max_residual) <= cfg.residual_tol) {
                out.push(format!(
                    "{tag}: eigenpair residual {:e} exceeds {:e}",
                    f(d.max_residual),
                    cfg.residual_tol
                ));
            }
            if !(f(d.max_norm_drift) <= cfg.norm_drift_limit) {
                out.push(format!(
                    "{tag}: norm drift {:e} exceeds {:e}",
                    f(d.max_norm_drift),
                    cfg.norm_drift_limit
                ));
            }
            if let Some(e) = d.isolation_error {
                if !(f(e) <= ISOLATION_TOL) {
                    out.push(format!("{tag}: isolation error {:e} exceeds {ISOLATION_TOL:e}", f(e)));
                }
            }
        }
        out
    }
}

fn context(n: usize, lambda: f64, kt: Option<f64>, step: &str) -> String {
    match kt {
        Some(kt) => format!("N={n} lambda={lambda} kT={kt}: {step}"),
        None => format!("N={n} lambda={lambda}: {step}"),
    }
}

/// Seed of the Lanczos start vector for job `index`.
fn job_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    super::frequency::rng_for(seed, index + 1).next_u64()
}

fn model_for<T: Real>(cfg: &RunConfig, omegas: &[T], lambda: f64) -> Result<SpinBathModel<T>, ScenarioError> {
    let lambda0 = if cfg.scenario == ScenarioKind::IsolationCheck {
        0.0
    } else {
        cfg.lambda0
    };
    ModelParams {
        omega0: T::lit(cfg.omega0),
        beta: T::lit(cfg.beta),
        lambda0: T::lit(lambda0),
        lambda: T::lit(lambda),
        omegas: omegas.to_vec(),
        omega_c: T::lit(cfg.omega_c),
    }
    .build()
    .map_err(|source| ScenarioError::Model {
        context: context(omegas.len(), lambda, None, "model"),
        source,
    })
}

/// Evolution backend shared by every temperature of one model.
enum Evolver<T> {
    Spectral(SpectralObservables<T>),
    Rk8(PropagationSettings<T>),
}

impl<T: Real> Evolver<T> {
    fn new(cfg: &RunConfig, model: &SpinBathModel<T>, grid: &[T]) -> Result<Self, ScenarioError> {
        let spectral = match cfg.propagator {
            PropagatorChoice::Auto => model.full_dim() <= MAX_DENSE_DIM,
            PropagatorChoice::Spectral => true,
            PropagatorChoice::Rk8 => false,
        };
        let ctx = |step| context(model.n_bath(), model.lambda().to_f64().unwrap_or(f64::NAN), None, step);
        if spectral {
            let prop = SpectralPropagator::new(model).map_err(|source| ScenarioError::Eigen {
                context: ctx("full spectrum"),
                source,
            })?;
            let obs = SpectralObservables::new(model, &prop).map_err(|source| ScenarioError::Ensemble {
                context: ctx("spectral observables"),
                source,
            })?;
            Ok(Evolver::Spectral(obs))
        } else {
            let settings = PropagationSettings {
                rel_tol: T::lit(cfg.rel_tol),
                abs_tol: T::lit(cfg.abs_tol),
                max_step: T::lit(cfg.max_step),
                norm_drift_limit: T::lit(cfg.norm_drift_limit),
                output_grid: grid.to_vec(),
            };
            Ok(Evolver::Rk8(settings))
        }
    }

    fn kind(&self) -> PropagatorChoice {
        match self {
            Evolver::Spectral(_) => PropagatorChoice::Spectral,
            Evolver::Rk8(_) => PropagatorChoice::Rk8,
        }
    }

    /// Series plus `(norm drift, energy drift)`.
    fn run(
        &self,
        model: &SpinBathModel<T>,
        ensemble: &ThermalEnsemble<T>,
        grid: &[T],
        ctx: String,
    ) -> Result<(ObservableSeries<T>, T, T), ScenarioError> {
        match self {
            Evolver::Spectral(obs) => {
                let series = obs
                    .series(ensemble, grid)
                    .map_err(|source| ScenarioError::Ensemble { context: ctx, source })?;
                // The spectral path is unitary by construction; the trace
                // records the round-off of the basis change instead.
                let drift = series
                    .densities
                    .iter()
                    .map(|d| (d.trace().re - T::one()).abs())
                    .fold(T::zero(), T::max);
                Ok((series, drift, T::zero()))
            }
            Evolver::Rk8(settings) => {
                let (series, drift) = observe_trajectories(model, ensemble, settings)
                    .map_err(|source| ScenarioError::Propagate { context: ctx, source })?;
                Ok((series, drift.max_norm_drift, drift.max_energy_drift))
            }
        }
    }
}

fn polarizations<T: Real>(series: &ObservableSeries<T>) -> Vec<[T; 3]> {
    series.densities.iter().map(|d| d.polarization).collect()
}

/// Runs every `(N, lambda, kT)` job of `config` in a fixed order.
pub fn run_scenario<T: Real>(config: &RunConfig) -> Result<ScenarioOutput<T>, ScenarioError> {
    let cfg = config.clone().resolved();
    cfg.validate()?;
    let sizes = cfg.bath_sizes();
    let freq = FrequencySpec {
        kind: cfg.dist,
        omega_c: T::lit(cfg.omega_c),
        seed: cfg.seed,
    };
    let omegas = sample_frequencies(&freq, *sizes.iter().max().expect("at least one size"));
    let grid = crate::propagate::uniform_grid(T::lit(cfg.tmax), T::lit(cfg.dt_out));
    let t_last = *grid.last().expect("non-empty grid");
    let (late_start, _) = cfg.late_window();
    let mut points = Vec::new();
    let mut job = 0u64;

    for &n in &sizes {
        for &lambda in &cfg.lambda {
            let model = model_for(&cfg, &omegas[..n], lambda)?;
            let spectrum =
                bath_spectrum(&model, cfg.m, job_seed(cfg.seed, job)).map_err(|source| ScenarioError::Eigen {
                    context: context(n, lambda, None, "bath spectrum"),
                    source,
                })?;
            job += 1;
            let avg_sx = avg_sigma_x(&spectrum, SIGMA_X_COUNT.min(spectrum.len())).ok();

            if !cfg.scenario.evolves() {
                let rows = spectrum
                    .energies()
                    .into_iter()
                    .zip(sigma_x_expectations(&spectrum))
                    .collect();
                points.push(ScenarioPoint {
                    n_bath: n,
                    lambda: T::lit(lambda),
                    kt: T::lit(cfg.kt[0]),
                    series: None,
                    spectrum: Some(rows),
                    summary: PointSummary {
                        s0_late_avg: None,
                        pz_late_avg: None,
                        hi_time_avg: None,
                        avg_sigma_x: avg_sx,
                        beta_prime: None,
                        flatness: None,
                    },
                    diagnostics: PointDiagnostics {
                        solver_method: spectrum.method(),
                        max_residual: spectrum.max_residual(),
                        truncation_bound: None,
                        ratio_r: None,
                        ensemble_size: 0,
                        propagator: None,
                        max_norm_drift: T::zero(),
                        max_energy_drift: T::zero(),
                        reference_rms: None,
                        isolation_error: None,
                    },
                });
                continue;
            }

            let evolver = Evolver::new(&cfg, &model, &grid)?;
            for &kt in &cfg.kt {
                let ensemble =
                    thermal_ensemble(&spectrum, cfg.m, T::lit(kt), T::lit(cfg.bound_tol)).map_err(|source| {
                        ScenarioError::Ensemble {
                            context: context(n, lambda, Some(kt), "thermal ensemble"),
                            source,
                        }
                    })?;
                let (series, norm_drift, energy_drift) =
                    evolver.run(&model, &ensemble, &grid, context(n, lambda, Some(kt), "evolution"))?;
                let series = series.with_seed(cfg.seed);

                let times = &series.times;
                let late = T::lit(late_start).min(t_last);
                let averages = |v: &[T], t1: T| time_average(times, v, t1, t_last).ok();
                let s0_late = averages(&series.entropy(), late);
                let pz_late = averages(&series.pz(), late);
                let hi_avg = averages(&series.interaction, T::zero());
                let fit = fit_beta_prime(&series).ok();

                let p = polarizations(&series);
                let (reference_rms_v, isolation_error) = match cfg.scenario {
                    ScenarioKind::IsolationCheck => {
                        let r = AnalyticReference::new(model.beta(), model.omega0());
                        let err = times
                            .iter()
                            .zip(&p)
                            .flat_map(|(&t, pt)| {
                                let q = r.polarization(t);
                                (0..3).map(move |k| (pt[k] - q[k]).abs())
                            })
                            .fold(T::zero(), T::max);
                        (Some(reference_rms(&r, times, &p, T::lit(FIT_WINDOW_END))), Some(err))
                    }
                    ScenarioKind::FerroScan => {
                        let rms = fit.map(|f| {
                            let r = AnalyticReference::new(model.beta() + f.value, model.omega0());
                            reference_rms(&r, times, &p, T::lit(FIT_WINDOW_END))
                        });
                        (rms, None)
                    }
                    _ => (None, None),
                };

                points.push(ScenarioPoint {
                    n_bath: n,
                    lambda: T::lit(lambda),
                    kt: T::lit(kt),
                    summary: PointSummary {
                        s0_late_avg: s0_late,
                        pz_late_avg: pz_late,
                        hi_time_avg: hi_avg,
                        avg_sigma_x: avg_sx,
                        beta_prime: fit.map(|f| f.value),
                        flatness: fit.map(|f| f.flatness),
                    },
                    diagnostics: PointDiagnostics {
                        solver_method: spectrum.method(),
                        max_residual: spectrum.max_residual(),
                        truncation_bound: ensemble.truncation_bound(),
                        ratio_r: Some(ensemble.ratio_r()),
                        ensemble_size: ensemble.len(),
                        propagator: Some(evolver.kind()),
                        max_norm_drift: norm_drift,
                        max_energy_drift: energy_drift,
                        reference_rms: reference_rms_v,
                        isolation_error,
                    },
                    series: Some(series),
                    spectrum: None,
                });
            }
        }
    }
    Ok(ScenarioOutput {
        config: cfg,
        omegas,
        points,
    })
}
