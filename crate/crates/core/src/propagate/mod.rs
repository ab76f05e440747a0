//! Time evolution of full-system states under `H`.
//!
//! The general path is an adaptive eighth-order Runge–Kutta integrator that
//! needs only matrix-free applications of `H`. For spaces small enough to
//! diagonalize, [`SpectralPropagator`] evolves exactly in the eigenbasis.

mod dop853;
mod spectral;

use num_complex::Complex;
use thiserror::Error;

use crate::hilbert::{inner, FlipOperator, LinearOperator, SpinBathModel, StateVector};
use crate::scalar::Real;

pub use spectral::SpectralPropagator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("invalid propagation settings: {0}")]
    InvalidSettings(String),
    #[error("initial state has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("state dimension {found} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("norm drift {drift:e} at t = {time} exceeds limit {limit:e}")]
    NormDrift { time: f64, drift: f64, limit: f64 },
    #[error("step size underflow ({step:e}) at t = {time}")]
    StepUnderflow { time: f64, step: f64 },
    #[error("ensemble member {index}: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<PropagateError>,
    },
}

/// Integration tolerances and the times at which states are reported.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSettings<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    /// Allowed `| ||psi|| - 1 |` at any output time.
    pub norm_drift_limit: T,
    /// Strictly increasing, starting at 0.
    pub output_grid: Vec<T>,
}

impl<T: Real> PropagationSettings<T> {
    pub fn new(output_grid: Vec<T>) -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_step: T::one(),
            norm_drift_limit: T::lit(1e-8),
            output_grid,
        }
    }

    /// Grid `0, dt, 2 dt, ...` up to `tmax` (included when it is a multiple
    /// of `dt` within rounding).
    pub fn uniform(tmax: T, dt: T) -> Self {
        Self::new(uniform_grid(tmax, dt))
    }

    pub fn validate(&self) -> Result<(), PropagateError> {
        let bad = |msg: &str| Err(PropagateError::InvalidSettings(msg.into()));
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return bad("tolerances must be positive");
        }
        if !(self.max_step > T::zero()) {
            return bad("max_step must be positive");
        }
        if !positive(self.norm_drift_limit) {
            return bad("norm_drift_limit must be positive");
        }
        match self.output_grid.first() {
            Some(&t0) if t0 == T::zero() => {}
            _ => return bad("output grid must start at 0"),
        }
        if self.output_grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return bad("output grid must be strictly increasing");
        }
        Ok(())
    }
}

pub fn uniform_grid<T: Real>(tmax: T, dt: T) -> Vec<T> {
    if !(dt > T::zero()) || !(tmax >= T::zero()) {
        return vec![T::zero()];
    }
    let steps = (tmax / dt + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=steps).map(|k| T::from_usize_lossy(k) * dt).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub applications: usize,
}

/// Worst-case conservation errors seen along a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Drift<T> {
    pub max_norm_drift: T,
    pub max_energy_drift: T,
}

impl<T: Real> Drift<T> {
    pub fn merge(self, other: Self) -> Self {
        Self {
            max_norm_drift: self.max_norm_drift.max(other.max_norm_drift),
            max_energy_drift: self.max_energy_drift.max(other.max_energy_drift),
        }
    }
}

/// The state at one output time, as seen by a streaming observer.
pub struct GridPoint<'a, T> {
    pub index: usize,
    pub time: T,
    pub amplitudes: &'a [Complex<T>],
    pub norm: T,
    pub energy: T,
}

/// Evolves `psi0` under `op` and hands each output-grid state to `observer`
/// without storing the trajectory.
///
/// The norm is monitored, never corrected: a drift beyond the configured
/// limit aborts the integration.
pub fn evolve_streaming<T, O, F>(
    op: &O,
    psi0: &StateVector<T>,
    settings: &PropagationSettings<T>,
    mut observer: F,
) -> Result<(Drift<T>, IntegrationStats), PropagateError>
where
    T: Real,
    O: LinearOperator<T> + ?Sized,
    F: FnMut(GridPoint<'_, T>),
{
    settings.validate()?;
    check_initial(op.dim(), psi0)?;
    let mut hpsi = vec![Complex::new(T::zero(), T::zero()); psi0.dim()];
    let mut energy0 = T::zero();
    let mut drift: Drift<T> = Drift::default();
    let stats = dop853::integrate(op, psi0.amplitudes(), settings, |index, time, amps| {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let nd = (norm - T::one()).abs();
        if nd > settings.norm_drift_limit {
            return Err(PropagateError::NormDrift {
                time: time.to_f64().unwrap_or(f64::NAN),
                drift: nd.to_f64().unwrap_or(f64::NAN),
                limit: settings.norm_drift_limit.to_f64().unwrap_or(f64::NAN),
            });
        }
        op.apply_complex(amps, &mut hpsi);
        let energy = inner(amps, &hpsi).re;
        if index == 0 {
            energy0 = energy;
        }
        drift.max_norm_drift = drift.max_norm_drift.max(nd);
        drift.max_energy_drift = drift.max_energy_drift.max((energy - energy0).abs());
        observer(GridPoint {
            index,
            time,
            amplitudes: amps,
            norm,
            energy,
        });
        Ok(())
    })?;
    Ok((drift, stats))
}

fn check_initial<T: Real>(dim: usize, psi0: &StateVector<T>) -> Result<(), PropagateError> {
    if psi0.dim() != dim {
        return Err(PropagateError::DimensionMismatch {
            expected: dim,
            found: psi0.dim(),
        });
    }
    let norm = psi0.norm();
    if (norm - T::one()).abs() > T::lit(1e-10) {
        return Err(PropagateError::NotNormalized {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// A single stored trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub norm_log: Vec<T>,
    pub energy_log: Vec<T>,
    pub stats: IntegrationStats,
}

impl<T: Real> Trajectory<T> {
    pub fn max_norm_drift(&self) -> T {
        self.norm_log
            .iter()
            .map(|&n| (n - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    pub fn max_energy_drift(&self) -> T {
        let e0 = self.energy_log.first().copied().unwrap_or(T::zero());
        self.energy_log.iter().map(|&e| (e - e0).abs()).fold(T::zero(), T::max)
    }
}

/// Evolves `psi0` under an arbitrary operator and stores every grid state.
pub fn evolve_with<T, O>(
    op: &O,
    psi0: &StateVector<T>,
    settings: &PropagationSettings<T>,
) -> Result<Trajectory<T>, PropagateError>
where
    T: Real,
    O: LinearOperator<T> + ?Sized,
{
    let n_times = settings.output_grid.len();
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_times),
        states: Vec::with_capacity(n_times),
        norm_log: Vec::with_capacity(n_times),
        energy_log: Vec::with_capacity(n_times),
        stats: IntegrationStats::default(),
    };
    let (_, stats) = evolve_streaming(op, psi0, settings, |p| {
        traj.times.push(p.time);
        traj.states
            .push(StateVector::from_amplitudes(p.amplitudes.to_vec()).expect("power-of-two dimension"));
        traj.norm_log.push(p.norm);
        traj.energy_log.push(p.energy);
    })?;
    traj.stats = stats;
    Ok(traj)
}

/// `psi(t) = exp(-i H t) psi0` on the settings' output grid.
pub fn evolve<T: Real>(
    model: &SpinBathModel<T>,
    psi0: &StateVector<T>,
    settings: &PropagationSettings<T>,
) -> Result<Trajectory<T>, PropagateError> {
    evolve_with(&FlipOperator::hamiltonian(model), psi0, settings)
}

/// Independent trajectories for a list of initial states.
#[derive(Debug, Clone)]
pub struct TrajectorySet<T> {
    pub model: SpinBathModel<T>,
    pub times: Vec<T>,
    pub members: Vec<Trajectory<T>>,
}

impl<T: Real> TrajectorySet<T> {
    /// Every member's state at output index `k`.
    pub fn states_at(&self, k: usize) -> Vec<&StateVector<T>> {
        self.members.iter().map(|m| &m.states[k]).collect()
    }

    pub fn max_norm_drift(&self) -> T {
        self.members
            .iter()
            .map(Trajectory::max_norm_drift)
            .fold(T::zero(), T::max)
    }

    pub fn max_energy_drift(&self) -> T {
        self.members
            .iter()
            .map(Trajectory::max_energy_drift)
            .fold(T::zero(), T::max)
    }
}

pub fn evolve_ensemble<T: Real>(
    model: &SpinBathModel<T>,
    initial_states: &[StateVector<T>],
    settings: &PropagationSettings<T>,
) -> Result<TrajectorySet<T>, PropagateError> {
    let h = FlipOperator::hamiltonian(model);
    let members = initial_states
        .iter()
        .enumerate()
        .map(|(index, psi0)| {
            evolve_with(&h, psi0, settings).map_err(|e| PropagateError::Member {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrajectorySet {
        model: model.clone(),
        times: settings.output_grid.clone(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ModelParams, Negated};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(n: usize, lambda: f64, seed: u64) -> SpinBathModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModelParams::with_frequencies((0..n).map(|_| rng.gen_range(0.0..1.0)).collect(), lambda)
            .build()
            .unwrap()
    }

    #[test]
    fn null_generator_leaves_state_unchanged() {
        let model = SpinBathModel::<f64>::null(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi0 = StateVector::random(16, &mut rng);
        let traj = evolve(&model, &psi0, &PropagationSettings::uniform(10.0, 1.0)).unwrap();
        for s in &traj.states {
            assert!(s.max_abs_diff(&psi0) < 1e-15);
        }
    }

    #[test]
    fn free_central_spin_phase() {
        let mut p = ModelParams::with_frequencies(vec![], 0.0);
        p.beta = 0.0;
        let model = p.build().unwrap();
        let psi0 = StateVector::basis(2, 1).unwrap();
        let traj = evolve(&model, &psi0, &PropagationSettings::uniform(100.0, 10.0)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = psi0.scaled(Complex::from_polar(1.0, -0.8288 * t / 2.0));
            assert!(s.fidelity(&exact) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn grid_times_are_hit_exactly() {
        let model = random_model(3, 1.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi0 = StateVector::random(16, &mut rng);
        let grid = vec![0.0, 0.013, 0.5, 0.51, 3.0];
        let traj = evolve(&model, &psi0, &PropagationSettings::new(grid.clone())).unwrap();
        assert_eq!(traj.times, grid);
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let model = random_model(4, 2.0, 9);
        let h = FlipOperator::hamiltonian(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi0 = StateVector::random(32, &mut rng);
        let settings = PropagationSettings::uniform(20.0, 20.0);
        let forward = evolve_with(&h, &psi0, &settings).unwrap();
        let back = evolve_with(&Negated(&h), forward.states.last().unwrap(), &settings).unwrap();
        assert!(back.states.last().unwrap().fidelity(&psi0) > 1.0 - 1e-8);
    }

    #[test]
    fn settings_validation() {
        assert!(PropagationSettings::<f64>::new(vec![0.0, 1.0, 1.0]).validate().is_err());
        assert!(PropagationSettings::<f64>::new(vec![0.5, 1.0]).validate().is_err());
        let mut s = PropagationSettings::<f64>::uniform(1.0, 0.5);
        assert_eq!(s.output_grid, vec![0.0, 0.5, 1.0]);
        s.rel_tol = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let model = random_model(2, 0.0, 1);
        let psi0 = StateVector::basis(8, 1).unwrap().scaled(Complex::new(2.0, 0.0));
        assert!(matches!(
            evolve(&model, &psi0, &PropagationSettings::uniform(1.0, 1.0)),
            Err(PropagateError::NotNormalized { .. })
        ));
    }

    #[test]
    fn loose_tolerance_trips_norm_monitor() {
        let model = random_model(4, 5.0, 4);
        let psi0 = StateVector::basis(32, 1).unwrap();
        let mut s = PropagationSettings::uniform(200.0, 10.0);
        s.rel_tol = 1e-3;
        s.abs_tol = 1e-3;
        s.norm_drift_limit = 1e-12;
        assert!(matches!(
            evolve(&model, &psi0, &s),
            Err(PropagateError::NormDrift { .. })
        ));
    }
}
