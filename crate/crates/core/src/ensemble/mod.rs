//! Thermal bath ensembles, reduced density of the central spin, and the
//! observables built from it.

mod density;
mod observables;
mod spectral;

use thiserror::Error;

use crate::eigensolve::BathSpectrum;
use crate::hilbert::StateVector;
use crate::scalar::Real;

pub use density::{entropy_from_polarization, reduced_density, ReducedDensity};
pub use observables::{
    avg_sigma_x, interaction_average, observe_trajectories, sigma_x_expectations, ObservableSeries, SeriesMetadata,
};
pub use spectral::SpectralObservables;

/// Default bound on the thermal weight left out by truncating the ensemble.
pub const DEFAULT_BOUND_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("temperature must be positive, got {kt}")]
    NonPositiveTemperature { kt: f64 },
    #[error("ensemble needs at least one bath state")]
    Empty,
    #[error("truncation diagnostic {value:e} exceeds bound {bound:e}")]
    TruncationBound { value: f64, bound: f64 },
    #[error("{states} states but {weights} weights")]
    CountMismatch { states: usize, weights: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("requested {requested} states, only {available} available")]
    InsufficientStates { requested: usize, available: usize },
    #[error("{0}")]
    Domain(String),
}

/// Boltzmann-weighted mixture of the lowest bath eigenstates.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble<T> {
    spectrum: BathSpectrum<T>,
    kt: T,
    weights: Vec<T>,
    log_partition: T,
    truncation_bound: Option<T>,
    ratio_r: T,
}

/// `exp(-(E_n - E_0) / kT)` for every level.
fn boltzmann_factors<T: Real>(energies: &[T], kt: T) -> Vec<T> {
    let e0 = energies[0];
    energies.iter().map(|&e| (-(e - e0) / kt).exp()).collect()
}

impl<T: Real> ThermalEnsemble<T> {
    /// Keeps the `m` lowest states of `spectrum`.
    ///
    /// When `spectrum` holds every eigenpair, the diagnostic is the weight
    /// `P(E_B > E_M)` of the discarded levels; otherwise it is the ratio
    /// `r = exp((E_1 - E_M) / kT)`. Construction fails if it exceeds
    /// `bound_tol`.
    pub fn build(spectrum: &BathSpectrum<T>, m: usize, kt: T, bound_tol: T) -> Result<Self, EnsembleError> {
        if !(kt > T::zero()) || !kt.is_finite() {
            return Err(EnsembleError::NonPositiveTemperature {
                kt: kt.to_f64().unwrap_or(f64::NAN),
            });
        }
        if m == 0 || spectrum.is_empty() {
            return Err(EnsembleError::Empty);
        }
        if m > spectrum.len() {
            return Err(EnsembleError::InsufficientStates {
                requested: m,
                available: spectrum.len(),
            });
        }
        let energies = spectrum.energies();
        let factors = boltzmann_factors(&energies, kt);
        let kept: T = factors[..m].iter().copied().sum();
        let weights: Vec<T> = factors[..m].iter().map(|&f| f / kept).collect();
        let log_partition = -energies[0] / kt + kept.ln();
        let ratio_r = ((energies[0] - energies[m - 1]) / kt).exp();
        let truncation_bound = spectrum.is_complete().then(|| {
            let dropped = factors[m..].iter().fold(T::zero(), |a, &b| a + b);
            dropped / (kept + dropped)
        });
        let diagnostic = truncation_bound.unwrap_or(ratio_r);
        if diagnostic > bound_tol {
            return Err(EnsembleError::TruncationBound {
                value: diagnostic.to_f64().unwrap_or(f64::NAN),
                bound: bound_tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            spectrum: spectrum.truncated(m),
            kt,
            weights,
            log_partition,
            truncation_bound,
            ratio_r,
        })
    }

    /// For a complete spectrum: the smallest ensemble of at least `m_min`
    /// states whose discarded weight is within `bound_tol`.
    pub fn build_converged(
        spectrum: &BathSpectrum<T>,
        m_min: usize,
        kt: T,
        bound_tol: T,
    ) -> Result<Self, EnsembleError> {
        if !spectrum.is_complete() || spectrum.is_empty() || !(kt > T::zero()) {
            return Self::build(spectrum, m_min, kt, bound_tol);
        }
        let factors = boltzmann_factors(&spectrum.energies(), kt);
        let total: T = factors.iter().copied().sum();
        let mut kept = T::zero();
        let mut m = 0;
        for (i, &f) in factors.iter().enumerate() {
            kept += f;
            m = i + 1;
            if m >= m_min && (total - kept) / total <= bound_tol {
                break;
            }
        }
        Self::build(spectrum, m.max(m_min.min(spectrum.len())), kt, bound_tol)
    }

    pub fn spectrum(&self) -> &BathSpectrum<T> {
        &self.spectrum
    }

    pub fn kt(&self) -> T {
        self.kt
    }

    /// Normalized weights `w_n`, non-increasing in `n`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `ln Q` over the kept states; `Q` itself overflows easily at low `kT`.
    pub fn log_partition(&self) -> T {
        self.log_partition
    }

    pub fn partition_estimate(&self) -> T {
        self.log_partition.exp()
    }

    /// `P(E_B > E_M)`, available only for a complete spectrum.
    pub fn truncation_bound(&self) -> Option<T> {
        self.truncation_bound
    }

    pub fn ratio_r(&self) -> T {
        self.ratio_r
    }

    /// Full-space initial states `|1>_0 (x) |phi_n>`.
    pub fn embed_initial_states(&self) -> Vec<StateVector<T>> {
        self.spectrum
            .pairs()
            .iter()
            .map(|p| embed_bath_state(&p.vector))
            .collect()
    }
}

/// `|1>_0 (x) |phi>`: bath index `j` lands on full index `2j + 1`.
pub fn embed_bath_state<T: Real>(bath: &[T]) -> StateVector<T> {
    let mut full = StateVector::zeros(2 * bath.len());
    let amps = full.amplitudes_mut();
    for (j, &x) in bath.iter().enumerate() {
        amps[(j << 1) | 1].re = x;
    }
    full
}
