use num_complex::Complex;

use super::density::accumulate_density;
use super::{EnsembleError, ReducedDensity, ThermalEnsemble};
use crate::eigensolve::BathSpectrum;
use crate::hilbert::{inner, FlipOperator, LinearOperator, ModelParams, SpinBathModel, StateVector, SymmetricOperator};
use crate::propagate::{evolve_streaming, Drift, PropagateError, PropagationSettings};
use crate::scalar::Real;

/// `sum_n w_n <psi_n|HI|psi_n>`.
pub fn interaction_average<T: Real>(
    states: &[&StateVector<T>],
    weights: &[T],
    model: &SpinBathModel<T>,
) -> Result<T, EnsembleError> {
    if states.len() != weights.len() {
        return Err(EnsembleError::CountMismatch {
            states: states.len(),
            weights: weights.len(),
        });
    }
    let hi = FlipOperator::interaction(model);
    let mut out = vec![Complex::new(T::zero(), T::zero()); LinearOperator::dim(&hi)];
    let mut total = T::zero();
    for (psi, &w) in states.iter().zip(weights) {
        if psi.dim() != out.len() {
            return Err(EnsembleError::DimensionMismatch {
                expected: out.len(),
                found: psi.dim(),
            });
        }
        hi.apply_complex(psi.amplitudes(), &mut out);
        total += w * inner(psi.amplitudes(), &out).re;
    }
    Ok(total)
}

/// `<phi_n|Sx|phi_n>` for every pair, in spectrum order.
pub fn sigma_x_expectations<T: Real>(spectrum: &BathSpectrum<T>) -> Vec<T> {
    let n_bath = spectrum.dim().trailing_zeros() as usize;
    let sx = FlipOperator::total_sigma_x(n_bath, true);
    let mut y = vec![T::zero(); spectrum.dim()];
    spectrum
        .pairs()
        .iter()
        .map(|p| {
            sx.apply_real(&p.vector, &mut y);
            p.vector.iter().zip(&y).map(|(&a, &b)| a * b).sum()
        })
        .collect()
}

/// Unweighted mean of `<Sx>` over the `count` lowest states.
pub fn avg_sigma_x<T: Real>(spectrum: &BathSpectrum<T>, count: usize) -> Result<T, EnsembleError> {
    if count == 0 || spectrum.len() < count {
        return Err(EnsembleError::InsufficientStates {
            requested: count,
            available: spectrum.len(),
        });
    }
    let ex = sigma_x_expectations(&spectrum.truncated(count));
    Ok(ex.iter().copied().sum::<T>() / T::from_usize_lossy(count))
}

/// Provenance of an [`ObservableSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMetadata<T> {
    pub model: ModelParams<T>,
    pub seed: Option<u64>,
    pub kt: T,
    pub m: usize,
}

/// Central-spin observables on an output grid.
#[derive(Debug, Clone)]
pub struct ObservableSeries<T> {
    pub times: Vec<T>,
    pub densities: Vec<ReducedDensity<T>>,
    pub interaction: Vec<T>,
    pub metadata: SeriesMetadata<T>,
}

impl<T: Real> ObservableSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn component(&self, k: usize) -> Vec<T> {
        self.densities.iter().map(|d| d.polarization[k]).collect()
    }

    pub fn px(&self) -> Vec<T> {
        self.component(0)
    }

    pub fn py(&self) -> Vec<T> {
        self.component(1)
    }

    pub fn pz(&self) -> Vec<T> {
        self.component(2)
    }

    pub fn entropy(&self) -> Vec<T> {
        self.densities.iter().map(|d| d.entropy).collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.metadata.seed = Some(seed);
        self
    }
}

/// Integrates every ensemble member with the Runge–Kutta propagator and
/// accumulates observables on the fly; states are never stored.
///
/// Members are processed in order, so the weighted sums do not depend on
/// scheduling.
pub fn observe_trajectories<T: Real>(
    model: &SpinBathModel<T>,
    ensemble: &ThermalEnsemble<T>,
    settings: &PropagationSettings<T>,
) -> Result<(ObservableSeries<T>, Drift<T>), PropagateError> {
    let h = FlipOperator::hamiltonian(model);
    let hi = FlipOperator::interaction(model);
    let n_times = settings.output_grid.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = vec![[[zero; 2]; 2]; n_times];
    let mut hi_avg = vec![T::zero(); n_times];
    let mut hpsi = vec![zero; model.full_dim()];
    let mut drift = Drift::default();
    for (index, (psi0, &w)) in ensemble
        .embed_initial_states()
        .iter()
        .zip(ensemble.weights())
        .enumerate()
    {
        let (d, _) = evolve_streaming(&h, psi0, settings, |p| {
            accumulate_density(p.amplitudes, w, &mut rho[p.index]);
            hi.apply_complex(p.amplitudes, &mut hpsi);
            hi_avg[p.index] += w * inner(p.amplitudes, &hpsi).re;
        })
        .map_err(|e| PropagateError::Member {
            index,
            source: Box::new(e),
        })?;
        drift = drift.merge(d);
    }
    let series = ObservableSeries {
        times: settings.output_grid.clone(),
        densities: rho
            .into_iter()
            .map(|mut r| {
                r[0][1] = r[1][0].conj();
                ReducedDensity::from_matrix(r)
            })
            .collect(),
        interaction: hi_avg,
        metadata: SeriesMetadata {
            model: model.params(),
            seed: None,
            kt: ensemble.kt(),
            m: ensemble.len(),
        },
    };
    Ok((series, drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_spectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interaction_vanishes_on_basis_states_and_without_coupling() {
        let model = ModelParams::with_frequencies(vec![0.3f64, 0.6], 1.0).build().unwrap();
        for k in 0..8 {
            let s = StateVector::basis(8, k).unwrap();
            assert_eq!(interaction_average(&[&s], &[1.0], &model).unwrap(), 0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = StateVector::random(8, &mut rng);
        let free = model.with_lambda0(0.0).unwrap();
        assert_eq!(interaction_average(&[&s], &[1.0], &free).unwrap(), 0.0);
    }

    #[test]
    fn ferromagnetic_ground_state_sx() {
        let omegas = vec![0.45f64, 0.91, 0.12, 0.77, 0.63, 0.38, 0.95, 0.21, 0.55, 0.84];
        let model = ModelParams::with_frequencies(omegas, -10.0).build().unwrap();
        let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
        let ex = sigma_x_expectations(&spec);
        assert!((ex[0] + 10.0).abs() < 0.05, "{}", ex[0]);
        assert!((ex[1] - 10.0).abs() < 0.05, "{}", ex[1]);
        assert!(avg_sigma_x(&spec, 2000).is_err());
    }

    #[test]
    fn all_zero_expectations_average_to_zero() {
        // Sx has zero diagonal, so sz eigenstates give zero expectations.
        let mut p = ModelParams::with_frequencies(vec![0.2f64, 0.4, 0.7], 0.0);
        p.beta = 0.0;
        let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&p.build().unwrap())).unwrap();
        assert_eq!(avg_sigma_x(&spec, 8).unwrap(), 0.0);
    }
}
