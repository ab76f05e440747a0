mod common;

use common::*;
use proptest::prelude::*;
use spinbath::eigensolve::dense_spectrum;
use spinbath::ensemble::{
    observe_trajectories, reduced_density, sigma_x_expectations, SpectralObservables, ThermalEnsemble,
};
use spinbath::hilbert::FlipOperator;
use spinbath::propagate::{evolve_ensemble, PropagationSettings, SpectralPropagator};
use spinbath::scenarios::{bath_spectrum, thermal_ensemble};
use spinbath::Params;

/// Closed-form `rho0(t)` when every bath eigenstate is an `Sx` eigenstate:
/// each member precesses under `w0/2 sz + lambda0 B_n sx`.
fn decoupled_density(p: &Params, weights: &[f64], sx: &[f64], t: f64) -> [[C; 2]; 2] {
    let mut rho = [[C::new(0.0, 0.0); 2]; 2];
    for (&w, &b) in weights.iter().zip(sx) {
        let s = precess_up(p.omega0 / 2.0, p.beta + p.lambda0 * b, t);
        for a in 0..2 {
            for c in 0..2 {
                rho[a][c] += s[a] * s[c].conj() * w;
            }
        }
    }
    rho
}

fn synthetic(n: usize) -> Params {
    let mut p = random_params(n, 10.0, 0);
    p.omegas = vec![0.0; n];
    p.beta = 0.0;
    p
}

#[test]
fn eigenbasis_decoupling_identity() {
    let p = synthetic(6);
    let model = p.clone().build().unwrap();
    let spec = bath_spectrum(&model, 20, 0).unwrap();
    let grid: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64).collect();
    let settings = PropagationSettings::new(grid.clone());
    // kT = 0.02 keeps only the Sx = 0 band; kT = 20 mixes every band.
    for kt in [0.02, 20.0] {
        let ens = thermal_ensemble(&spec, 20, kt, 1e-4).unwrap();
        let sx = sigma_x_expectations(ens.spectrum());
        let (rk, _) = observe_trajectories(&model, &ens, &settings).unwrap();
        let prop = SpectralPropagator::new(&model).unwrap();
        let sp = SpectralObservables::new(&model, &prop)
            .unwrap()
            .series(&ens, &grid)
            .unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let expect = decoupled_density(&p, ens.weights(), &sx, t);
            for series in [&rk, &sp] {
                for a in 0..2 {
                    for c in 0..2 {
                        let d = (series.densities[k].matrix[a][c] - expect[a][c]).norm();
                        assert!(d < 1e-6, "kT={kt} t={t} [{a}{c}]: {d:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn batch_and_streamed_observables_agree() {
    let model = random_params(5, 2.0, 6).build().unwrap();
    let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
    let ens = ThermalEnsemble::build(&spec, 5, 0.3, 1.0).unwrap();
    let settings = PropagationSettings::uniform(20.0, 2.0);
    let set = evolve_ensemble(&model, &ens.embed_initial_states(), &settings).unwrap();
    let (streamed, _) = observe_trajectories(&model, &ens, &settings).unwrap();
    for k in 0..set.times.len() {
        let batch = reduced_density(&set.states_at(k), ens.weights()).unwrap();
        for a in 0..2 {
            for c in 0..2 {
                assert!((batch.matrix[a][c] - streamed.densities[k].matrix[a][c]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn thermal_truncation_at_low_temperature() {
    // Ferromagnetic lowest pair is split by 2 beta N = 0.2.
    let model = random_params(10, -10.0, 3).build().unwrap();
    let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
    let ens = ThermalEnsemble::build(&spec, 20, 0.02, 1e-4).unwrap();
    let gap = spec.energies()[1] - spec.energies()[0];
    assert!((gap - 0.2).abs() < 0.02, "{gap}");
    assert!(ens.weights()[1] / ens.weights()[0] < 1e-4);
    assert!((ens.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduced_density_stays_physical(seed in 0u64..1000, lambda in -5.0f64..5.0, kt in 0.05f64..5.0) {
        let model = random_params(3, lambda, seed).build().unwrap();
        let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
        let ens = ThermalEnsemble::build(&spec, 8, kt, 1.0).unwrap();
        prop_assert!((ens.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(ens.weights().windows(2).all(|w| w[0] >= w[1]));
        let (series, _) = observe_trajectories(&model, &ens, &PropagationSettings::uniform(15.0, 0.5)).unwrap();
        let p0 = series.densities[0].polarization;
        prop_assert!(p0[0].abs() < 1e-12 && p0[1].abs() < 1e-12 && (p0[2] - 1.0).abs() < 1e-12, "{:?}", p0);
        prop_assert!(series.densities[0].entropy < 1e-10);
        for d in &series.densities {
            // The integrator only preserves the norm to its drift bound.
            prop_assert!((d.trace().re - 1.0).abs() < 1e-9 && d.trace().im.abs() < 1e-12);
            prop_assert!((d.matrix[0][1] - d.matrix[1][0].conj()).norm() < 1e-12);
            let [lo, hi] = d.eigenvalues();
            prop_assert!(lo >= -1e-10 && hi <= 1.0 + 1e-10);
            prop_assert!(d.entropy >= 0.0 && d.entropy <= std::f64::consts::LN_2 + 1e-12);
            let rebuilt = spinbath::Density::from_polarization(d.polarization);
            for a in 0..2 {
                for c in 0..2 {
                    prop_assert!((rebuilt.matrix[a][c] - d.matrix[a][c]).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn embedding_is_isometric_with_central_spin_up(seed in 0u64..1000) {
        let model = random_params(4, 1.0, seed).build().unwrap();
        let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
        let ens = ThermalEnsemble::build(&spec, 16, 1.0, 1.0).unwrap();
        for (psi, pair) in ens.embed_initial_states().iter().zip(ens.spectrum().pairs()) {
            prop_assert_eq!(psi.dim(), 32);
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
            for (k, a) in psi.amplitudes().iter().enumerate() {
                if k & 1 == 1 {
                    prop_assert_eq!(a.re, pair.vector[k >> 1]);
                } else {
                    prop_assert_eq!(a.norm(), 0.0);
                }
            }
            let r = reduced_density(&[psi], &[1.0]).unwrap();
            prop_assert!((r.polarization[2] - 1.0).abs() < 1e-12);
        }
    }
}
