mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinbath::eigensolve::dense_spectrum;
use spinbath::ensemble::{interaction_average, reduced_density, sigma_x_expectations};
use spinbath::hilbert::{FlipOperator, LinearOperator, SymmetricOperator};
use spinbath::State;

fn max_dev(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check(op: &FlipOperator<f64>, dense: &nalgebra::DMatrix<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let dim = LinearOperator::dim(op);
    assert_eq!(dim, dense.nrows());
    let mut worst = 0.0f64;
    let mut y = vec![C::new(0.0, 0.0); dim];
    for _ in 0..100 {
        let x = random_vector(dim, rng);
        op.apply_complex(&x, &mut y);
        worst = worst.max(max_dev(&y, &apply(dense, &x)));
    }
    worst
}

#[test]
fn matrix_free_operators_match_kronecker_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2, 3, 4] {
        for lambda in [0.0, 1.3, -10.0] {
            let p = random_params(n, lambda, 100 + n as u64);
            let model = p.clone().build().unwrap();
            let pairs = [
                (FlipOperator::hamiltonian(&model), dense_hamiltonian(&p)),
                (FlipOperator::bath_hamiltonian(&model), dense_bath(&p)),
                (FlipOperator::bath_hamiltonian_collective(&model), dense_bath(&p)),
                (FlipOperator::interaction(&model), dense_interaction(&p)),
                (FlipOperator::total_sigma_x(n, true), dense_total_sx(0, n, n)),
                (FlipOperator::total_sigma_x(n, false), dense_total_sx(1, n, n + 1)),
            ];
            for (k, (op, dense)) in pairs.iter().enumerate() {
                let dev = check(op, dense, &mut rng);
                assert!(dev < 1e-12, "n={n} lambda={lambda} operator {k}: {dev:e}");
            }
        }
    }
}

#[test]
fn dense_export_matches_oracle() {
    let p = random_params(3, 0.7, 5);
    let model = p.clone().build().unwrap();
    let ours = FlipOperator::hamiltonian(&model).to_dense();
    let oracle = dense_hamiltonian(&p);
    for i in 0..16 {
        for j in 0..16 {
            assert!((ours[i * 16 + j] - oracle[(i, j)]).abs() < 1e-14);
        }
    }
}

#[test]
fn reduced_density_matches_explicit_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states: Vec<State> = (0..4).map(|_| State::random(16, &mut rng)).collect();
    let weights = [0.4, 0.3, 0.2, 0.1];
    let refs: Vec<&State> = states.iter().collect();
    let ours = reduced_density(&refs, &weights).unwrap();
    let raw: Vec<Vec<C>> = states.iter().map(|s| s.amplitudes().to_vec()).collect();
    let oracle = partial_trace(&raw, &weights);
    for a in 0..2 {
        for b in 0..2 {
            assert!((ours.matrix[a][b] - oracle[a][b]).norm() < 1e-12);
        }
    }
}

#[test]
fn interaction_average_matches_dense() {
    let p = random_params(3, 2.0, 9);
    let model = p.clone().build().unwrap();
    let hi = dense_interaction(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let states: Vec<State> = (0..3).map(|_| State::random(16, &mut rng)).collect();
    let weights = [0.5, 0.3, 0.2];
    let refs: Vec<&State> = states.iter().collect();
    let ours = interaction_average(&refs, &weights, &model).unwrap();
    let oracle: f64 = states
        .iter()
        .zip(weights)
        .map(|(s, w)| {
            let hs = apply(&hi, s.amplitudes());
            w * s
                .amplitudes()
                .iter()
                .zip(&hs)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
        })
        .sum();
    assert!((ours - oracle).abs() < 1e-12);
}

#[test]
fn sigma_x_expectations_match_dense() {
    let p = random_params(3, 0.0, 21);
    let model = p.clone().build().unwrap();
    let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
    let ours = sigma_x_expectations(&spec);
    let eig = nalgebra::SymmetricEigen::new(dense_bath(&p));
    let sx = dense_total_sx(0, 3, 3);
    let mut oracle: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], (v.transpose() * &sx * v)[(0, 0)])
        })
        .collect();
    oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (k, (e, x)) in oracle.iter().enumerate() {
        assert!((spec.pairs()[k].energy - e).abs() < 1e-12);
        assert!((ours[k] - x).abs() < 1e-10, "{k}: {} vs {x}", ours[k]);
    }
}
