//! Independent dense oracles built from Kronecker products.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinbath::Params;

pub type C = Complex64;

/// Basis order (down, up); up carries `sz = +1`.
pub fn sigma_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])
}

pub fn sigma_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// `op` on `site` of an `n`-spin register whose site `i` is bit `i` of the
/// basis index, i.e. `I (x) ... (x) op (x) ... (x) I` with site 0 last.
pub fn on_site(op: &DMatrix<f64>, site: usize, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for s in (0..n).rev() {
        let factor = if s == site { op.clone() } else { DMatrix::identity(2, 2) };
        out = out.kronecker(&factor);
    }
    out
}

fn bath_terms(p: &Params, offset: usize, n_spins: usize) -> DMatrix<f64> {
    let dim = 1 << n_spins;
    let mut h = DMatrix::zeros(dim, dim);
    let nb = p.omegas.len();
    for (i, &w) in p.omegas.iter().enumerate() {
        h += on_site(&sigma_z(), i + offset, n_spins) * (w / 2.0);
        h += on_site(&sigma_x(), i + offset, n_spins) * p.beta;
    }
    for i in 0..nb {
        for j in i + 1..nb {
            h += on_site(&sigma_x(), i + offset, n_spins) * on_site(&sigma_x(), j + offset, n_spins) * p.lambda;
        }
    }
    h
}

pub fn dense_bath(p: &Params) -> DMatrix<f64> {
    bath_terms(p, 0, p.omegas.len())
}

pub fn dense_interaction(p: &Params) -> DMatrix<f64> {
    let n = p.omegas.len() + 1;
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for i in 1..n {
        h += on_site(&sigma_x(), 0, n) * on_site(&sigma_x(), i, n) * p.lambda0;
    }
    h
}

pub fn dense_hamiltonian(p: &Params) -> DMatrix<f64> {
    let n = p.omegas.len() + 1;
    on_site(&sigma_z(), 0, n) * (p.omega0 / 2.0)
        + on_site(&sigma_x(), 0, n) * p.beta
        + bath_terms(p, 1, n)
        + dense_interaction(p)
}

/// `sum_i sx(i)` over sites `first..first + count` of an `n`-spin register.
pub fn dense_total_sx(first: usize, count: usize, n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(1 << n, 1 << n);
    for i in first..first + count {
        s += on_site(&sigma_x(), i, n);
    }
    s
}

pub fn apply(m: &DMatrix<f64>, x: &[C]) -> Vec<C> {
    let mc = m.map(|v| C::new(v, 0.0));
    let v = DVector::from_column_slice(x);
    (mc * v).as_slice().to_vec()
}

pub fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    (0..dim)
        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_params(n: usize, lambda: f64, seed: u64) -> Params {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omegas = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    Params::with_frequencies(omegas, lambda)
}

/// Brute-force `Tr_B` of the explicit density `sum_n w_n |psi_n><psi_n|`,
/// indexed `[central][central]` with 0 = down.
pub fn partial_trace(states: &[Vec<C>], weights: &[f64]) -> [[C; 2]; 2] {
    let dim = states[0].len();
    let mut rho = DMatrix::<C>::zeros(dim, dim);
    for (psi, &w) in states.iter().zip(weights) {
        let v = DVector::from_column_slice(psi);
        rho += (&v * v.adjoint()) * C::new(w, 0.0);
    }
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for j in 0..dim / 2 {
                out[a][b] += rho[(2 * j + a, 2 * j + b)];
            }
        }
    }
    out
}

/// `exp(-i (a sz + b sx) t) |up>` for a single spin, as `(down, up)`.
pub fn precess_up(a: f64, b: f64, t: f64) -> [C; 2] {
    let r = (a * a + b * b).sqrt();
    if r == 0.0 {
        return [C::new(0.0, 0.0), C::new(1.0, 0.0)];
    }
    let (s, c) = (r * t).sin_cos();
    let k = s / r;
    // U = cos - i k (a sz + b sx); sz|up> = |up>, sx|up> = |down>.
    [C::new(0.0, -k * b), C::new(c, -k * a)]
}
