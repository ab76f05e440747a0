use std::ops::{AddAssign, Mul};

use num_complex::Complex;

use super::SpinBathModel;
use crate::scalar::Real;

/// A real symmetric operator applied to real vectors.
pub trait SymmetricOperator<T: Real> {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply_real(&self, x: &[T], y: &mut [T]);

    /// Dense row-major matrix, built column by column from unit vectors.
    fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut dense = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.apply_real(&e, &mut col);
            e[j] = T::zero();
            for (i, &v) in col.iter().enumerate() {
                dense[i * n + j] = v;
            }
        }
        dense
    }
}

/// A Hermitian operator on complex amplitude vectors.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply_complex(&self, x: &[Complex<T>], y: &mut [Complex<T>]);
}

/// Adapts a closure `f(x, y)` computing `y = A x` into a [`SymmetricOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&[T], &mut [T])> SymmetricOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_real(&self, x: &[T], y: &mut [T]) {
        (self.f)(x, y)
    }
}

/// `-A` for any complex operator; evolving under it runs time backwards.
pub struct Negated<'a, O: ?Sized>(pub &'a O);

impl<T: Real, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply_complex(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        self.0.apply_complex(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Sum of a diagonal in the `sz` product basis and weighted multi-spin flips:
///
/// `(A x)[k] = diag[k] x[k] + sum_m c_m x[k ^ m]`.
///
/// Every Hamiltonian of the model has this form: `sz` terms land on the
/// diagonal, `sx(i)` is the mask `2^i`, `sx(i) sx(j)` is `2^i | 2^j`.
#[derive(Debug, Clone)]
pub struct FlipOperator<T> {
    diag: Vec<T>,
    flips: Vec<(usize, T)>,
}

impl<T: Real> FlipOperator<T> {
    /// Operator on `n_spins` spins with zero diagonal and no flips.
    pub fn zero(n_spins: usize) -> Self {
        Self {
            diag: vec![T::zero(); 1 << n_spins],
            flips: Vec::new(),
        }
    }

    /// Adds `c * sz(site)`.
    pub fn add_sigma_z(&mut self, site: usize, c: T) {
        if c == T::zero() {
            return;
        }
        let bit = 1 << site;
        for (k, d) in self.diag.iter_mut().enumerate() {
            if k & bit != 0 {
                *d += c;
            } else {
                *d -= c;
            }
        }
    }

    /// Adds `c * X_mask`, the product of `sx` over the set bits of `mask`.
    pub fn add_flip(&mut self, mask: usize, c: T) {
        debug_assert!(mask != 0 && mask < self.diag.len());
        if c == T::zero() {
            return;
        }
        match self.flips.iter_mut().find(|(m, _)| *m == mask) {
            Some((_, existing)) => *existing += c,
            None => self.flips.push((mask, c)),
        }
    }

    /// Adds a multiple of the identity.
    pub fn add_constant(&mut self, c: T) {
        self.diag.iter_mut().for_each(|d| *d += c);
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn flips(&self) -> &[(usize, T)] {
        &self.flips
    }

    fn apply_generic<E>(&self, x: &[E], y: &mut [E])
    where
        E: Copy + Mul<T, Output = E> + AddAssign,
    {
        assert_eq!(x.len(), self.diag.len(), "operand dimension");
        assert_eq!(y.len(), self.diag.len(), "output dimension");
        for ((o, &a), &d) in y.iter_mut().zip(x).zip(&self.diag) {
            *o = a * d;
        }
        for &(mask, c) in &self.flips {
            // The source of a block aligned to the lowest set bit of `mask`
            // is itself a contiguous block.
            let block = 1usize << mask.trailing_zeros();
            if block >= 4 {
                for base in (0..y.len()).step_by(block) {
                    let src = base ^ mask;
                    for (o, &a) in y[base..base + block].iter_mut().zip(&x[src..src + block]) {
                        *o += a * c;
                    }
                }
            } else {
                for (k, o) in y.iter_mut().enumerate() {
                    *o += x[k ^ mask] * c;
                }
            }
        }
    }

    /// `H` of the full system on `N + 1` spins.
    pub fn hamiltonian(model: &SpinBathModel<T>) -> Self {
        let mut op = Self::zero(model.n_bath() + 1);
        let half = T::lit(0.5);
        op.add_sigma_z(0, model.omega0() * half);
        op.add_flip(1, model.beta());
        op.add_bath_terms(model, 1);
        for i in 1..=model.n_bath() {
            op.add_flip(1 | (1 << i), model.lambda0());
        }
        op
    }

    /// `HB` on `N` spins; bit `i - 1` holds bath spin `i`.
    pub fn bath_hamiltonian(model: &SpinBathModel<T>) -> Self {
        let mut op = Self::zero(model.n_bath());
        op.add_bath_terms(model, 0);
        op
    }

    /// `HB` written through the collective spin,
    /// `lambda/2 (Sx^2 - N) + beta Sx + sum_i omega_i/2 sz(i)`.
    ///
    /// Algebraically identical to [`Self::bath_hamiltonian`]; the `Sx^2`
    /// expansion produces the pair flips with coefficient `lambda` and the
    /// `N` diagonal copies of the identity cancel against `- N`.
    pub fn bath_hamiltonian_collective(model: &SpinBathModel<T>) -> Self {
        let n = model.n_bath();
        let mut op = Self::zero(n);
        let half = T::lit(0.5);
        // Sx^2 = sum_i sx(i)^2 + sum_{i != j} sx(i) sx(j) = N + 2 sum_{i<j} ...
        let mut sx2 = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    sx2.add_constant(T::one());
                } else {
                    sx2.add_flip((1 << i) | (1 << j), T::one());
                }
            }
        }
        for (k, d) in sx2.diag.iter().enumerate() {
            op.diag[k] += model.lambda() * half * *d;
        }
        for &(m, c) in &sx2.flips {
            op.add_flip(m, model.lambda() * half * c);
        }
        op.add_constant(-model.lambda() * half * T::from_usize_lossy(n));
        for i in 0..n {
            op.add_flip(1 << i, model.beta());
        }
        for (i, &w) in model.omegas().iter().enumerate() {
            op.add_sigma_z(i, w * half);
        }
        op
    }

    /// `HI = lambda0 sx(0) Sx` on the full space.
    pub fn interaction(model: &SpinBathModel<T>) -> Self {
        let mut op = Self::zero(model.n_bath() + 1);
        for i in 1..=model.n_bath() {
            op.add_flip(1 | (1 << i), model.lambda0());
        }
        op
    }

    /// `Sx = sum_i sx(i)` over `n_bath` bath spins, on a bath-only space when
    /// `bath_only`, otherwise on the full space with the bath on sites `1..=N`.
    pub fn total_sigma_x(n_bath: usize, bath_only: bool) -> Self {
        let offset = usize::from(!bath_only);
        let mut op = Self::zero(n_bath + offset);
        for i in 0..n_bath {
            op.add_flip(1 << (i + offset), T::one());
        }
        op
    }

    fn add_bath_terms(&mut self, model: &SpinBathModel<T>, offset: usize) {
        let half = T::lit(0.5);
        let n = model.n_bath();
        for (i, &w) in model.omegas().iter().enumerate() {
            self.add_sigma_z(i + offset, w * half);
            self.add_flip(1 << (i + offset), model.beta());
        }
        for i in 0..n {
            for j in i + 1..n {
                self.add_flip((1 << (i + offset)) | (1 << (j + offset)), model.lambda());
            }
        }
    }
}

impl<T: Real> SymmetricOperator<T> for FlipOperator<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_real(&self, x: &[T], y: &mut [T]) {
        self.apply_generic(x, y)
    }

    fn to_dense(&self) -> Vec<T> {
        let n = self.diag.len();
        let mut dense = vec![T::zero(); n * n];
        for (k, &d) in self.diag.iter().enumerate() {
            dense[k * n + k] = d;
        }
        for &(mask, c) in &self.flips {
            for k in 0..n {
                dense[k * n + (k ^ mask)] += c;
            }
        }
        dense
    }
}

impl<T: Real> LinearOperator<T> for FlipOperator<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_complex(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        self.apply_generic(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{
        apply_bath_hamiltonian, apply_hamiltonian, apply_interaction, apply_total_sigma_x, ModelParams, StateVector,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, seed: u64) -> SpinBathModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModelParams {
            omega0: 0.8288,
            beta: rng.gen_range(-0.3..0.3),
            lambda0: rng.gen_range(0.5..1.5),
            lambda: rng.gen_range(-10.0..10.0),
            omegas: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
            omega_c: 1.0,
        }
        .build()
        .unwrap()
    }

    fn apply(op: &FlipOperator<f64>, psi: &StateVector<f64>) -> StateVector<f64> {
        let mut out = StateVector::zeros(psi.dim());
        op.apply_complex(psi.amplitudes(), out.amplitudes_mut());
        out
    }

    #[test]
    fn fused_operators_match_kernel_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..8 {
            let m = model(n, n as u64);
            let psi = StateVector::random(m.full_dim(), &mut rng);
            let phi = StateVector::random(m.bath_dim(), &mut rng);
            let h = apply(&FlipOperator::hamiltonian(&m), &psi);
            assert!(h.max_abs_diff(&apply_hamiltonian(&m, &psi).unwrap()) < 1e-13);
            let hi = apply(&FlipOperator::interaction(&m), &psi);
            assert!(hi.max_abs_diff(&apply_interaction(&m, &psi).unwrap()) < 1e-14);
            let hb = apply(&FlipOperator::bath_hamiltonian(&m), &phi);
            assert!(hb.max_abs_diff(&apply_bath_hamiltonian(&m, &phi).unwrap()) < 1e-13);
            let sx = apply(&FlipOperator::total_sigma_x(n, true), &phi);
            assert!(sx.max_abs_diff(&apply_total_sigma_x(&phi, true).unwrap()) < 1e-14);
            let sx_full = apply(&FlipOperator::total_sigma_x(n, false), &psi);
            assert!(sx_full.max_abs_diff(&apply_total_sigma_x(&psi, false).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn collective_form_of_bath_hamiltonian() {
        for n in 1..7 {
            let m = model(n, 40 + n as u64);
            let pair = FlipOperator::bath_hamiltonian(&m).to_dense();
            let coll = FlipOperator::bath_hamiltonian_collective(&m).to_dense();
            let dev = pair.iter().zip(&coll).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "n={n} dev={dev}");
        }
    }

    #[test]
    fn dense_fill_matches_unit_vector_columns() {
        let m = model(3, 7);
        let op = FlipOperator::hamiltonian(&m);
        let fast = op.to_dense();
        let generic = FnOperator::new(op.diag.len(), |x: &[f64], y: &mut [f64]| op.apply_real(x, y)).to_dense();
        assert_eq!(fast, generic);
    }

    #[test]
    fn negated_operator() {
        let m = model(2, 1);
        let op = FlipOperator::hamiltonian(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi = StateVector::random(8, &mut rng);
        let mut y = StateVector::zeros(8);
        Negated(&op).apply_complex(psi.amplitudes(), y.amplitudes_mut());
        assert!(y.max_abs_diff(&apply(&op, &psi).scaled(Complex::new(-1.0, 0.0))) < 1e-15);
    }
}
