use num_complex::Complex;

use crate::eigensolve::{symmetric_eigen, EigenError, MAX_DENSE_DIM};
use crate::hilbert::{FlipOperator, SpinBathModel, StateVector, SymmetricOperator};
use crate::scalar::Real;

/// Exact evolution `exp(-i H t) = V exp(-i E t) V^T` from a dense
/// diagonalization of the full Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<T> {
    energies: Vec<T>,
    /// Row `m` is the eigenvector of `energies[m]`.
    vectors: Vec<T>,
    dim: usize,
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(model: &SpinBathModel<T>) -> Result<Self, EigenError> {
        Self::from_operator(&FlipOperator::hamiltonian(model))
    }

    pub fn from_operator<O: SymmetricOperator<T> + ?Sized>(op: &O) -> Result<Self, EigenError> {
        let dim = op.dim();
        if dim > MAX_DENSE_DIM {
            return Err(EigenError::TooLarge {
                dim,
                limit: MAX_DENSE_DIM,
            });
        }
        let eig = symmetric_eigen(op.to_dense(), dim)?;
        Ok(Self {
            energies: eig.values,
            vectors: eig.vectors,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Row-major eigenvector matrix, one eigenvector per row.
    pub fn vectors(&self) -> &[T] {
        &self.vectors
    }

    /// Eigenbasis coefficients `V psi` of a state, real and imaginary parts.
    fn coefficients(&self, psi: &StateVector<T>) -> (Vec<T>, Vec<T>) {
        let n = self.dim;
        let re: Vec<T> = psi.amplitudes().iter().map(|z| z.re).collect();
        let im: Vec<T> = psi.amplitudes().iter().map(|z| z.im).collect();
        let mut cre = vec![T::zero(); n];
        let mut cim = vec![T::zero(); n];
        let ni = n as isize;
        T::gemm(
            n,
            n,
            1,
            T::one(),
            &self.vectors,
            ni,
            1,
            &re,
            1,
            1,
            T::zero(),
            &mut cre,
            1,
            1,
        );
        T::gemm(
            n,
            n,
            1,
            T::one(),
            &self.vectors,
            ni,
            1,
            &im,
            1,
            1,
            T::zero(),
            &mut cim,
            1,
            1,
        );
        (cre, cim)
    }

    pub fn propagate(&self, psi0: &StateVector<T>, t: T) -> StateVector<T> {
        assert_eq!(psi0.dim(), self.dim, "state dimension");
        let n = self.dim;
        let (cre, cim) = self.coefficients(psi0);
        let mut pre = vec![T::zero(); n];
        let mut pim = vec![T::zero(); n];
        for m in 0..n {
            let c = Complex::new(cre[m], cim[m]) * Complex::from_polar(T::one(), -self.energies[m] * t);
            pre[m] = c.re;
            pim[m] = c.im;
        }
        let ni = n as isize;
        let mut re = vec![T::zero(); n];
        let mut im = vec![T::zero(); n];
        T::gemm(
            n,
            n,
            1,
            T::one(),
            &self.vectors,
            1,
            ni,
            &pre,
            1,
            1,
            T::zero(),
            &mut re,
            1,
            1,
        );
        T::gemm(
            n,
            n,
            1,
            T::one(),
            &self.vectors,
            1,
            ni,
            &pim,
            1,
            1,
            T::zero(),
            &mut im,
            1,
            1,
        );
        let amps = re.into_iter().zip(im).map(|(r, i)| Complex::new(r, i)).collect();
        StateVector::from_amplitudes(amps).expect("power-of-two dimension")
    }
}
