use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use super::HilbertError;
use crate::scalar::Real;

/// Complex amplitudes over the product basis, indexed by [`super::BasisIndex`].
///
/// The dimension is always a power of two: `2^(N+1)` for full-system states,
/// `2^N` for bath-only vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![Complex::zero(); dim],
        }
    }

    /// The basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self, HilbertError> {
        if k >= dim {
            return Err(HilbertError::IndexOutOfRange { index: k, dim });
        }
        let mut s = Self::zeros(dim);
        s.amps[k] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self, HilbertError> {
        if !amps.len().is_power_of_two() {
            return Err(HilbertError::DimensionMismatch {
                expected: amps.len().next_power_of_two(),
                found: amps.len(),
            });
        }
        Ok(Self { amps })
    }

    pub fn from_real(values: &[T]) -> Result<Self, HilbertError> {
        Self::from_amplitudes(values.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// Normalized state with independent Gaussian-like components.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let amps = (0..dim)
            .map(|_| Complex::new(T::lit(rng.gen::<f64>() - 0.5), T::lit(rng.gen::<f64>() - 0.5)))
            .collect();
        let mut s = Self { amps };
        s.normalize();
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Number of spins spanned, `log2(dim)`.
    #[inline]
    pub fn n_spins(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > T::zero() {
            let inv = n.recip();
            self.amps.iter_mut().for_each(|a| *a = *a * inv);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amps, &other.amps)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            amps: self.amps.iter().map(|&a| a * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        for (a, &b) in self.amps.iter_mut().zip(&other.amps) {
            *a += b * c;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// `<a|b>` over raw amplitude slices.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}
