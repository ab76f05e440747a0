use num_complex::Complex;

use super::EnsembleError;
use crate::hilbert::StateVector;
use crate::scalar::Real;

/// Reduced density of the central spin, `rho = (1 + P . sigma) / 2`.
///
/// Index 0 is spin down, index 1 spin up, matching bit 0 of the full basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity<T> {
    pub matrix: [[Complex<T>; 2]; 2],
    pub polarization: [T; 3],
    pub entropy: T,
}

impl<T: Real> ReducedDensity<T> {
    pub fn from_matrix(matrix: [[Complex<T>; 2]; 2]) -> Self {
        let two = T::lit(2.0);
        let polarization = [
            two * matrix[1][0].re,
            -two * matrix[1][0].im,
            matrix[1][1].re - matrix[0][0].re,
        ];
        let p = polarization.iter().map(|&x| x * x).sum::<T>().sqrt();
        Self {
            matrix,
            polarization,
            entropy: entropy_clamped(p),
        }
    }

    pub fn from_polarization(p: [T; 3]) -> Self {
        let half = T::lit(0.5);
        let matrix = [
            [
                Complex::new((T::one() - p[2]) * half, T::zero()),
                Complex::new(p[0] * half, p[1] * half),
            ],
            [
                Complex::new(p[0] * half, -p[1] * half),
                Complex::new((T::one() + p[2]) * half, T::zero()),
            ],
        ];
        Self::from_matrix(matrix)
    }

    /// `|P|`.
    pub fn polarization_norm(&self) -> T {
        self.polarization.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Eigenvalues `(1 -+ |P|) / 2`.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half = T::lit(0.5);
        let p = self.polarization_norm();
        [(T::one() - p) * half, (T::one() + p) * half]
    }
}

fn xlnx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

fn entropy_clamped<T: Real>(p: T) -> T {
    let p = p.max(T::zero()).min(T::one());
    let half = T::lit(0.5);
    // ln 2 - (1+P)/2 ln(1+P) - (1-P)/2 ln(1-P)
    T::LN_2() - half * (xlnx(T::one() + p) + xlnx(T::one() - p))
}

/// Von Neumann entropy of a spin-1/2 with polarization modulus `p`.
pub fn entropy_from_polarization<T: Real>(p: T) -> Result<T, EnsembleError> {
    let slack = T::lit(1e-10);
    if !(p >= -slack && p <= T::one() + slack) {
        return Err(EnsembleError::Domain(format!(
            "polarization modulus {p} outside [0, 1]"
        )));
    }
    Ok(entropy_clamped(p))
}

/// Adds `w Tr_B |psi><psi|` to the lower triangle and diagonal of `rho`.
pub(crate) fn accumulate_density<T: Real>(amps: &[Complex<T>], w: T, rho: &mut [[Complex<T>; 2]; 2]) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut r00 = T::zero();
    let mut r11 = T::zero();
    let mut r10 = zero;
    for pair in amps.chunks_exact(2) {
        let (down, up) = (pair[0], pair[1]);
        r00 += down.norm_sqr();
        r11 += up.norm_sqr();
        r10 += up * down.conj();
    }
    rho[0][0].re += w * r00;
    rho[1][1].re += w * r11;
    rho[1][0] += r10 * w;
}

/// `rho0 = sum_n w_n Tr_B |psi_n><psi_n|`, accumulated entry by entry.
pub fn reduced_density<T: Real>(states: &[&StateVector<T>], weights: &[T]) -> Result<ReducedDensity<T>, EnsembleError> {
    if states.len() != weights.len() {
        return Err(EnsembleError::CountMismatch {
            states: states.len(),
            weights: weights.len(),
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = [[zero; 2]; 2];
    for (psi, &w) in states.iter().zip(weights) {
        if psi.dim() < 2 {
            return Err(EnsembleError::DimensionMismatch {
                expected: 2,
                found: psi.dim(),
            });
        }
        accumulate_density(psi.amplitudes(), w, &mut rho);
    }
    rho[0][1] = rho[1][0].conj();
    Ok(ReducedDensity::from_matrix(rho))
}
