use super::{residual_norm, symmetric_eigen, BathSpectrum, EigenError};
use crate::hilbert::SymmetricOperator;
use crate::scalar::Real;

/// Energy separation below which neighbouring levels form one multiplet.
pub const DEFAULT_MULTIPLET_GAP: f64 = 1e-9;

/// Fixes the basis inside numerically degenerate multiplets.
///
/// Consecutive levels closer than `gap` are grouped; each group is rotated so
/// that `observable` (normally `Sx`) is diagonal inside it, and the group is
/// ordered by ascending expectation of `observable`. Energies and residuals
/// are recomputed for the rotated vectors, so inside a multiplet energies
/// are non-decreasing only up to `gap`.
pub fn resolve_multiplets<T, H, O>(
    spectrum: &mut BathSpectrum<T>,
    hamiltonian: &H,
    observable: &O,
    gap: T,
) -> Result<(), EigenError>
where
    T: Real,
    H: SymmetricOperator<T> + ?Sized,
    O: SymmetricOperator<T> + ?Sized,
{
    let n = spectrum.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spectrum.pairs()[end].energy - spectrum.pairs()[end - 1].energy < gap {
            end += 1;
        }
        if end - start > 1 {
            rotate_group(spectrum, hamiltonian, observable, start, end)?;
        }
        start = end;
    }
    Ok(())
}

fn rotate_group<T, H, O>(
    spectrum: &mut BathSpectrum<T>,
    hamiltonian: &H,
    observable: &O,
    start: usize,
    end: usize,
) -> Result<(), EigenError>
where
    T: Real,
    H: SymmetricOperator<T> + ?Sized,
    O: SymmetricOperator<T> + ?Sized,
{
    let g = end - start;
    let dim = spectrum.pairs()[start].vector.len();
    let mut ov = vec![T::zero(); dim];
    let mut proj = vec![T::zero(); g * g];
    for b in 0..g {
        observable.apply_real(&spectrum.pairs()[start + b].vector, &mut ov);
        for a in 0..g {
            proj[a * g + b] = spectrum.pairs()[start + a]
                .vector
                .iter()
                .zip(&ov)
                .map(|(&x, &y)| x * y)
                .sum();
        }
    }
    for a in 0..g {
        for b in a + 1..g {
            let s = (proj[a * g + b] + proj[b * g + a]) * T::lit(0.5);
            proj[a * g + b] = s;
            proj[b * g + a] = s;
        }
    }
    let eig = symmetric_eigen(proj, g)?;
    let old: Vec<Vec<T>> = spectrum.pairs()[start..end].iter().map(|p| p.vector.clone()).collect();
    for a in 0..g {
        let coeffs = eig.vector(a);
        let mut v = vec![T::zero(); dim];
        for (c, w) in coeffs.iter().zip(&old) {
            for (x, &y) in v.iter_mut().zip(w) {
                *x += *c * y;
            }
        }
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let mut hv = vec![T::zero(); dim];
        hamiltonian.apply_real(&v, &mut hv);
        let energy: T = v.iter().zip(&hv).map(|(&x, &y)| x * y).sum();
        let res = residual_norm(hamiltonian, energy, &v);
        let pair = &mut spectrum.pairs_mut()[start + a];
        pair.energy = energy;
        pair.vector = v;
        spectrum.residuals_mut()[start + a] = res;
    }
    Ok(())
}
