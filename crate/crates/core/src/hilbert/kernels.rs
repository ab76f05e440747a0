//! Single-site Pauli kernels on bit-encoded states.
//!
//! `sx(i)` swaps the amplitudes of `k` and `k ^ 2^i`; `sz(i)` multiplies the
//! amplitude of `k` by `+1` when bit `i` is set and `-1` otherwise. Every
//! kernel comes in an out-of-place form and an accumulating `*_into` form
//! (`out += c * op psi`); Hamiltonian application is built from the latter.

use num_complex::Complex;

use super::{HilbertError, SpinBathModel, StateVector};
use crate::scalar::Real;

fn check_site(site: usize, dim: usize) -> Result<(), HilbertError> {
    let n_spins = dim.trailing_zeros() as usize;
    if site >= n_spins {
        Err(HilbertError::SiteOutOfRange { site, n_spins })
    } else {
        Ok(())
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), HilbertError> {
    if expected != found {
        Err(HilbertError::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// `out[k] += c * psi[k ^ mask]`.
#[inline]
pub(crate) fn flip_accumulate<T: Real>(mask: usize, c: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o += psi[k ^ mask] * c;
    }
}

/// `out += c * sx(site) psi`.
pub fn apply_sigma_x_into<T: Real>(
    site: usize,
    c: T,
    psi: &[Complex<T>],
    out: &mut [Complex<T>],
) -> Result<(), HilbertError> {
    check_site(site, psi.len())?;
    check_dim(psi.len(), out.len())?;
    flip_accumulate(1 << site, c, psi, out);
    Ok(())
}

/// `out += c * sz(site) psi`.
pub fn apply_sigma_z_into<T: Real>(
    site: usize,
    c: T,
    psi: &[Complex<T>],
    out: &mut [Complex<T>],
) -> Result<(), HilbertError> {
    check_site(site, psi.len())?;
    check_dim(psi.len(), out.len())?;
    let bit = 1 << site;
    for (k, (o, &a)) in out.iter_mut().zip(psi).enumerate() {
        if k & bit != 0 {
            *o += a * c;
        } else {
            *o -= a * c;
        }
    }
    Ok(())
}

/// `out += c * sx(i) sx(j) psi`.
pub fn apply_sigma_xx_into<T: Real>(
    i: usize,
    j: usize,
    c: T,
    psi: &[Complex<T>],
    out: &mut [Complex<T>],
) -> Result<(), HilbertError> {
    check_site(i, psi.len())?;
    check_site(j, psi.len())?;
    check_dim(psi.len(), out.len())?;
    flip_accumulate((1 << i) ^ (1 << j), c, psi, out);
    Ok(())
}

pub fn apply_sigma_x<T: Real>(site: usize, psi: &StateVector<T>) -> Result<StateVector<T>, HilbertError> {
    check_site(site, psi.dim())?;
    let bit = 1 << site;
    let a = psi.amplitudes();
    StateVector::from_amplitudes((0..a.len()).map(|k| a[k ^ bit]).collect())
}

pub fn apply_sigma_z<T: Real>(site: usize, psi: &StateVector<T>) -> Result<StateVector<T>, HilbertError> {
    let mut out = StateVector::zeros(psi.dim());
    apply_sigma_z_into(site, T::one(), psi.amplitudes(), out.amplitudes_mut())?;
    Ok(out)
}

/// `H0 psi` on a full-system state (central spin on site 0).
pub fn apply_h0<T: Real>(model: &SpinBathModel<T>, psi: &StateVector<T>) -> Result<StateVector<T>, HilbertError> {
    check_dim(model.full_dim(), psi.dim())?;
    let mut out = StateVector::zeros(psi.dim());
    let (x, y) = (psi.amplitudes(), out.amplitudes_mut());
    apply_sigma_z_into(0, model.omega0() * T::lit(0.5), x, y)?;
    apply_sigma_x_into(0, model.beta(), x, y)?;
    Ok(out)
}

/// Accumulates `HB` acting on bath sites `offset .. offset + N`.
fn bath_terms_into<T: Real>(
    model: &SpinBathModel<T>,
    offset: usize,
    x: &[Complex<T>],
    y: &mut [Complex<T>],
) -> Result<(), HilbertError> {
    let half = T::lit(0.5);
    let n = model.n_bath();
    for (i, &w) in model.omegas().iter().enumerate() {
        apply_sigma_z_into(offset + i, w * half, x, y)?;
        apply_sigma_x_into(offset + i, model.beta(), x, y)?;
    }
    for i in 0..n {
        for j in i + 1..n {
            apply_sigma_xx_into(offset + i, offset + j, model.lambda(), x, y)?;
        }
    }
    Ok(())
}

/// `(1 x HB) psi` on a full-system state.
pub fn apply_bath_embedded<T: Real>(
    model: &SpinBathModel<T>,
    psi: &StateVector<T>,
) -> Result<StateVector<T>, HilbertError> {
    check_dim(model.full_dim(), psi.dim())?;
    let mut out = StateVector::zeros(psi.dim());
    bath_terms_into(model, 1, psi.amplitudes(), out.amplitudes_mut())?;
    Ok(out)
}

/// `HI psi = lambda0 sx(0) Sx psi` on a full-system state.
pub fn apply_interaction<T: Real>(
    model: &SpinBathModel<T>,
    psi: &StateVector<T>,
) -> Result<StateVector<T>, HilbertError> {
    check_dim(model.full_dim(), psi.dim())?;
    let mut out = StateVector::zeros(psi.dim());
    for i in 1..=model.n_bath() {
        apply_sigma_xx_into(0, i, model.lambda0(), psi.amplitudes(), out.amplitudes_mut())?;
    }
    Ok(out)
}

/// `H psi`, assembled term by term from the single-site kernels.
pub fn apply_hamiltonian<T: Real>(
    model: &SpinBathModel<T>,
    psi: &StateVector<T>,
) -> Result<StateVector<T>, HilbertError> {
    check_dim(model.full_dim(), psi.dim())?;
    let mut out = StateVector::zeros(psi.dim());
    let (x, y) = (psi.amplitudes(), out.amplitudes_mut());
    apply_sigma_z_into(0, model.omega0() * T::lit(0.5), x, y)?;
    apply_sigma_x_into(0, model.beta(), x, y)?;
    bath_terms_into(model, 1, x, y)?;
    for i in 1..=model.n_bath() {
        apply_sigma_xx_into(0, i, model.lambda0(), x, y)?;
    }
    Ok(out)
}

/// `HB phi` on a bath-only vector (bit `i - 1` holds bath spin `i`).
pub fn apply_bath_hamiltonian<T: Real>(
    model: &SpinBathModel<T>,
    phi: &StateVector<T>,
) -> Result<StateVector<T>, HilbertError> {
    check_dim(model.bath_dim(), phi.dim())?;
    let mut out = StateVector::zeros(phi.dim());
    if model.n_bath() > 0 {
        bath_terms_into(model, 0, phi.amplitudes(), out.amplitudes_mut())?;
    }
    Ok(out)
}

/// `Sx psi = sum_i sx(i) psi` over the bath sites.
///
/// With `bath_only` the vector is a bath vector (sites `0..N`); otherwise it
/// is a full-system vector and the bath occupies sites `1..=N`.
pub fn apply_total_sigma_x<T: Real>(psi: &StateVector<T>, bath_only: bool) -> Result<StateVector<T>, HilbertError> {
    let n_spins = psi.n_spins();
    let sites = if bath_only {
        0..n_spins
    } else {
        if n_spins == 0 {
            return Err(HilbertError::DimensionMismatch {
                expected: 2,
                found: psi.dim(),
            });
        }
        1..n_spins
    };
    let mut out = StateVector::zeros(psi.dim());
    for site in sites {
        apply_sigma_x_into(site, T::one(), psi.amplitudes(), out.amplitudes_mut())?;
    }
    Ok(out)
}
