//! Bath spectra: full dense diagonalization for small spaces and a
//! restarted Lanczos solver for the lowest few states of large ones.

mod dense;
mod lanczos;
mod multiplets;

use thiserror::Error;

use crate::hilbert::{StateVector, SymmetricOperator};
use crate::scalar::Real;

pub use dense::{symmetric_eigen, SymmetricEigen};
pub use lanczos::{lanczos_lowest, LanczosOptions};
pub use multiplets::{resolve_multiplets, DEFAULT_MULTIPLET_GAP};

/// Largest dimension accepted by [`dense_spectrum`].
pub const MAX_DENSE_DIM: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("dimension {dim} exceeds the dense solver limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("operator is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },
    #[error("requested {requested} eigenpairs from a space of dimension {dim}")]
    TooManyStates { requested: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

impl SolverMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverMethod::Dense => "dense",
            SolverMethod::Lanczos => "lanczos",
        }
    }
}

/// A normalized eigenvector of a real symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub energy: T,
    pub vector: Vec<T>,
}

impl<T: Real> EigenPair<T> {
    pub fn state(&self) -> StateVector<T> {
        StateVector::from_real(&self.vector).expect("eigenvector dimension is a power of two")
    }
}

/// Lowest eigenpairs of a bath Hamiltonian, ascending in energy.
#[derive(Debug, Clone)]
pub struct BathSpectrum<T> {
    pairs: Vec<EigenPair<T>>,
    residuals: Vec<T>,
    method: SolverMethod,
    dim: usize,
}

impl<T: Real> BathSpectrum<T> {
    pub fn new(pairs: Vec<EigenPair<T>>, residuals: Vec<T>, method: SolverMethod, dim: usize) -> Self {
        assert_eq!(pairs.len(), residuals.len());
        Self {
            pairs,
            residuals,
            method,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Dimension of the space the operator acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether every eigenpair of the operator is present.
    pub fn is_complete(&self) -> bool {
        self.pairs.len() == self.dim
    }

    pub fn pairs(&self) -> &[EigenPair<T>] {
        &self.pairs
    }

    pub fn energies(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().copied().fold(T::zero(), T::max)
    }

    pub fn method(&self) -> SolverMethod {
        self.method
    }

    /// The `m` lowest pairs.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.len());
        Self {
            pairs: self.pairs[..m].to_vec(),
            residuals: self.residuals[..m].to_vec(),
            method: self.method,
            dim: self.dim,
        }
    }

    pub(crate) fn pairs_mut(&mut self) -> &mut Vec<EigenPair<T>> {
        &mut self.pairs
    }

    pub(crate) fn residuals_mut(&mut self) -> &mut Vec<T> {
        &mut self.residuals
    }
}

/// `||A v - e v||` for a real vector.
pub fn residual_norm<T: Real, O: SymmetricOperator<T> + ?Sized>(op: &O, energy: T, v: &[T]) -> T {
    let mut av = vec![T::zero(); v.len()];
    op.apply_real(v, &mut av);
    av.iter()
        .zip(v)
        .map(|(&a, &x)| {
            let r = a - energy * x;
            r * r
        })
        .sum::<T>()
        .sqrt()
}

/// Every eigenpair of `op`, ascending, from a dense diagonalization.
pub fn dense_spectrum<T: Real, O: SymmetricOperator<T> + ?Sized>(op: &O) -> Result<BathSpectrum<T>, EigenError> {
    let n = op.dim();
    if n > MAX_DENSE_DIM {
        return Err(EigenError::TooLarge {
            dim: n,
            limit: MAX_DENSE_DIM,
        });
    }
    let a = op.to_dense();
    let mut asym = T::zero();
    let mut scale = T::zero();
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(a[i * n + j].abs());
            if j > i {
                asym = asym.max((a[i * n + j] - a[j * n + i]).abs());
            }
        }
    }
    if asym > T::lit(1e3) * T::epsilon() * scale.max(T::one()) {
        return Err(EigenError::NotSymmetric {
            asymmetry: asym.to_f64().unwrap_or(f64::NAN),
        });
    }
    let eig = symmetric_eigen(a, n)?;
    let mut pairs = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for m in 0..n {
        let v = eig.vector(m).to_vec();
        residuals.push(residual_norm(op, eig.values[m], &v));
        pairs.push(EigenPair {
            energy: eig.values[m],
            vector: v,
        });
    }
    Ok(BathSpectrum::new(pairs, residuals, SolverMethod::Dense, n))
}
