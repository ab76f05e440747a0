//! Bit-encoded Hilbert space and matrix-free Pauli operators.
//!
//! Basis state `k` of an `n`-spin register has spin `i` up iff bit `i` of `k`
//! is set. The central spin is bit 0 and bath spin `i` is bit `i`; bath-only
//! vectors drop the central bit, so bath spin `i` is bit `i - 1` there.

mod basis;
mod kernels;
mod model;
mod operator;
mod state;

use thiserror::Error;

pub use basis::{parity, BasisIndex, Parity};
pub use kernels::{
    apply_bath_embedded, apply_bath_hamiltonian, apply_h0, apply_hamiltonian, apply_interaction, apply_sigma_x,
    apply_sigma_x_into, apply_sigma_xx_into, apply_sigma_z, apply_sigma_z_into, apply_total_sigma_x,
};
pub use model::{ModelParams, SpinBathModel, MAX_BATH_SPINS};
pub use operator::{FlipOperator, FnOperator, LinearOperator, Negated, SymmetricOperator};
pub use state::{inner, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("spin site {site} out of range for {n_spins} spins")]
    SiteOutOfRange { site: usize, n_spins: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}
