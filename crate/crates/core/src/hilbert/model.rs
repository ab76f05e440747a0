use super::HilbertError;
use crate::scalar::Real;

/// Largest bath supported; the full space then has 2^25 amplitudes.
pub const MAX_BATH_SPINS: usize = 24;

/// Parameters of the central-spin plus spin-bath Hamiltonian, in units with
/// `hbar = 1`.
///
/// `H = H0 + HB + HI` with
///
/// * `H0 = omega0/2 sz(0) + beta sx(0)`
/// * `HB = sum_i omega_i/2 sz(i) + beta sum_i sx(i) + lambda sum_{i<j} sx(i) sx(j)`
/// * `HI = lambda0 sum_i sx(i) sx(0)`
///
/// The model is immutable once built; use the `with_*` methods to derive
/// variants that differ in a single coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathModel<T> {
    omega0: T,
    beta: T,
    lambda0: T,
    lambda: T,
    omegas: Vec<T>,
    omega_c: T,
}

/// Plain-data description used to build a [`SpinBathModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub omega0: T,
    pub beta: T,
    pub lambda0: T,
    pub lambda: T,
    pub omegas: Vec<T>,
    pub omega_c: T,
}

impl<T: Real> ModelParams<T> {
    /// Defaults used throughout: `omega0 = 0.8288`, `beta = 0.01`,
    /// `lambda0 = 1`, `omega_c = 1`.
    pub fn with_frequencies(omegas: Vec<T>, lambda: T) -> Self {
        Self {
            omega0: T::lit(0.8288),
            beta: T::lit(0.01),
            lambda0: T::one(),
            lambda,
            omegas,
            omega_c: T::one(),
        }
    }

    pub fn build(self) -> Result<SpinBathModel<T>, HilbertError> {
        SpinBathModel::new(self)
    }
}

impl<T: Real> SpinBathModel<T> {
    pub fn new(params: ModelParams<T>) -> Result<Self, HilbertError> {
        let ModelParams {
            omega0,
            beta,
            lambda0,
            lambda,
            omegas,
            omega_c,
        } = params;
        for (name, value) in [
            ("omega0", omega0),
            ("beta", beta),
            ("lambda0", lambda0),
            ("lambda", lambda),
            ("omega_c", omega_c),
        ] {
            if !value.is_finite() {
                return Err(HilbertError::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        if omega_c < T::zero() {
            return Err(HilbertError::InvalidParameter {
                name: "omega_c",
                reason: "must be non-negative".into(),
            });
        }
        if omegas.len() > MAX_BATH_SPINS {
            return Err(HilbertError::InvalidParameter {
                name: "omegas",
                reason: format!("at most {MAX_BATH_SPINS} bath spins are supported"),
            });
        }
        for (i, &w) in omegas.iter().enumerate() {
            // Zero frequencies are admitted for the degenerate reference models.
            if !w.is_finite() || w < T::zero() || w > omega_c {
                return Err(HilbertError::InvalidParameter {
                    name: "omegas",
                    reason: format!("frequency {} of spin {} outside [0, omega_c]", w, i + 1),
                });
            }
        }
        Ok(Self {
            omega0,
            beta,
            lambda0,
            lambda,
            omegas,
            omega_c,
        })
    }

    /// All couplings and frequencies zero: `H = 0` on `n_bath` bath spins.
    pub fn null(n_bath: usize) -> Self {
        Self {
            omega0: T::zero(),
            beta: T::zero(),
            lambda0: T::zero(),
            lambda: T::zero(),
            omegas: vec![T::zero(); n_bath],
            omega_c: T::one(),
        }
    }

    pub fn params(&self) -> ModelParams<T> {
        ModelParams {
            omega0: self.omega0,
            beta: self.beta,
            lambda0: self.lambda0,
            lambda: self.lambda,
            omegas: self.omegas.clone(),
            omega_c: self.omega_c,
        }
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self, HilbertError> {
        SpinBathModel::new(ModelParams {
            lambda,
            ..self.params()
        })
    }

    pub fn with_lambda0(&self, lambda0: T) -> Result<Self, HilbertError> {
        SpinBathModel::new(ModelParams {
            lambda0,
            ..self.params()
        })
    }

    pub fn with_beta(&self, beta: T) -> Result<Self, HilbertError> {
        SpinBathModel::new(ModelParams { beta, ..self.params() })
    }

    /// Number of bath spins `N`.
    #[inline]
    pub fn n_bath(&self) -> usize {
        self.omegas.len()
    }

    /// Dimension of the full space, `2^(N+1)`.
    #[inline]
    pub fn full_dim(&self) -> usize {
        1usize << (self.n_bath() + 1)
    }

    /// Dimension of the bath space, `2^N`.
    #[inline]
    pub fn bath_dim(&self) -> usize {
        1usize << self.n_bath()
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn lambda0(&self) -> T {
        self.lambda0
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }
    pub fn omega_c(&self) -> T {
        self.omega_c
    }

    /// Crude bound on the spectral radius of `H`, used to scale tolerances.
    pub fn norm_bound(&self) -> T {
        let n = T::from_usize_lossy(self.n_bath());
        let half = T::lit(0.5);
        let z: T = self.omegas.iter().map(|w| w.abs() * half).sum();
        let pairs = n * (n - T::one()) * half;
        let bound = self.omega0.abs() * half
            + self.beta.abs() * (n + T::one())
            + z
            + self.lambda.abs() * if pairs > T::zero() { pairs } else { T::zero() }
            + self.lambda0.abs() * n;
        if bound.is_zero() {
            T::one()
        } else {
            bound
        }
    }
}
