//! Exact dynamics of a central spin-1/2 coupled to a self-interacting
//! spin-1/2 bath.
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.

pub mod cli;
pub mod eigensolve;
pub mod ensemble;
pub mod hilbert;
pub mod propagate;
pub mod scalar;
pub mod scenarios;

pub use scalar::Real;

pub type Model = hilbert::SpinBathModel<f64>;
pub type Params = hilbert::ModelParams<f64>;
pub type State = hilbert::StateVector<f64>;
pub type Operator = hilbert::FlipOperator<f64>;
pub type Spectrum = eigensolve::BathSpectrum<f64>;
pub type Ensemble = ensemble::ThermalEnsemble<f64>;
pub type Density = ensemble::ReducedDensity<f64>;
pub type Series = ensemble::ObservableSeries<f64>;
pub type Settings = propagate::PropagationSettings<f64>;
pub type Output = scenarios::ScenarioOutput<f64>;
