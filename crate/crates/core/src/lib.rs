//! Spectral numerics for two-photon/one-photon quantum Rabi models and
//! non-commutative harmonic oscillators: truncated-basis spectra,
//! perturbation series, fiber decomposition, Feynman-Kac Monte Carlo
//! semigroup estimates and spectral zeta asymptotics.
//!
//! The numeric core is generic over the scalar type (see [`scalar::Scalar`]);
//! concrete `f64` aliases for the main types are exported at the crate root.

pub mod error;
pub mod fiber;
pub mod fock;
pub mod feynman_kac;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod scalar;
pub mod spectral;
pub mod zeta;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// f64 aliases for the main public types.
pub type Matrix64 = linalg::Matrix<f64>;
pub type ModelSpec64 = model::ModelSpec<f64>;
pub type TruncatedOperator64 = spectral::TruncatedOperator<f64>;
pub type Spectrum64 = spectral::Spectrum<f64>;
pub type SeriesCoeffs64 = perturbation::SeriesCoeffs<f64>;
pub type XiEvaluation64 = perturbation::XiEvaluation<f64>;
pub type ZetaValue64 = zeta::ZetaValue<f64>;
pub type FiberSpec64 = fiber::FiberSpec<f64>;
pub type FiberReport64 = fiber::FiberReport<f64>;
pub type PathSample64 = feynman_kac::PathSample<f64>;
pub type MCEstimate64 = feynman_kac::MCEstimate<f64>;
pub type TestVector64 = feynman_kac::TestVector<f64>;
