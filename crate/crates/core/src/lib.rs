//! Numerical verification of harmonic-Gaussian dispersion operators, their
//! relativistic tensor extension, the mass sector, the Clifford factor
//! algebra and the separable field equations built from them.

pub mod clifford;
pub mod error;
pub mod field;
pub mod hermite;
pub mod iterative;
pub mod kron;
pub mod mass;
pub mod operator;
pub mod relativistic;
pub mod sampling;
pub mod scalar;
pub mod tridiag;

pub use error::{Error, Result};
pub use nalgebra::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
pub type GaussianParams64 = hermite::GaussianParams<f64>;
pub type GaussianParams32 = hermite::GaussianParams<f32>;
pub type Operator64 = operator::OperatorMatrix<f64>;
pub type Operator32 = operator::OperatorMatrix<f32>;
pub type DispersionTensor64 = relativistic::DispersionTensor<f64>;
pub type ModelConfig64 = field::ModelConfig<f64>;
pub type FieldModel64 = field::FieldModel<f64>;
