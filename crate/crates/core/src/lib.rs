//! Numerical laboratory for the energy-cascade mechanism of the cubic
//! nonlinear Schrödinger equation on irrational tori.

pub mod diophantine;
pub mod error;
pub mod lambda_set;
pub mod nls_sim;
pub mod normal_form;
pub mod ode;
pub mod params;
pub mod poly;
pub mod quartic;
pub mod resonance;
pub mod scalar;
pub mod toy_model;

pub use error::{Error, ErrorClass, Result};

pub use diophantine::OmegaSpec;
pub use lambda_set::{BaseSet, LambdaSet};
pub use resonance::{Mode, Quartet};

/// Double-precision Fourier state.
pub type State = nls_sim::SparseFourierState<f64>;
/// Double-precision generating function.
pub type GeneratingFunctionF64 = normal_form::GeneratingFunction<f64>;
/// Exact generating function over ℚ(√d).
pub type GeneratingFunctionExact = normal_form::GeneratingFunction<scalar::QuadSurd>;
pub type ToyStateF64 = toy_model::ToyState<f64>;
pub type ToyTrajectoryF64 = toy_model::ToyTrajectory<f64>;
pub type NlsSystemF64 = nls_sim::NlsSystem<f64>;
pub type BirkhoffMapF64 = normal_form::BirkhoffMap<f64>;
