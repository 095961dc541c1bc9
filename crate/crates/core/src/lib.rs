//! Generalized modeling of planar predator-prey limit cycles.
//!
//! The pipeline runs from a specific model ([`model`]) to its attracting cycle and
//! monodromy matrix ([`orbit`]), the time-periodic scale and elasticity functions along
//! the cycle and their moduli flow ([`genfunc`]), Fourier coefficients and convolutions
//! ([`fourier`]), and the Floquet multiplier expressed through two convolution constants
//! ([`floquet`]). [`sampler`] draws scale/elasticity functions consistent with the moduli
//! flow by minimizing its coefficient-space residual.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod error;
pub mod floquet;
pub mod fourier;
pub mod genfunc;
pub mod io;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod orbit;
pub mod sampler;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mat2F64 = linalg::Mat2<f64>;
pub type ModelSpecF64 = model::ModelSpec<f64>;
pub type StateF64 = model::State<f64>;
pub type EqGenParamsF64 = model::EqGenParams<f64>;
pub type PeriodicOrbitF64 = orbit::PeriodicOrbit<f64>;
pub type MonodromyResultF64 = orbit::MonodromyResult<f64>;
pub type GeneralizedFunctionsF64 = genfunc::GeneralizedFunctions<f64>;
pub type FourierSeriesF64 = fourier::FourierSeries<f64>;
pub type FourierSeriesF32 = fourier::FourierSeries<f32>;
pub type GenCoefficientsF64 = fourier::GenCoefficients<f64>;
pub type ResidualSetF64 = fourier::ResidualSet<f64>;
pub type FloquetResultF64 = floquet::FloquetResult<f64>;
pub type SampleRecordF64 = sampler::SampleRecord<f64>;
pub type StatsSummaryF64 = sampler::StatsSummary<f64>;
