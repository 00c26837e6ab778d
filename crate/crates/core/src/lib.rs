//! Central-extension geometry and quasi-geostrophic dynamics on the flat torus.
//!
//! - [`spectral`]: Fourier representation of scalars and divergence-free fields.
//! - [`algebra`]: the extended algebra (cocycle, `T`, brackets, connection, noise corrections).
//! - [`noise`]: noise directions for the stochastic flows.
//! - [`solver`]: vorticity-form and abstract-form time integration.
//! - [`stochastic`]: particle simulation and Monte Carlo estimators.
//! - [`integrability`]: the integral criterion for cohomologous cocycles.

pub mod algebra;
pub mod error;
pub mod integrability;
pub mod noise;
mod quadrature;
pub mod solver;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use quadrature::simpson_weights;
