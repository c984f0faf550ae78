//! Renormalized volumes, conformal invariants and scattering data of
//! Poincaré–Einstein metrics with space-form boundaries.

pub mod check;
pub mod conformal;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod quadrature;
pub mod radial_ode;
pub mod report;
pub mod scattering;
pub mod series;
pub mod special;
pub mod vequation;
pub mod volume;

pub use error::{Error, Result};
pub use series::LogSeries;
