//! Numerical laboratory for the generalized Camassa-Holm equation
//! `m_t - u_x m_x = -m^2/2 + u m + u_x^2/2 - u^2/2`, `m = u - u_xx`,
//! on a periodic interval.

pub mod error;
pub mod euler;
pub mod friedrichs;
pub mod harness;
pub mod lagrange;
pub mod model;
pub mod spectral;

pub use error::{GchError, Result};
