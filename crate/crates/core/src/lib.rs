pub mod chebyshev;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod krylov;
pub mod groundstate;
pub mod profiles;
pub mod quadrature;
pub mod scenarios;
pub mod snapshot;

pub use error::{Error, Result};
