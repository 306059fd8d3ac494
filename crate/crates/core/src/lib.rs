//! Simple symmetric exclusion on the discrete torus, its fluctuation field,
//! and the Gaussian (generalized Ornstein–Uhlenbeck) limit law.

pub mod error;
pub mod harness;
pub mod observables;
mod ode;
pub mod ou;
pub mod ssep;
pub mod torus;

pub use error::{Error, Result};
