//! Shock fluctuations in the totally asymmetric simple exclusion process:
//! simulation, exact finite-time formulas, limiting distributions and the
//! experiments comparing them.

pub mod error;
pub mod exact;
pub mod harness;
pub mod limit;
pub mod linalg;
pub mod rng;
pub mod scaling;
pub mod sim;

pub use error::{Error, Result};
