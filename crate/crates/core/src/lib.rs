//! Decomposition of rational L^p functions on the real line (`0 < p < 1`)
//! into boundary values of Hardy-space functions of the two half-planes.

pub mod approx;
pub mod cayley;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod hardy;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod spectral;
pub mod split;
pub mod verify;

pub use error::{Error, Result};
