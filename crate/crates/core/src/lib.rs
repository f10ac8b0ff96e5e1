pub mod channel;
pub mod cli;
pub mod codec;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod poisson;
pub mod random;
pub mod sde;
pub mod selftest;
pub mod spectral;
pub mod stats;
pub mod tol;

pub use error::{Error, Result};
