//! Residual multi-fidelity neural-network surrogates.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod io;
pub mod net;
pub mod problems;
pub mod rng;
pub mod surrogate;
pub mod uq;

pub use error::{Error, ErrorCategory, Result};
