//! Simulation and verification toolkit for oblivious transfer built on
//! hidden Bell pairs in noisy and bounded quantum-storage models, a
//! hash-chain time-lock puzzle that makes the transfer a single message,
//! and a one-shot garbled-circuit two-party computation on top of it.

pub mod adversary;
pub mod cli;
pub mod compile2pc;
pub mod error;
pub mod gc;
pub mod noise;
pub mod protocol;
pub mod qsim;
pub mod rng;
pub mod spectra;
pub mod tlp;

pub use error::{Error, Result};
