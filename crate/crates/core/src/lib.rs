//! Simulation of a two-chain discrete time crystal driven by reciprocal or
//! non-reciprocal interchain hopping.
//!
//! The crate builds the single-period Floquet operator, evolves states
//! stroboscopically, extracts the biorthogonal Floquet spectrum and computes
//! the diagnostics used to characterise the time-crystalline phase:
//! imbalance oscillations, π-paired overlaps, quasienergy-gap scaling,
//! Fourier melting maps and PT-symmetry certificates.

pub mod basis;
pub mod error;
pub mod fitting;
pub mod linalg;
pub mod diagnostics;
pub mod dynamics;
pub mod model;
pub mod runner;
pub mod spectral;
pub mod symmetry;

pub use error::{Error, Result};
