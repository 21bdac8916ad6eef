//! Simulation toolkit for a bosonic qubit encoded in even/odd coherent-state
//! superpositions, with amplitude damping as the noise model.
//!
//! The crate is organised bottom-up: `hilbert` provides truncated Fock spaces
//! and exact-diagonalisation evolution, `channel` the damping channel in both
//! Kraus and Lindblad form, `codecheck` the code-quality diagnostics, `gates`
//! the logical gate set, `adiabatic` the Kerr-pump preparation dynamics, and
//! `qec` the detect-and-correct circuit with Monte Carlo scoring.

pub mod adiabatic;
pub mod channel;
pub mod codecheck;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod qec;

pub use error::{Error, Result};
pub use num_complex::Complex64;
