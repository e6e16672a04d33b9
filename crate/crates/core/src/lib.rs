//! Generalized (complex-argument) delta functions and the phase-space
//! distributions of two-component cat states.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: Hermite polynomials, Gaussian moment integrals, trapezoid rules.
//! * [`states`]: coherent and cat states, truncated Fock density matrices.
//! * [`gendelta`]: the σ-regularized delta with complex center and its sifting.
//! * [`quasiprob`]: Q, Wigner and P representations and the transforms between them.
//! * [`amplifier`]: the phase-insensitive linear amplifier acting on cat states.
//! * [`reconstruct`]: density matrices rebuilt from the P representation.
//! * [`grid`]: sampled phase-space fields and their CSV/JSON formats.
//! * [`verify`]: the acceptance checks shared by the CLI and the test suite.

pub mod error;
pub mod numerics;
pub mod gendelta;
pub mod states;
pub mod grid;
pub mod convolve;
pub mod quasiprob;
pub mod amplifier;
pub mod reconstruct;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
