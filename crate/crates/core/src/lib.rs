//! Truncated Fock-space simulation of two-mode squeezing experiments.
//!
//! The crate compares two accounts of the same homodyne experiment: the
//! usual one, where the laser is a coherent state and the optical parametric
//! oscillator emits a two-mode squeezed vacuum, and one where the laser is a
//! photon-number (Fock) state, so signal, idler and both local oscillators
//! share a fixed photon budget.
//!
//! - [`fock`]: sparse multimode Fock states, ladder operators, beamsplitters.
//! - [`squeeze`]: squeezed-vacuum coefficients and the closed-form variances.
//! - [`homodyne`]: four-mode states and exact count-difference variances.
//! - [`phase`]: the four-mode relative phase distribution and its spread.
//! - [`entangle`]: reduced signal/idler states and log-negativity.
//! - [`cli`]: table-producing batch front-end used by the `twinbeam` binary.

pub mod cli;
pub mod entangle;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod phase;
pub mod squeeze;

pub use error::{Error, Result};
pub use num_complex::Complex64;
