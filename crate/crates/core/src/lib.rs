//! Counter-diabatic shortcuts for population transfer and Bell-state
//! preparation between two Λ atoms sharing a two-mode cavity.
//!
//! Units: frequencies in units of the atom–cavity coupling `g`, times in
//! `1/g`, ħ = 1.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod pulses;
pub mod spectral;
pub mod statespace;

pub use error::{Error, Result};
