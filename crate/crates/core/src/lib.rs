//! Damped Kerr nonlinear coupler: two anharmonic oscillators exchanging photon
//! pairs inside a lossy, possibly thermal, two-mode cavity.
//!
//! The crate builds the model operators on a truncated Fock space, integrates
//! the Lindblad master equation, and tracks the entanglement of the
//! `{|0⟩, |2⟩}` qubit pair (Wootters concurrence and Bell-state fidelities),
//! including detection of sudden-death intervals and sudden-birth events.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod master_eq;
pub mod model;
pub mod sweep;

pub use error::{Error, Result};
