//! Magic-resource accounting for measurement-based quantum computation.
//!
//! The crate simulates few-qubit graph states and measurement patterns,
//! computes Pauli spectra and stabilizer Rényi entropies, compiles circuits
//! into J-gate patterns, and tracks invested, reserved, potential and wasted
//! magic. A randomized-measurement estimator recovers M₂ from Pauli-basis shots.
//!
//! Qubit 0 is the most significant bit of every basis index; see [`qstate`].

pub mod cli;
pub mod compiler;
pub mod error;
pub mod estimator;
pub mod optimize;
pub mod pattern;
pub mod pauli;
pub mod qft;
pub mod qstate;
pub mod resources;
pub mod rng;

pub use error::{Error, Result};
pub use pauli::{MagicValue, PauliString, SpectrumVector, T_UNIT_BITS};
pub use qstate::{Gate, GateKind, MeasBasis, MixedState, PureState, C64};
