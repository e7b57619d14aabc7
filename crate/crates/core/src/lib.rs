//! Quantum-kernel matrix multiplication (QKMM) on a classical simulator.
//!
//! The crate builds the circuits that read inner products, matrix-vector and
//! matrix-matrix products (and products against a bank of unitaries) off the
//! ground-state amplitudes of amplitude-encoded registers, together with the
//! Swap-Test and Hadamard-Test baselines. It simulates them exactly
//! ([`state`]) or under hardware-style noise ([`density`], [`noise`]), counts
//! their gates ([`count`]) and turns measurement data into magnitude
//! estimates ([`metrics`]).
//!
//! Qubit 0 is the most significant bit of every basis-state index.

pub mod algos;
pub mod circuit;
pub mod count;
pub mod decompose;
pub mod density;
pub mod encoding;
pub mod error;
pub mod instances;
mod kernel;
pub mod metrics;
pub mod noise;
pub mod state;
pub mod unitary;

pub use circuit::{Circuit, Control, Gate, GateKind, GateSink, Register, UnitaryBlock};
pub use density::DensityMatrix;
pub use error::{QkmmError, Result};
pub use state::{sample_shots, ShotHistogram, StateVector};
