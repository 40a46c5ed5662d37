//! Localizable entanglement of qubit chains.
//!
//! Qubits are indexed big-endian: site 0 is the most significant bit of a
//! basis-state index, so the amplitude of `|b0 b1 ... b(n-1)>` sits at
//! `Σ b_k 2^(n-1-k)`. Pauli correlators use `σ` normalization (`±1` outcomes).

pub mod corr_theorem;
pub mod ent_measures;
pub mod error;
pub mod le_engine;
mod par;
pub mod random;
pub mod qstate;
pub mod spin_models;

pub use error::{Error, Result};
pub use par::available as parallel_available;
