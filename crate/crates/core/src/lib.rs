//! Parity-transformation and gate-model embeddings of higher-order spin
//! Hamiltonians, with CNOT cost accounting, statevector checks and
//! benchmark scenario generators.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod finance;
pub mod gf2;
pub mod hamiltonian;
pub mod kbody;
pub mod parity;
pub mod qaoa;
pub mod router;
pub mod sim;
pub mod xia;

pub use error::{Error, Result};
pub use hamiltonian::{LogicalHamiltonian, SpinTerm};
