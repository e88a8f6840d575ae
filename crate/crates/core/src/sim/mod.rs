//! Dense statevector simulation and brute-force verification.

pub mod scan;
pub mod statevector;
pub mod verify;

pub use scan::{qaoa_energy, scan_optimize, ScanResult};
pub use statevector::{expectation_diagonal, simulate, StateVector, MAX_QUBITS};
pub use verify::{ROUTED_CHECK_MAX_SPINS, SPECTRUM_MAX_SPINS, SPECTRUM_MAX_TERMS, default_penalty, parity_observable, verify_parity_spectrum, verify_routed_equivalence, SpectrumCheck};
