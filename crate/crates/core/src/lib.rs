//! Variational quantum eigensolver laboratory for nuclear pairing correlations.
//!
//! The crate builds a constant-pairing Hamiltonian from a pair-level scheme,
//! maps it to qubits with the Jordan-Wigner transformation, prepares a
//! first-order Trotterized paired coupled-cluster doubles (UpCCD) ansatz and
//! minimises the energy with SPSA on either an exact statevector backend or a
//! Monte-Carlo trajectory simulator with configurable relaxation and error
//! rates.
//!
//! Module map:
//!
//! - [`pauli`]: symplectic Pauli strings, weighted sums, qubit-wise commuting grouping
//! - [`fermion`]: ladder operators and the Jordan-Wigner map
//! - [`model`]: level schemes, the pairing Hamiltonian and the exact-diagonalisation oracle
//! - [`ansatz`]: Hartree-Fock preparation and the UpCCD circuit
//! - [`circuit`]: gate IR, Pauli-evolution lowering, native transpilation and depth
//! - [`sim`]: statevector engine, shot sampling, noise model and trajectory simulator
//! - [`vqe`]: SPSA, learning-rate calibration, logarithmic-fit termination
//! - [`harness`]: noise-grid sweeps, the k=0 experiment and result emission

pub mod ansatz;
pub mod circuit;
pub mod error;
pub mod fermion;
pub mod harness;
pub mod model;
pub mod pauli;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
