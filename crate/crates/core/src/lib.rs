//! Jaynes-Cummings-Hubbard dynamics of trapped-ion polaritons and
//! phase-coherent three-pulse two-dimensional spectroscopy.
//!
//! Frequencies enter as linear kHz and are converted to angular units
//! (rad/ms) once, when a Hamiltonian or dissipator is built. Times are in ms,
//! so every spectral axis is reported in angular kHz.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod model;
pub mod protocol;
pub mod spectra;
pub mod states;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hilbert::{
    build_basis, expectation, local_operator, number_operator, Basis, BasisSpec, BasisState,
    CMatrix, CVector, DensityMatrix, LocalKind, OperatorMatrix, C64,
};
pub use model::{
    build_motional_hamiltonian, build_polariton_hamiltonian, eigensweep, equilibrium_positions,
    phonon_network, ChainGeometry, ModelParams, PhononNetwork,
};
pub use states::{atomic_insulator, phase_fidelities, phonon_superfluid, StateVector};
pub use dynamics::{coherence_decay_rate, Backend, Health, Liouvillian};
