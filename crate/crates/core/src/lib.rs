//! Variational dynamics of the one-dimensional Bose-Hubbard chain in a basis of
//! time-dependent SU(M) coherent states, together with an exact propagator in
//! the fixed-particle-number Fock sector that serves as a reference.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`] enumerates the occupation-number basis and holds state vectors.
//! * [`hamiltonian`] assembles the sparse chain Hamiltonian in that basis.
//! * [`oracle`] propagates Fock-space states with an adaptive Runge-Kutta scheme.
//! * [`gcs`] implements the coherent-state algebra (overlaps, expansion into
//!   Fock states, matrix elements, observables, projection of target states).
//! * [`grid`] samples discrete coherent-state bases from von Neumann lattices.
//! * [`engine`] assembles and integrates the coupled equations of motion of
//!   the expansion coefficients and the coherent-state parameters.
//! * [`io`] reads and writes trajectories.

pub mod engine;
mod error;
pub mod fock;
pub mod gcs;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod oracle;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

pub use engine::{
    assemble_blocks, propagate_gcs, regularized_solve, EngineConfig, Observables, SolveOutcome,
    TangentSystem, Trajectory,
};
pub use fock::{enumerate_fock_basis, fock_dimension, fock_populations, FockBasis, FockState};
pub use gcs::{
    energy_expectation, ensemble_norm, gcs_overlap, gcs_populations, gcs_to_fock, project_state,
    transition_element, GcsEnsemble, GcsParams, Projection,
};
pub use grid::{
    bloch_coordinates, build_lattice, sample_ensemble, to_gcs, GlauberPoint, GridSpec,
    SamplingMode,
};
pub use linalg::SpectralFilter;
pub use hamiltonian::{build_hamiltonian, CsrMatrix, FockHamiltonian, HamiltonianParams};
pub use oracle::{propagate_fock, FockConfig, FockTrajectory};
