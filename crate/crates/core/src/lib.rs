//! Statistics of observables after a small quantum quench of the transverse
//! axial next-nearest-neighbor Ising chain.
//!
//! The pipeline is: build the pre- and post-quench Hamiltonians
//! ([`hamiltonian`]), find the initial ground state and the post-quench
//! eigenstates it overlaps with ([`eigen`]), reduce the dynamics to a
//! cosine series ([`quench`]), sample and compare its time statistics
//! ([`distribution`]), and check the finite-size scaling laws ([`scaling`]).
//! [`harness`] ties everything to configuration files and plot tables.

pub mod config;
pub mod distribution;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod quench;
pub mod quadrature;
pub mod scaling;
pub(crate) mod linalg;

pub use error::{QuenchError, Result};
