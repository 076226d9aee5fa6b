//! Quantum dynamics of a Rydberg-blockaded spin lattice and its kinetic
//! description.
//!
//! In the limit of infinite nearest-neighbour interaction only
//! configurations without two adjacent excitations survive. The transverse
//! field then moves the state on the graph of those configurations, and
//! the distribution of the excitation number relaxes according to a
//! birth-death Master equation whose continuum limit is a Fokker-Planck
//! equation. This crate builds the graph, propagates the exact quantum
//! state, and solves both kinetic equations so they can be compared.

// `!(x >= 0.0)` style checks are how NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimer;
pub mod distribution;
pub mod error;
pub mod fpe;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod master;
pub mod quantum;
pub mod space;

pub use distribution::ExcitationDistribution;
pub use error::{Error, Result};
pub use lattice::Lattice;
pub use quantum::{ModelParams, StateVector};
pub use space::{ConfigSpace, Configuration};
