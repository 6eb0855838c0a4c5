//! Exact microcanonical shells and single-measurement probability laws on
//! small periodic lattices.
//!
//! The pipeline runs bottom-up:
//!
//! * [`lattice`]: geometry and the nearest-neighbour model over configurations.
//! * [`texture`]: observables measured from outside a subvolume and the
//!   maps between nested subvolumes.
//! * [`ensemble`]: the phase space of microcanonical shells and the local
//!   states built on it.
//! * [`algebra`]: functions and states on the phase space, with their
//!   projection-valued measures.
//! * [`measurement`]: probability laws and seeded sampling.
//! * [`config`] and [`commands`]: the run configuration format and the
//!   command implementations behind the `lattice-shells` binary.

pub mod algebra;
pub mod bitset;
pub mod borel;
pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod lattice;
pub mod measurement;
pub mod rational;
pub mod report;
pub mod texture;

pub use error::{Error, Result};
