//! Four-level coherent population trapping (CPT) model.
//!
//! The crate is `no_std` with `alloc`: it builds the rotating-frame
//! Hamiltonian and Liouvillian of a Λ-type emitter with three ground levels
//! and one excited level, solves for the steady state, analyses dark states,
//! synthesizes fluorescence spectra versus modulation frequency and fits them
//! under the constrained relaxation model. IO, random scan simulation and the
//! command line live in the `cptsim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fitter;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
