//! Simulation and verification toolkit for measurement-based feedback
//! cooling of small quantum systems under continuous homodyne monitoring.
//!
//! The crate integrates the diffusive stochastic master equation with a
//! positivity-preserving Kraus-form scheme, implements the hysteresis
//! switching controller together with its filter-free output-based
//! approximations, and runs deterministic Monte Carlo ensembles over both
//! bundled presets (a qutrit and the antiferromagnetic Heisenberg triangle).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod ensemble;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod rng;
pub mod systems;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use linalg::Cm;
