//! Simulation and verification toolkit for magnetic geodesic flows on the
//! hyperbolic plane and its compact genus-2 quotient.
//!
//! The flow of a charged particle in the uniform magnetic field given by the
//! hyperbolic area form changes character at the critical energy `E = 1/2`:
//! below it every trajectory is a closed hyperbolic circle whose center is a
//! conserved quantity (the flow is integrable), at the critical level
//! trajectories are dense horocycles, and above it the flow is uniformly
//! hyperbolic. This crate provides the disk geometry, the Hamiltonian flow,
//! the exact subcritical orbits and their conserved centers, the genus-2
//! octagon quotient, and numerical chaos diagnostics.

// Validation predicates are spelled `!(x > 0.0)` so NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod curves;
pub mod error;
pub mod flow;
pub mod hyperbolic;
pub mod integrals;
pub mod quotient;

pub use error::{Error, Result};
