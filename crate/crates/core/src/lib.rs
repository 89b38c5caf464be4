//! Ground states of few-boson quantum dots by time-dependent quantum Monte
//! Carlo: every walker carries its own guide wave, and the guide waves of
//! different particles are coupled through a kernel-weighted effective
//! potential whose width (the nonlocal correlation length) is the single
//! variational parameter.

pub mod ensemble;
pub mod error;
pub mod grid;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
