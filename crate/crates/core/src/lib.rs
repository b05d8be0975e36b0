//! Numerical engine for optical holonomic quantum gates.
//!
//! The pipeline runs from a truncated bosonic Fock space ([`fock`]) through
//! the optical unitaries and the parameter family `W(λ)` ([`optics`]) to the
//! adiabatic connection and curvature ([`connection`]), path-ordered
//! holonomies and holonomy-algebra rank probes ([`holonomy`], [`rank`]), and
//! the job runner behind the command-line tool ([`runner`]).

mod action;
pub mod connection;
pub mod error;
pub mod fock;
pub mod holonomy;
pub mod linalg;
pub mod optics;
pub mod rank;
pub mod runner;
mod sparse;

pub use error::{Error, Result};
