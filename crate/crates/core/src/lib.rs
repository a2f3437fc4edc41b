//! Finite-dimensional tools for asking whether a Hamiltonian and a state
//! single out a preferred structure (basis, measurement, factorization), or
//! whether a unitary from the Hamiltonian's commutant produces an equally
//! valid rival.
//!
//! Start with [`relevance::certify_nonuniqueness`]; the `examples/`
//! directory has one program per capability.

pub mod commutant;
pub mod decoherence;
pub mod error;
pub mod espace;
pub mod experiments;
pub mod hilbert;
pub mod kstruct;
pub mod models;
pub mod relevance;
pub mod sampling;

pub use error::{QsError, Result};
