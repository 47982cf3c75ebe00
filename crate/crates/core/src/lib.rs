//! Probing-input design for discriminating finite sets of LTI models.
//!
//! The pipeline: lift candidate models over a finite horizon ([`lift`]),
//! form the pairwise discrimination statistics and hypothesis tests
//! ([`discrim`]), assemble signal/discrimination measures into homogenized
//! quadratic programs ([`quadprog`]), solve their semidefinite relaxations
//! and recover feasible inputs by rank reduction or randomized rounding
//! ([`sdr`]), and validate designs by Monte Carlo simulation
//! ([`experiment`]).

pub mod chi2;
pub mod discrim;
pub mod error;
pub mod experiment;
pub mod lift;
pub mod quadprog;
pub mod linalg;
pub mod rng;
pub mod sdr;

pub use error::{Error, Result};
