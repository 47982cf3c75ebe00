//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The semidefinite relaxation is primal infeasible. Carries a Farkas
    /// certificate `y`: a dual vector with `A'y + s = 0`, `s` in the dual
    /// cone and `b'y = 1`.
    #[error("problem is infeasible (Farkas certificate available)")]
    Infeasible { certificate: Vec<f64> },

    /// The relaxation is unbounded; carries an improving ray for the
    /// matrix variable (flattened).
    #[error("problem is unbounded")]
    Unbounded { ray: Vec<f64> },

    #[error("solver reached {0} iterations without closing the duality gap")]
    MaxIterations(usize),

    #[error("solver made no progress: {0}")]
    NumericalFailure(String),

    #[error("covariance factor product is singular; log-determinant undefined")]
    SingularCovariance,

    /// `extract_rank1` declined: the solution is not numerically rank one.
    #[error("solution is not rank one (eigenvalue ratio {ratio:.3e} > {tol:.3e})")]
    NotRankOne { ratio: f64, tol: f64 },

    #[error("no feasible sample found after {attempts} randomization draws")]
    NoFeasibleSample { attempts: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
