use alloc::string::String;
use alloc::vec::Vec;

use crate::coupler::StageRecord;
use crate::front::FrontProfile;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// Invalid configuration; `field` names the offending entry.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(
        "Péclet number c·h_x = {peclet:.3} exceeds 2 (c = {c}, h_x = {hx}); refine the X grid"
    )]
    Peclet { peclet: f64, c: f64, hx: f64 },

    #[error(
        "linear system is singular or ill-conditioned at row {row} (pivot ratio {pivot_ratio:.3e})"
    )]
    Singular { row: usize, pivot_ratio: f64 },

    #[error("linear solve residual {relative:.3e} above the 1e-12 contract")]
    LinearResidual { relative: f64 },

    #[error("front relaxation did not converge in {iterations} steps (residual {residual:.3e})")]
    FrontNotConverged {
        iterations: usize,
        residual: f64,
        c: f64,
        last: FrontProfile,
    },

    #[error("Picard iteration at n = {n} did not converge in {iterations} steps (last change {delta:.3e})")]
    PicardNotConverged {
        n: u64,
        iterations: usize,
        delta: f64,
        /// Speeds visited by the iteration, oldest first.
        visited: Vec<f64>,
    },

    #[error("continuation failed at n = {n}: {reason}")]
    NonConvergence {
        n: u64,
        reason: String,
        /// Every completed stage.
        history: Vec<StageRecord>,
    },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}
