use std::path::PathBuf;

use crate::model::Side;

/// Everything that can go wrong in this crate.
///
/// Variants fall in two families that the CLI maps to different exit codes:
/// input/validation problems and numerical failures. See [`Error::is_validation`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{side} term {term} has volume exponent {exponent} > 1 - order ({order}); the expansion diverges")]
    DivergentExpansion { side: Side, term: usize, order: u32, exponent: i32 },

    #[error("{side} term {term} makes the {side} rate negative at n = {state} (value {value:e})")]
    NegativeRate { side: Side, term: usize, state: u64, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("stationary support is absorbed at 0; use mfpt_exact_left for extinction times instead")]
    AbsorbedSupport,

    #[error("the family is absorbing at n = 0 (stationary mass sits at 0 for every parameter value)")]
    AbsorbingFamily,

    #[error("passage is impossible: the {side} rate vanishes at n = {state}, so the first passage time is infinite")]
    InfiniteMfpt { side: Side, state: u64 },

    #[error("truncation cap of {cap} states reached with tail mass {tail:e} still above tolerance")]
    Truncation { cap: u64, tail: f64 },

    #[error("singular integrand: {what} vanishes at x = {at}")]
    Singular { what: &'static str, at: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("could not read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical method.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::DivergentExpansion { .. }
                | Error::NegativeRate { .. }
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::AbsorbedSupport
                | Error::AbsorbingFamily
                | Error::Read { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
