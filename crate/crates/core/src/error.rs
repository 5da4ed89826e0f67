use thiserror::Error;

use crate::geom::Vec2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The norm is not differentiable at the origin.
    #[error("singular point: derivative of the norm requested at the origin")]
    SingularPoint,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("point ({}, {}) lies outside the domain", .0.x, .0.y)]
    Domain(Vec2),

    #[error("{value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("finite-difference stencil at ({}, {}) leaves the domain", .0.x, .0.y)]
    Stencil(Vec2),

    #[error("gradient vanishes at ({}, {}); the operator is undefined there", .0.x, .0.y)]
    SingularGradient(Vec2),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("level {t} is not below the maximum {max}")]
    EmptyLevel { t: f64, max: f64 },

    #[error("level-set extraction failed: {0}")]
    Extraction(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("manufactured solution rejected: {0}")]
    ManufacturedSolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn ensure_finite(v: Vec2) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "non-finite coordinates ({}, {})",
            v.x, v.y
        )))
    }
}
