use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by lattice, series, realization and Schur computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("point {0} lies outside the window")]
    OutsideWindow(String),

    #[error("path step from {from} to {to} is not a unit step")]
    NonUnitStep { from: String, to: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    /// `-2α₊` or `-2α₋` is an eigenvalue; `witness` names the singular factor.
    #[error("inadmissible state matrix: {witness} is singular")]
    Inadmissible { witness: String },

    #[error("pole condition violated: denominator vanishes at {0}")]
    PoleCondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("not a contraction: {0}")]
    NotContraction(String),

    #[error("infeasible dimensions: {0}")]
    InfeasibleDims(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::WindowTooSmall(_) => "window_too_small",
            Error::OutsideWindow(_) => "outside_window",
            Error::NonUnitStep { .. } => "non_unit_step",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Singular(_) => "singular",
            Error::Inadmissible { .. } => "inadmissible",
            Error::PoleCondition(_) => "pole_condition",
            Error::InsufficientData(_) => "insufficient_data",
            Error::NotContraction(_) => "not_contraction",
            Error::InfeasibleDims(_) => "infeasible_dims",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse",
        }
    }

    /// The offending object, when the error carries one.
    pub fn witness(&self) -> Option<String> {
        match self {
            Error::Inadmissible { witness } => Some(witness.clone()),
            Error::OutsideWindow(p) => Some(p.clone()),
            Error::NonUnitStep { from, to } => Some(format!("{from}->{to}")),
            Error::PoleCondition(t) => Some(t.clone()),
            _ => None,
        }
    }
}
