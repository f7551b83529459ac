use thiserror::Error;

use crate::dispersion::{CrystalId, OpticalAxis};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Coefficient database failed to parse or validate.
    #[error("coefficient database, {location}: {message}")]
    Database { location: String, message: String },

    #[error("no dispersion model for ({crystal}, {axis}){}", tag.as_deref().map(|t| format!(" with source `{t}`")).unwrap_or_default())]
    MissingModel {
        crystal: CrystalId,
        axis: OpticalAxis,
        tag: Option<String>,
    },

    /// Evaluation outside a model's declared validity window.
    #[error("{quantity} {value} outside validity range [{lo}, {hi}] of {model}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
        model: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no sign change of the {what} residual in [{lo_nm} nm, {hi_nm} nm]")]
    NoSignChange {
        what: &'static str,
        lo_nm: f64,
        hi_nm: f64,
    },

    #[error("{what} residual has {} roots; narrow the window. Brackets (nm): {}", brackets.len(), fmt_brackets(brackets))]
    MultipleRoots {
        what: &'static str,
        brackets: Vec<(f64, f64)>,
    },

    #[error("no phase-matched pair in [{lo_nm} nm, {hi_nm} nm]; minimal |dk| = {min_abs_mismatch} rad/um")]
    NoPhaseMatch {
        lo_nm: f64,
        hi_nm: f64,
        min_abs_mismatch: f64,
    },

    #[error(
        "first-order quasi-phase-matching impossible: k_s + k_i - k_p = {0} rad/um is not positive"
    )]
    NonPositiveGrating(f64),

    #[error("spectral grid too small: boundary |f| is {ratio:.4} of the peak (limit 0.01)")]
    GridClipped { ratio: f64 },

    #[error("joint spectral amplitude is not normalized")]
    NotNormalized,

    #[error("HOM interference needs a square grid with identical signal and idler axes")]
    GridMismatch,

    #[error("scan failed at {temperature_c} degC: {source}")]
    ScanFailed {
        temperature_c: f64,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_brackets(b: &[(f64, f64)]) -> String {
    b.iter()
        .map(|(lo, hi)| format!("[{lo:.1}, {hi:.1}]"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by the requested domain (grid extent, validity
    /// windows) rather than by a solver.
    pub fn is_domain_error(&self) -> bool {
        match self {
            Error::GridClipped { .. } | Error::OutOfRange { .. } | Error::GridMismatch => true,
            Error::ScanFailed { source, .. } => source.is_domain_error(),
            _ => false,
        }
    }
}
