use thiserror::Error;

use crate::correlations::CorrelationKind;
use crate::steady::ConvergenceReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator type error: {0}")]
    OperatorType(String),

    #[error("invalid rate `{name}` = {value}: must be positive")]
    InvalidRate { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no unique steady state: two smallest singular values are {smallest:.3e} and {next:.3e}")]
    DegenerateSteadyState { smallest: f64, next: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("truncation did not converge before dimension cap ({} deltas recorded)", .0.observable_deltas.len())]
    TruncationDivergence(Box<ConvergenceReport>),

    #[error("correlation g2_{kind} undefined: occupation {occupation:.3e} below guard")]
    UndefinedCorrelation { kind: CorrelationKind, occupation: f64 },

    #[error("correlation value not real: imaginary part {imag:.3e}")]
    NonRealCorrelation { imag: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("linear algebra backend: {0}")]
    Backend(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSteadyState { .. }
                | Error::Residual { .. }
                | Error::InvalidDensityMatrix(_)
                | Error::TruncationDivergence(_)
                | Error::UndefinedCorrelation { .. }
                | Error::NonRealCorrelation { .. }
                | Error::Singular(_)
                | Error::Integration(_)
                | Error::Backend(_)
        )
    }
}
