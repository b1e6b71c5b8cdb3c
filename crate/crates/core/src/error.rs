use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("inconsistent b-map descriptor: {0}")]
    Inconsistent(String),
    #[error("map is not a b-fibration: {0}")]
    NotBFibration(String),
    #[error("integrability condition violated: {0}")]
    Integrability(String),
    #[error("operator is not b-elliptic: leading coefficient vanishes at x = 0")]
    NotBElliptic,
    #[error(
        "weight {gamma} is inadmissible: within tolerance of indicial root real part {root_re}"
    )]
    InadmissibleWeight { gamma: String, root_re: f64 },
    #[error("composition undefined: {0}")]
    CompositionUndefined(String),
    #[error("parametrix step {step} failed: {reason}")]
    Parametrix { step: usize, reason: String },
    #[error("ill-conditioned fit basis (condition number {cond:.3e})")]
    Conditioning { cond: f64 },
    #[error("fit rejected: {0}")]
    FitRejected(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl Error {
    /// True when the error signals a violated theorem hypothesis rather than bad input.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::NotBFibration(_)
                | Error::Integrability(_)
                | Error::CompositionUndefined(_)
                | Error::Parametrix { .. }
                | Error::NotBElliptic
                | Error::InadmissibleWeight { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
