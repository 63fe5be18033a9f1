use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("recursion diverged: {0}")]
    Divergence(String),
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("insufficient exceedances: found {found}, need at least {needed}")]
    InsufficientExceedances { found: usize, needed: usize },
    #[error("insufficient cycles: found {found}, need at least {needed}")]
    InsufficientCycles { found: usize, needed: usize },
    #[error("no regeneration observed in {0} steps; increase n or epsilon")]
    NoCycles(usize),
    #[error("minorization invalid: {0}")]
    MinorizationInvalid(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("too few exceedances ({count}) at x = {x}; widen the replica count")]
    WidenReplicas { x: f64, count: u64 },
    #[error("region error: {0}")]
    Region(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures caused by the numerical regime of the model rather than by bad input.
    pub fn is_numeric_regime(&self) -> bool {
        matches!(
            self,
            Error::Divergence(_)
                | Error::NoRoot(_)
                | Error::Bracket(_)
                | Error::OutOfRegime(_)
                | Error::MinorizationInvalid(_)
                | Error::NoCycles(_)
                | Error::InsufficientCycles { .. }
                | Error::InsufficientExceedances { .. }
                | Error::WidenReplicas { .. }
                | Error::DegenerateSample(_)
        )
    }
}
