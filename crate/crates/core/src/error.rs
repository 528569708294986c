use thiserror::Error;

use crate::resonance::{Mode, Quartet};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("no qualifying convergent within depth {depth}")]
    NotFoundWithinDepth { depth: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("undefined for rational omega: {0}")]
    RationalOmega(String),
    #[error("quartet {0:?} does not conserve momentum")]
    NotMomentumClosed(Quartet),
    #[error("A(1) is empty")]
    EmptyA1,
    #[error("the set has no (p,q)-families")]
    NoFamilies,
    #[error("placement search exhausted after {nodes} nodes")]
    SearchExhausted { nodes: u64 },
    #[error("exhaustive scan needs {needed} quadruples, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("A(1) quartet {0:?} is exactly resonant")]
    ResonantA1(Quartet),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("flow left the ball: l1 norm {norm:.3e} exceeds {radius:.3e}")]
    BallEscape { norm: f64, radius: f64 },
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("integrator tolerance unmet: {0}")]
    ToleranceUnmet(String),
    #[error("relation maps missing: {0}")]
    RelationsMissing(String),
    #[error("orbit search failed: {0}")]
    SearchFailed(String),
    #[error("mode {0:?} lies outside the truncation region")]
    SupportEscape(Mode),
    #[error("s = {0} is outside the supported range s > 1")]
    UnsupportedSRange(String),
}

/// Coarse failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Search,
    Precision,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidInput(_)
            | Domain(_)
            | RationalOmega(_)
            | UnsupportedSRange(_)
            | NotMomentumClosed(_)
            | RelationsMissing(_)
            | HypothesisViolated(_) => ErrorClass::Config,
            PrecisionExhausted(_) => ErrorClass::Precision,
            NotFoundWithinDepth { .. } | SearchExhausted { .. } | BudgetExceeded { .. } | SearchFailed(_) => ErrorClass::Search,
            EmptyA1 | NoFamilies | ResonantA1(_) | BallEscape { .. } | StepUnderflow { .. } | ToleranceUnmet(_) | SupportEscape(_) => {
                ErrorClass::Numeric
            }
        }
    }
}
