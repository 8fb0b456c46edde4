use alloc::boxed::Box;
use alloc::string::String;

use crate::constants::ConstantQuery;

/// Errors raised by the analytic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model or family parameter violates its declared invariants.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A root or inverse could not be bracketed.
    #[error("range error: {0}")]
    Range(String),
    /// A numerical procedure failed (bracket failure, non-convergence).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The horizon family sits on a limit excluded by every theorem (e.g. gamma = t*).
    #[error("boundary-regime: {0}")]
    BoundaryRegime(String),
    /// The horizon grows too fast for the supremum probability to vanish.
    #[error("T3-violation: {0}")]
    T3Violation(String),
    /// The requested evaluator does not cover the classified regime.
    #[error("unsupported branch: {0}")]
    UnsupportedBranch(String),
    /// No closed-form asymptotics are implemented; estimate by simulation instead.
    #[error("delegate-to-MC: {0}")]
    DelegateToMonteCarlo(String),
    /// A Pickands/Piterbarg constant has no closed form and is missing from the cache.
    #[error("constant-required: {0}")]
    ConstantRequired(Box<ConstantQuery>),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
