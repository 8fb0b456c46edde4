/// Errors raised by simulation, estimation, studies and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gfq_core::Error),
    /// The circulant embedding produced a negative eigenvalue.
    #[error("embedding error: {0}")]
    Embedding(String),
    /// A run would exceed the configured path-point budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Invalid configuration or arguments.
    #[error("config error: {0}")]
    Config(String),
    /// The request is outside what the simulator supports.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Exit codes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Validation = 2,
    Numeric = 3,
    Budget = 4,
}

impl Error {
    pub fn exit_code(&self) -> ExitCode {
        use gfq_core::Error as C;
        match self {
            Error::Core(C::Domain(_) | C::Parameter(_)) => ExitCode::Validation,
            Error::Core(_) | Error::Embedding(_) | Error::Unsupported(_) => ExitCode::Numeric,
            Error::Budget(_) => ExitCode::Budget,
            Error::Config(_) | Error::Io(_) | Error::Json(_) => ExitCode::Validation,
        }
    }

    /// Short machine-readable error class.
    pub fn kind(&self) -> &'static str {
        use gfq_core::Error as C;
        match self {
            Error::Core(e) => match e {
                C::Domain(_) => "domain",
                C::Parameter(_) => "parameter",
                C::Range(_) => "range",
                C::Numeric(_) => "numeric",
                C::BoundaryRegime(_) => "boundary-regime",
                C::T3Violation(_) => "t3-violation",
                C::UnsupportedBranch(_) => "unsupported-branch",
                C::DelegateToMonteCarlo(_) => "delegate-to-mc",
                C::ConstantRequired(_) => "constant-required",
            },
            Error::Embedding(_) => "embedding",
            Error::Budget(_) => "budget",
            Error::Config(_) => "config",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
