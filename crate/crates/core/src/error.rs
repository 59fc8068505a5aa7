use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto distinct exit
/// codes: schema/input problems → 2, precision exhaustion → 3,
/// diameter/cap guards → 4, failed theorem verdicts → 5.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spec error: {0}")]
    Spec(String),

    #[error("{0} is not prime")]
    NonPrime(u64),

    #[error("precision must be at least 1")]
    BadPrecision,

    #[error("generator {0:?} is not invertible")]
    NonInvertibleGenerator(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("unbounded orbit — image may not stabilize a lattice ({0})")]
    UnboundedOrbit(String),

    #[error("possibly reducible: {0}")]
    DiameterExceeded(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("not normalised: vector reduces to zero")]
    NotNormalised,

    #[error("{0} is not a residual factor")]
    NotAFactor(String),

    #[error("socle filtration level {0} out of range")]
    LevelOutOfRange(usize),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("verdict failed: {0}")]
    VerdictFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec(_)
            | Error::NonPrime(_)
            | Error::BadPrecision
            | Error::NonInvertibleGenerator(_)
            | Error::NotNormalised
            | Error::Io(_) => 2,
            Error::PrecisionExhausted(_) => 3,
            Error::UnboundedOrbit(_) | Error::DiameterExceeded(_) | Error::CapExceeded(_) => 4,
            // internal cross-check failures would falsify a theorem, so
            // they share the verdict-failure code
            Error::VerdictFailed(_) | Error::Internal(_) => 5,
            _ => 1,
        }
    }
}
