use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("precision of {0} decimal digits is below the minimum of 30")]
    PrecisionTooLow(u32),
    #[error("the zero mode of block r=0 has no reciprocal weight")]
    ZeroMode,
    #[error("coefficients cover m <= {have}, section needs m <= {needed}")]
    InsufficientCoefficients { needed: usize, have: usize },
    #[error("test vector component {0} is not strictly positive")]
    NonpositiveVector(usize),
    #[error("test vector is zero")]
    ZeroVector,
    #[error("tail bound diverged: {0}")]
    TailDivergence(String),
    #[error("lambda is not separated from the spectrum of K")]
    SpectrumProximity,
    #[error("outside the asymptotic window: {0}")]
    WindowViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("ledger violation: {0}")]
    LedgerViolation(String),
    #[error("gap not certified positive between N={n} and N={}", n + 1)]
    GapViolation { n: u32 },
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
