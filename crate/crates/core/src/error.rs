use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the engine.
///
/// Variants that represent resource refusals (as opposed to mathematical
/// impossibilities or bad input) answer `true` from [`Error::is_resource_limit`];
/// the CLI maps those to a distinct exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed braid word: {0}")]
    BadWord(String),

    #[error("diagram is disconnected; checkerboard data needs a connected diagram")]
    Disconnected,

    #[error("closure has {0} components; this computation needs a knot")]
    NotAKnot(usize),

    #[error("determinant is zero: {0}")]
    ZeroDeterminant(String),

    #[error("linking matrix is singular")]
    SingularLinking,

    #[error("recursion certificate failed: {0}")]
    QaFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("filtration violation: {0}")]
    Filtration(String),

    #[error("crossing count {n} exceeds the full-cube cap of {cap}; use the scanning reduction")]
    CrossingCap { n: usize, cap: usize },

    #[error("generator budget exceeded: {count} > {budget} (set {env} to raise it)")]
    Budget {
        count: u64,
        budget: u64,
        env: &'static str,
    },
}

impl Error {
    /// True for refusals driven by resource limits rather than mathematics.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::CrossingCap { .. } | Error::Budget { .. })
    }
}
