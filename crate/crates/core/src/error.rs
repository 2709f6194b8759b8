use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("singularity: {0}")]
    Singular(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("config error: {0}")]
    Config(String),

    /// `cdf(quantile(p))` disagrees with `p` beyond 1e-12.
    #[error("family inconsistency at p = {p}: cdf(quantile(p)) = {roundtrip}")]
    Inconsistent { p: f64, roundtrip: f64 },

    #[error("retry budget exhausted after {tries} tries")]
    RetryBudget { tries: u64 },

    #[error("n = {n}: {source}")]
    AtSize { n: u64, source: Box<Error> },

    #[error("n = {n}, replication = {replication}: {source}")]
    AtReplication {
        n: u64,
        replication: u64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at(self, n: u64, replication: u64) -> Self {
        Error::AtReplication {
            n,
            replication,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_size(self, n: u64) -> Self {
        Error::AtSize {
            n,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any replication context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtReplication { source, .. } | Error::AtSize { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the error stems from the configuration or schedule rather than
    /// from a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(self.root(), Error::Config(_) | Error::Schedule(_))
    }
}
