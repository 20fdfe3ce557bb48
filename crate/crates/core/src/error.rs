use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("{0} out of range")]
    Range(String),

    #[error("estimated channel rows are numerically dependent (pivot {pivot:e})")]
    RankDeficient { pivot: f64 },

    #[error("no root in [{lo}, {hi}]: no sign change")]
    NoRoot { lo: f64, hi: f64 },

    #[error("{function} did not converge in {iterations} iterations")]
    NoConvergence { function: &'static str, iterations: usize },

    #[error("closed-form split has a degenerate denominator ({denominator:e})")]
    DegenerateDenominator { denominator: f64 },

    #[error("exact minimum mean needs K(nt-1) <= {limit}, got {got}")]
    OverflowGuard { got: usize, limit: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
