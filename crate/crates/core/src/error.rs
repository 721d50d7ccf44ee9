use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the domain of a function.
    #[error("{function}: argument {value} outside domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("polygamma order {order} exceeds supported maximum {max}")]
    UnsupportedOrder { order: u32, max: u32 },

    /// Every violated parameter constraint, in declaration order.
    #[error("invalid model parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("degenerate simplex: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rejection sampler gave up after {attempts} attempts (empirical acceptance rate {rate:.3e})")]
    LowAcceptance { attempts: u64, rate: f64 },

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("no cells selected: {0}")]
    EmptySelection(String),

    /// The truncated input cannot vouch for the selected cells.
    #[error("truncation certificate failed: {0}")]
    Uncertified(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
