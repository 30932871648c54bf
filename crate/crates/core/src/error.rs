use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric parameter fell outside its domain. `bound` is human readable,
    /// e.g. `"p ∈ [0,1]"`.
    #[error("{field} = {value} is out of range, expected {bound}")]
    OutOfDomain {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(&'static str),

    #[error("Kraus operators are not complete: max |Σ A†A - I| = {defect:e}")]
    Incomplete { defect: f64 },

    #[error("a channel needs between 1 and 4 Kraus operators, got {0}")]
    KrausCount(usize),

    #[error("quarter turn must be in 0..=3, got {0}")]
    QuarterTurn(u8),

    #[error("cannot compose an empty sequence of superoperators")]
    EmptySequence,

    #[error("{0} requires a valid round (even sum of class bits)")]
    InvalidRound(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("exhaustive enumeration supports at most {max} players, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("no valid rounds among {rounds} simulated rounds")]
    NoValidRounds { rounds: u64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
