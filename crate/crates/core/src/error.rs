use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must contain at least two symbols, got {0}")]
    AlphabetTooSmall(usize),

    #[error("duplicate token {0:?} in alphabet")]
    DuplicateToken(String),

    #[error("token {0:?} is not in the alphabet")]
    UnknownToken(String),

    #[error("symbol id {id} out of range for alphabet of size {size}")]
    SymbolOutOfRange { id: u32, size: usize },

    #[error("invalid alphabet spec: {0}")]
    AlphabetSpec(String),

    #[error("slice x_{j}^{k} out of range for length {n}")]
    SliceOutOfRange { j: usize, k: usize, n: usize },

    #[error("position {i} out of range for length {n}")]
    PositionOutOfRange { i: usize, n: usize },

    #[error("counts are served for prefixes of length n or n-1 only (n = {n}, requested {m})")]
    UnsupportedPrefix { m: usize, n: usize },

    #[error("order {k} undefined for a string of length {n}")]
    OrderOutOfRange { k: usize, n: usize },

    #[error("enumeration of {d}^{n} strings exceeds the budget of 2^20")]
    BudgetExceeded { d: usize, n: usize },

    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),

    #[error("invalid split n = {split} for length m = {m}")]
    InvalidSplit { split: usize, m: usize },

    #[error("bound precondition violated: {0}")]
    BoundPrecondition(String),

    #[error("block {block} needs a sequence of length {needed}, have {len}")]
    BlockTooLarge { block: usize, needed: usize, len: usize },

    #[error("need at least {needed} grid points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid transition table: {0}")]
    InvalidTransition(String),

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("state space of {states} contexts exceeds the budget")]
    StateBudget { states: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
