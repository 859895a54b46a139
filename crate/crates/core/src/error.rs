use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the toolkit.
///
/// The variants are grouped by how a caller is expected to react: bad input
/// (`Malformed`, `Precondition`, `OutOfRange`, ...), a configured resource
/// cap being hit (`ResourceLimit`), and broken persisted data or internal
/// consistency checks (`FormatVersion`, `Checksum`, `Invariant`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed canonical form at byte {position}: {reason}")]
    Malformed { position: usize, reason: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("only {available} distinct [{t},{q}] trees exist, {requested} requested")]
    InsufficientPopulation {
        t: usize,
        q: usize,
        requested: usize,
        available: String,
    },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tree already has maximal path length (single leaf)")]
    AtMaximum,

    #[error("symbol {symbol} at position {position} is outside the alphabet of size {t}")]
    SymbolOutOfRange {
        symbol: u32,
        position: usize,
        t: usize,
    },

    #[error("mixed arities in corpus: expected {expected}, found {found} at index {index}")]
    MixedArity {
        expected: usize,
        found: usize,
        index: usize,
    },

    #[error("sequence lengths differ: expected {expected}, found {found} at index {index}")]
    LengthMismatch {
        expected: usize,
        found: usize,
        index: usize,
    },

    #[error("unsupported table format {found:?} (expected {expected:?})")]
    FormatVersion { found: String, expected: String },

    #[error("table checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },

    #[error("corrupted table payload: {0}")]
    CorruptTable(String),

    #[error("arity mismatch: table has t={table}, requested t={requested}")]
    ArityMismatch { table: usize, requested: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("table document: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_arity(t: usize) -> Result<()> {
    if t < 2 {
        return Err(Error::Precondition(format!("arity must be at least 2, got {t}")));
    }
    Ok(())
}
