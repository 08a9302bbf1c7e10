use thiserror::Error;

/// Crate-wide error type. Variants map to the failure modes of the public
/// operations; the CLI maps them onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol `{symbol}` has arity {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("symbol `{symbol}` already declared with arity {existing}, redeclared as {new}")]
    Redeclared {
        symbol: String,
        existing: usize,
        new: usize,
    },

    #[error("e-class id {0} does not exist")]
    InvalidId(u32),

    #[error("e-graph has pending merges; call rebuild() first")]
    PendingRebuild,

    #[error("e-graph contains a cyclic e-class and cannot be serialized")]
    CyclicEGraph,

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("a bare variable pattern has no conjunctive query form")]
    BareVariablePattern,

    #[error("invalid column permutation {perm:?} for width {width}")]
    InvalidPermutation { perm: Vec<Vec<usize>>, width: usize },

    #[error("no relation for symbol `{0}` in database")]
    UnknownRelation(String),

    #[error("invalid variable ordering: {0}")]
    InvalidOrdering(String),

    #[error("assignment space {space} exceeds naive evaluation cap {cap}")]
    NaiveCapExceeded { space: u128, cap: u128 },

    #[error("engines disagree on pattern `{pattern}`:\n{diff}")]
    EngineDisagreement { pattern: String, diff: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
