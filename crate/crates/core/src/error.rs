use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A level index was outside the encoded part of a finite diagram.
    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    /// Structural inconsistency in diagram data (lengths, stationary block shape).
    #[error("malformed diagram: {0}")]
    MalformedDiagram(String),

    /// A finite path or lazy path is not composable or refers to missing edges.
    #[error("invalid path: {0}")]
    InvalidPath(String),

    /// The tail descriptor cannot be evaluated in the current context.
    #[error("tail not decidable: {0}")]
    TailUndecidable(String),

    /// The diagram is not properly ordered, so the Vershik map is undefined.
    #[error("diagram is not properly ordered: {0}")]
    NotProperlyOrdered(String),

    /// An iteration exceeded its configured step budget.
    #[error("step budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },

    /// Invalid arguments to telescoping.
    #[error("invalid cut levels: {0}")]
    InvalidCuts(String),

    /// Dimension-group or trace computation preconditions failed.
    #[error("dimension group: {0}")]
    DimGroup(String),

    /// Embedding data violates a structural requirement.
    #[error("embedding: {0}")]
    Embedding(String),

    /// Malformed pair of paths for a saturated set.
    #[error("malformed set parameters: {0}")]
    MalformedSet(String),

    /// Geometry precondition failed (path not of the required shape).
    #[error("geometry: {0}")]
    Geometry(String),

    /// IFS data problem (dimension mismatch, non-contraction, hull not invariant, singular map).
    #[error("ifs: {0}")]
    Ifs(String),

    /// DPS assignment problem.
    #[error("assignment: {0}")]
    Assignment(String),

    /// Finite groupoid function problem.
    #[error("finite model: {0}")]
    FiniteModel(String),

    /// K-theory report precondition failed.
    #[error("k-theory: {0}")]
    KTheory(String),

    /// Parse or serialization failure for one of the text formats.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
