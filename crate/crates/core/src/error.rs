use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("relation {relation}: expected arity {expected}, found tuple of length {found}")]
    ArityMismatch {
        relation: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("repeated vertex {0} inside a hyperedge")]
    RepeatedVertexInTuple(usize),
    #[error("relation index {index} out of range (r = {r})")]
    BadRelationIndex { index: usize, r: usize },
    #[error("invalid labels: {0}")]
    BadLabels(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("quantum graph must have at least one term")]
    EmptyQuantumGraph,
    #[error("non-finite coefficient or target")]
    NonFinite,
    #[error("exact isomorphism limited to 10 vertices, got {0}")]
    TooLargeForExactIso(usize),

    #[error("partition vector is not in the simplex: {0}")]
    SimplexViolation(String),
    #[error("array for relation {relation} is not symmetric (max deviation {deviation:e})")]
    SymmetryViolation { relation: usize, deviation: f64 },
    #[error("value {value} of relation {relation} violates the {mode} range")]
    RangeViolation {
        relation: usize,
        value: f64,
        mode: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("block index {index} out of range (m = {m})")]
    BadBlockIndex { index: usize, m: usize },
    #[error("exact enumeration bound exceeded: m = {m}, bound = {bound}")]
    ExactBoundExceeded { m: usize, bound: usize },
    #[error("partitions are not permutable: {0}")]
    PartitionsNotPermutable(String),
    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("density sum needs {0:e} terms, above the exact-evaluation guard")]
    TooManyTerms(f64),
    #[error("expected {expected} label indices, got {found}")]
    IndexArityMismatch { expected: usize, found: usize },

    #[error("value {value} outside the domain of {name}")]
    DomainViolation { name: String, value: f64 },
    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no restart reached the constraint tolerance (best residual {best_residual:e})")]
    Infeasible { best_residual: f64 },
    #[error("solver did not converge: {0}")]
    NonConvergent(String),
    #[error("no feasible step function found up to m = {0}")]
    InfeasibleUpToMax(usize),

    #[error("syntax error at {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` has arity {expected}, used with {found} arguments")]
    ArityError {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is not quantified")]
    UnquantifiedVariable(String),
    #[error("variable `{0}` repeated inside an atom")]
    RepeatedVariableInAtom(String),
    #[error("no solutions to average over")]
    EmptySolutionSet,

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
