use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid node token {0:?}")]
    InvalidNode(String),
    #[error("hyperedge needs at least 2 distinct nodes, got {0}")]
    HyperedgeTooSmall(usize),
    #[error("invalid weight {0}: weights must be finite and positive")]
    InvalidWeight(f64),
    #[error("hypergraph has no edges")]
    EmptyHypergraph,
    #[error("hypergraph is not normalized")]
    NotNormalized,
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("mapping is not a bijection: {0}")]
    NotABijection(String),
    #[error("mapping does not cover node {0}")]
    IncompleteMapping(String),

    #[error("invalid size {n} for {structure} (minimum {min})")]
    InvalidSize { structure: &'static str, n: usize, min: usize },
    #[error("cannot build a connected graph on {n} nodes with {m} edges")]
    CannotBeConnected { n: usize, m: usize },
    #[error("invalid weight bounds [{0}, {1}]")]
    InvalidWeights(f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("masked form {0} was never observed")]
    Unseen(String),
    #[error("ratio undefined: zero denominator for {0}")]
    UndefinedRatio(String),
    #[error("masked form {0} is not shared by both edges")]
    NotShared(String),

    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no candidate hyperedge survived phase 1")]
    NothingRecovered,

    #[error("node count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("{0} nodes exceeds exhaustive search cap of {1}")]
    TooLarge(usize, usize),
    #[error("ambiguous node labels: {0:?}")]
    AmbiguousLabels(Vec<Vec<String>>),
    #[error("derived mapping is not an isomorphism: {0}")]
    NotAnIsomorphism(String),
    #[error("NoIsomorphism")]
    NoIsomorphism,
    #[error("inconsistent anchors: {0}")]
    InconsistentAnchors(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("log-log fit needs positive values: {0}")]
    InvalidForLogFit(String),

    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("entity list is empty")]
    EmptyEntities,
    #[error("score undefined: truth graph has no edges")]
    UndefinedScore,
    #[error("authentication failed (HTTP {status}): {body}")]
    AuthError { status: u16, body: String },
    #[error("HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("no response for prompt {0} in replay directory")]
    MissingResponse(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ParseError { line: e.line(), msg: e.to_string() }
    }
}
