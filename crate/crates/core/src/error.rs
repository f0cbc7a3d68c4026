use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("nonpositive weight {weight} on vertex {vertex}")]
    NonPositiveWeight { vertex: usize, weight: f64 },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge {edge:?} has an endpoint outside 0..{n}")]
    EndpointOutOfRange { edge: (usize, usize), n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("multigraph needs at least one party")]
    NoParties,
    #[error("duplicate party {0:?}")]
    DuplicateParty(String),
    #[error("unknown party {0:?}")]
    UnknownParty(String),
    #[error("party {0:?} has more than one factor")]
    DuplicateFactor(String),
    #[error("{parties} parties but {factors} factors")]
    FactorCount { parties: usize, factors: usize },
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("vertex ids must be exactly 0..n, each once")]
    VertexIds,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error(
        "term {term}: weight {weight} is not positive; the expression must be in positive form \
         (rewrite negative coefficients with normalization first)"
    )]
    NotPositiveForm { term: usize, weight: f64 },
    #[error("terms {first} and {second} describe the same event")]
    DuplicateEvent { first: usize, second: usize },
    #[error("term {term} references unknown party {party:?}")]
    UnknownParty { term: usize, party: String },
    #[error("term {term} has {found} parts, expected {expected}")]
    PartCount { term: usize, expected: usize, found: usize },
    #[error("term {term}: malformed event label {label:?}")]
    MalformedEvent { term: usize, label: String },
    #[error("term {0} has no party measuring")]
    EmptyEvent(usize),
    #[error("expression has no terms")]
    NoTerms,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("level 1.x needs one subset per party of exactly {x} distinct vertices")]
    BadSubset { x: usize },
    #[error("sequence set exceeds the word-count ceiling of {limit}")]
    TooManyWords { limit: usize },
    #[error("level must be at least 1")]
    BadLevel,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("matrix size {size} exceeds the configured ceiling {ceiling}")]
    TooLarge { size: usize, ceiling: usize },
    #[error("entry ({row}, {col}) lies outside a {size}x{size} matrix")]
    EntryOutOfRange { row: usize, col: usize, size: usize },
    #[error("row references variable {index} but the problem has {count}")]
    VariableOutOfRange { index: usize, count: usize },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("malformed problem dump: {0}")]
    Dump(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("solver did not reach an optimum: {0}")]
    Solver(String),
    #[error("constraint family for {0} parties is unsupported; assembly is bipartite")]
    UnsupportedParties(usize),
    #[error("exhaustive search is limited to {limit} vertices, got {n}")]
    ExhaustiveLimit { n: usize, limit: usize },
    #[error("invalid options: {0}")]
    Options(String),
    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
