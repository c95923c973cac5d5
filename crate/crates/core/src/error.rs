use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("duplicate coefficient entry for pair ({0}, {1})")]
    DuplicateEntry(usize, usize),

    #[error("non-symmetric entries for pair ({i}, {j}): {a} vs {b}")]
    NonSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("index sets overlap on node {0}")]
    Overlap(usize),

    #[error("block has {0} nodes, at most 63 are supported")]
    BlockTooLarge(usize),

    #[error("monomial {0} has no assigned value")]
    Unassigned(String),

    #[error("denominator {value} is negative: a support inequality is violated")]
    SupportViolated { value: f64 },

    #[error("node {0} carries no plus loop")]
    NotPlusLoop(usize),

    #[error("window {window:?} is not contained in N({node})")]
    WindowOutsideNeighborhood { node: usize, window: Vec<usize> },

    #[error("window {window:?} does not contain node {node}")]
    WindowMissesNode { node: usize, window: Vec<usize> },

    #[error("hierarchy level must be at least 1, got {0}")]
    InvalidLevel(usize),

    #[error("invalid tree decomposition: {0}")]
    TreeDecomposition(String),

    #[error("condition (C1) violated: bag {bag} holds plus-loop nodes {nodes:?}")]
    C1Violated { bag: usize, nodes: Vec<usize> },

    #[error("plus-loop node {0} lies in more than one bag; contract the decomposition first")]
    NotContracted(usize),

    #[error("plus-loop nodes {0} and {1} are adjacent; no exact hull is available for this instance")]
    PlusSetNotStable(usize, usize),

    #[error("strategy precondition violated: {0}")]
    Strategy(String),

    #[error("objective references {0}, which appears in no constraint block")]
    MissingMonomial(String),

    #[error("loop sign mismatch at node {0}")]
    LoopSign(usize),

    #[error("model schema violation: {0}")]
    Schema(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("unknown adapter `{0}`")]
    UnknownAdapter(String),

    #[error("adapter failure: {0}")]
    Adapter(String),
}
