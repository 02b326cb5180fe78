use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto exit codes:
/// validation/schema problems are exit 1, cap overruns exit 2, internal
/// assertion failures exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unknown vertex id {0}")]
    UnknownVertex(String),

    #[error("edge #{0} is not in the graph")]
    EdgeNotInGraph(usize),

    #[error("edge #{edge} is not incident to online vertex {vertex}")]
    EdgeNotIncident { edge: usize, vertex: String },

    #[error("probe string repeats edge #{0}")]
    RepeatedEdge(usize),

    #[error("enumeration truncated at cap {cap}")]
    Truncated { cap: usize },

    #[error("state space exceeded cap {cap}")]
    CapExceeded { cap: usize },

    #[error("operation requires unit patience, but {vertex} has a different constraint")]
    NonUnitPatience { vertex: String },

    #[error("operation requires patience constraints, but {vertex} has a different constraint")]
    NonPatienceConstraint { vertex: String },

    #[error("operation requires a vertex-weighted graph")]
    NotVertexWeighted,

    #[error("distribution sums to {sum}, expected 1 within {tolerance}")]
    InvalidDistribution { sum: f64, tolerance: f64 },

    #[error("linear program is {0}")]
    LpNotOptimal(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
