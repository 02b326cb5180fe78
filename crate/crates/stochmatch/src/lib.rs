//! Online stochastic bipartite matching with probing constraints and
//! commitment: a data model for stochastic graphs, exact offline
//! benchmarks, LP relaxations with a built-in simplex solver, the online
//! probing algorithms, and an experiment harness for checking competitive
//! ratios at desk scale.

pub mod error;
pub mod json;
pub mod lp;
pub mod model;
pub mod offline;
pub mod online;
pub mod probing;
pub mod sim;
pub mod star;

pub use error::{Error, Result};
pub use model::{
    validate_graph, ConstraintSpec, Edge, EdgeId, Matching, OfflineId, OfflineSet,
    OneSidedMatching, OnlineId, OnlineSet, ProbeString, StochasticGraph, ValidationReport,
    VertexSet, WeightMode,
};
