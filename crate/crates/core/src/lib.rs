//! Link prediction on bipartite drug–target interaction networks using
//! topology-only similarity indices, with a cross-validated
//! precision–recall evaluation harness.

pub mod cli;
pub mod error;
pub mod graph;
pub mod indices;
pub mod io;
pub mod evaluation;
pub mod ranking;

pub use error::{Error, ErrorCategory, Result};
pub use graph::{build_graph, BipartiteGraph, DedupRule, Edge, Interaction, Node};
pub use indices::{score_all, CnVariant, IndexConfig, IndexKind, KatzMethod, ScoreTable};
pub use ranking::{count_positive_predictions, rank, RankedPredictions, TiePolicy};
