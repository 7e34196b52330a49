//! Constrained score-based structure search.

mod constraints;
mod hill_climb;
mod moves;

use thiserror::Error;

use crate::data::DataError;
use crate::graph::GraphError;
use crate::model::ModelError;

pub use constraints::{
    apply_whitelist, parse_blacklist, parse_domain_map, parse_whitelist, strategy1_blacklist, strategy2_whitelist, ConstraintSet,
    DomainMap, WhitelistEntry, WhitelistLine,
};
pub use hill_climb::{hill_climb, network_score, SearchConfig, SearchTrace, TraceStep, MIN_IMPROVEMENT};
pub use moves::{legal_moves, Move};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("inadmissible constraints: {0}")]
    Inadmissible(String),
    #[error("continuous node `{0}` is not mapped to a domain")]
    UnmappedNode(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("every reachable graph has an undefined score; the data are too sparse for the discrete configurations")]
    DegenerateScore,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}
