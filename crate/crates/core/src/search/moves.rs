use std::fmt;

use serde::{Deserialize, Serialize};

use super::ConstraintSet;
use crate::graph::Dag;

/// A single-edge edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Move {
    Add { from: usize, to: usize },
    Delete { from: usize, to: usize },
    /// Turns `from -> to` into `to -> from`.
    Reverse { from: usize, to: usize },
}

impl Move {
    /// Ordering used for deterministic tie-breaking: endpoints first, then
    /// add < delete < reverse.
    pub fn sort_key(&self) -> (usize, usize, u8) {
        match *self {
            Move::Add { from, to } => (from, to, 0),
            Move::Delete { from, to } => (from, to, 1),
            Move::Reverse { from, to } => (from, to, 2),
        }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            Move::Add { from, to } | Move::Delete { from, to } | Move::Reverse { from, to } => (from, to),
        }
    }

    pub fn apply(&self, dag: &mut Dag) -> Result<(), crate::graph::GraphError> {
        match *self {
            Move::Add { from, to } => dag.add_edge(from, to),
            Move::Delete { from, to } => dag.remove_edge(from, to),
            Move::Reverse { from, to } => dag.reverse_edge(from, to),
        }
    }

    pub fn describe(&self, dag: &Dag) -> String {
        let (a, b) = self.endpoints();
        let (a, b) = (dag.name(a), dag.name(b));
        match self {
            Move::Add { .. } => format!("add {a} -> {b}"),
            Move::Delete { .. } => format!("delete {a} -> {b}"),
            Move::Reverse { .. } => format!("reverse {a} -> {b}"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Add { from, to } => write!(f, "+{from}->{to}"),
            Move::Delete { from, to } => write!(f, "-{from}->{to}"),
            Move::Reverse { from, to } => write!(f, "~{from}->{to}"),
        }
    }
}

/// Every single-edge edit of `dag` that yields an acyclic graph respecting
/// the blacklist, the whitelist, the CLGBN typing rule and the optional
/// parent cap. Whitelisted edges are never deleted; directed whitelist
/// edges are never reversed. Sorted by [`Move::sort_key`].
pub fn legal_moves(dag: &Dag, constraints: &ConstraintSet, max_parents: Option<usize>) -> Vec<Move> {
    let nodes = dag.nodes();
    let cap = max_parents.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for from in 0..dag.len() {
        for to in 0..dag.len() {
            if from == to {
                continue;
            }
            if dag.has_edge(from, to) {
                let entry = constraints.whitelist_entry(from, to);
                if entry.is_none() {
                    out.push(Move::Delete { from, to });
                }
                if !entry.is_some_and(|e| e.directed)
                    && constraints.edge_allowed(nodes, to, from)
                    && dag.parents(from).len() < cap
                    && dag.can_reverse_edge(from, to)
                {
                    out.push(Move::Reverse { from, to });
                }
            } else if !dag.has_edge(to, from)
                && constraints.edge_allowed(nodes, from, to)
                && dag.parents(to).len() < cap
                && !dag.has_path(to, from)
            {
                out.push(Move::Add { from, to });
            }
        }
    }
    out.sort_by_key(Move::sort_key);
    out
}
