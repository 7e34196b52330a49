//! Directed acyclic graphs over typed variables, partially directed graphs,
//! and the structural queries used throughout the crate.

mod cpdag;
mod dag;
mod degree;
mod dot;
mod dsep;
mod pdag;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dag::{is_acyclic, is_acyclic_indices, ConnectionKind, Dag, FactorTerm, Factorization};
pub use degree::{DegreeRow, DegreeTable};
pub use dot::DotStyle;
pub use pdag::Pdag;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("edge {from} -> {to} would create a directed cycle")]
    WouldCreateCycle { from: String, to: String },
    #[error("nodes `{0}` and `{1}` are already adjacent")]
    AlreadyAdjacent(String, String),
    #[error("no edge between `{0}` and `{1}`")]
    MissingEdge(String, String),
    #[error("node sets passed to a separation query must be pairwise disjoint (`{0}` repeated)")]
    OverlappingSets(String),
    #[error("`{0}` and `{1}` must be distinct")]
    NotDistinct(String, String),
    #[error("graphs are defined over different node sets")]
    NodeSetMismatch,
}

/// Whether a variable is categorical or real-valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Discrete,
    Continuous,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Discrete => f.write_str("discrete"),
            NodeKind::Continuous => f.write_str("continuous"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            name: name.into(),
            kind,
        }
    }

    pub fn discrete(name: impl Into<String>) -> Self {
        Node::new(name, NodeKind::Discrete)
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Node::new(name, NodeKind::Continuous)
    }
}

/// An ordered list of uniquely named nodes. Declaration order is the
/// canonical order used for tie-breaking and for all emitted artifacts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Node>", into = "Vec<Node>")]
pub struct Nodes {
    list: Vec<Node>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Nodes {
    pub fn new(nodes: impl IntoIterator<Item = Node>) -> Result<Self, GraphError> {
        let list: Vec<Node> = nodes.into_iter().collect();
        let mut index = HashMap::with_capacity(list.len());
        for (i, n) in list.iter().enumerate() {
            if index.insert(n.name.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.name.clone()));
            }
        }
        Ok(Nodes { list, index })
    }

    /// All-continuous node set, convenient for tests and examples.
    pub fn continuous<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        Nodes::new(names.iter().map(|n| Node::continuous(n.as_ref())))
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> &Node {
        &self.list[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.list[i].name
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.list[i].kind
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Node> {
        self.list.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.list.iter().map(|n| n.name.as_str())
    }

    /// Resolve a list of names into indices.
    pub fn indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, GraphError> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }
}

impl TryFrom<Vec<Node>> for Nodes {
    type Error = GraphError;

    fn try_from(v: Vec<Node>) -> Result<Self, Self::Error> {
        Nodes::new(v)
    }
}

impl From<Nodes> for Vec<Node> {
    fn from(n: Nodes) -> Self {
        n.list
    }
}

impl<'a> IntoIterator for &'a Nodes {
    type Item = &'a Node;
    type IntoIter = std::slice::Iter<'a, Node>;

    fn into_iter(self) -> Self::IntoIter {
        self.list.iter()
    }
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}
