use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GraphError, Node, NodeKind, Nodes, Pdag};

/// A directed acyclic graph over a fixed, typed node set.
///
/// Nodes are addressed by their position in [`Nodes`]. Index-based methods
/// panic on out-of-range indices; use [`Dag::node`] to resolve names.
/// Every mutation is checked and a rejected mutation leaves the graph as it
/// was.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Nodes,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

/// The three shapes a pair of edges through a middle node can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConnectionKind {
    /// `a -> z -> b` or `b -> z -> a`.
    Serial,
    /// `a <- z -> b`.
    Diverging,
    /// `a -> z <- b`; a v-structure when `a` and `b` are not adjacent.
    Converging { vstructure: bool },
}

impl ConnectionKind {
    pub fn is_vstructure(&self) -> bool {
        matches!(self, ConnectionKind::Converging { vstructure: true })
    }
}

/// One `P(node | parents)` term of a factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorTerm {
    pub node: String,
    pub parents: Vec<String>,
}

impl fmt::Display for FactorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parents.is_empty() {
            write!(f, "P({})", self.node)
        } else {
            write!(f, "P({}|{})", self.node, self.parents.join(","))
        }
    }
}

/// Product of local terms, one per node, in topological order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization(pub Vec<FactorTerm>);

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Checks a candidate edge list for directed cycles (self-loops count).
pub fn is_acyclic<S: AsRef<str>>(nodes: &Nodes, edges: &[(S, S)]) -> Result<bool, GraphError> {
    let idx = edges
        .iter()
        .map(|(a, b)| Ok((nodes.index_of(a.as_ref())?, nodes.index_of(b.as_ref())?)))
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(is_acyclic_indices(nodes.len(), &idx))
}

/// Kahn's algorithm over an index edge list.
pub fn is_acyclic_indices(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a == b {
            return false;
        }
        out[a].push(b);
        indeg[b] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    seen == n
}

impl Dag {
    /// The empty graph on `nodes`.
    pub fn empty(nodes: Nodes) -> Self {
        let n = nodes.len();
        Dag {
            nodes,
            parents: vec![BTreeSet::new(); n],
            children: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges<S: AsRef<str>>(nodes: Nodes, edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut dag = Dag::empty(nodes);
        for (a, b) in edges {
            let (a, b) = (dag.node(a.as_ref())?, dag.node(b.as_ref())?);
            dag.add_edge(a, b)?;
        }
        Ok(dag)
    }

    pub fn from_index_edges(nodes: Nodes, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut dag = Dag::empty(nodes);
        for &(a, b) in edges {
            dag.add_edge(a, b)?;
        }
        Ok(dag)
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, name: &str) -> Result<usize, GraphError> {
        self.nodes.index_of(name)
    }

    pub fn name(&self, v: usize) -> &str {
        self.nodes.name(v)
    }

    pub fn kind(&self, v: usize) -> NodeKind {
        self.nodes.kind(v)
    }

    pub fn parents(&self, v: usize) -> &BTreeSet<usize> {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &BTreeSet<usize> {
        &self.children[v]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.children[from].contains(&to)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn n_edges(&self) -> usize {
        self.children.iter().map(BTreeSet::len).sum()
    }

    /// All edges in (parent, child) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| cs.iter().map(move |&b| (a, b)))
    }

    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges()
            .map(|(a, b)| (self.name(a).to_string(), self.name(b).to_string()))
            .collect()
    }

    /// True if a directed path `from -> ... -> to` exists (length ≥ 0).
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Whether adding `from -> to` keeps the graph a DAG without an existing
    /// edge between the two.
    pub fn can_add_edge(&self, from: usize, to: usize) -> bool {
        from != to && !self.adjacent(from, to) && !self.has_path(to, from)
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        if from == to {
            return Err(GraphError::SelfLoop(self.name(from).to_string()));
        }
        if self.adjacent(from, to) {
            return Err(GraphError::AlreadyAdjacent(
                self.name(from).to_string(),
                self.name(to).to_string(),
            ));
        }
        if self.has_path(to, from) {
            return Err(GraphError::WouldCreateCycle {
                from: self.name(from).to_string(),
                to: self.name(to).to_string(),
            });
        }
        self.children[from].insert(to);
        self.parents[to].insert(from);
        Ok(())
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        if !self.has_edge(from, to) {
            return Err(GraphError::MissingEdge(
                self.name(from).to_string(),
                self.name(to).to_string(),
            ));
        }
        self.children[from].remove(&to);
        self.parents[to].remove(&from);
        Ok(())
    }

    /// Whether `from -> to` exists and flipping it keeps the graph acyclic.
    pub fn can_reverse_edge(&self, from: usize, to: usize) -> bool {
        if !self.has_edge(from, to) {
            return false;
        }
        // Any other directed path from -> ... -> to would close a cycle.
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = self.children[from]
            .iter()
            .copied()
            .filter(|&c| c != to)
            .collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            if v == to {
                return false;
            }
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        true
    }

    pub fn reverse_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        if !self.has_edge(from, to) {
            return Err(GraphError::MissingEdge(
                self.name(from).to_string(),
                self.name(to).to_string(),
            ));
        }
        if !self.can_reverse_edge(from, to) {
            return Err(GraphError::WouldCreateCycle {
                from: self.name(to).to_string(),
                to: self.name(from).to_string(),
            });
        }
        self.children[from].remove(&to);
        self.parents[to].remove(&from);
        self.children[to].insert(from);
        self.parents[from].insert(to);
        Ok(())
    }

    /// Topological order; among ready nodes the earliest declared goes first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = (0..self.len())
            .filter(|&v| indeg[v] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        order
    }

    /// Parents, children and the children's other parents.
    pub fn markov_blanket(&self, v: usize) -> BTreeSet<usize> {
        let mut mb: BTreeSet<usize> = self.parents[v].union(&self.children[v]).copied().collect();
        for &c in &self.children[v] {
            mb.extend(self.parents[c].iter().copied());
        }
        mb.remove(&v);
        mb
    }

    /// All nodes reachable from `v` through directed edges, `v` excluded.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if out.insert(c) {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Classifies the connection `a - z - b`.
    pub fn classify_connection(&self, a: usize, z: usize, b: usize) -> Result<ConnectionKind, GraphError> {
        if a == b {
            return Err(GraphError::NotDistinct(
                self.name(a).to_string(),
                self.name(b).to_string(),
            ));
        }
        for (u, w) in [(a, z), (z, b)] {
            if !self.adjacent(u, w) {
                return Err(GraphError::MissingEdge(
                    self.name(u).to_string(),
                    self.name(w).to_string(),
                ));
            }
        }
        let a_in = self.has_edge(a, z);
        let b_in = self.has_edge(b, z);
        Ok(match (a_in, b_in) {
            (true, true) => ConnectionKind::Converging {
                vstructure: !self.adjacent(a, b),
            },
            (false, false) => ConnectionKind::Diverging,
            _ => ConnectionKind::Serial,
        })
    }

    /// Every v-structure `(a, z, b)` with `a < b`.
    pub fn vstructures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for z in 0..self.len() {
            let ps: Vec<usize> = self.parents[z].iter().copied().collect();
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, z, b));
                    }
                }
            }
        }
        out
    }

    /// Unordered adjacent pairs `(a, b)` with `a < b`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges().map(|(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Product of local terms in topological order; parents listed in
    /// declaration order.
    pub fn factorization(&self) -> Factorization {
        Factorization(
            self.topological_order()
                .into_iter()
                .map(|v| FactorTerm {
                    node: self.name(v).to_string(),
                    parents: self.parents[v].iter().map(|&p| self.name(p).to_string()).collect(),
                })
                .collect(),
        )
    }

    pub fn to_pdag(&self) -> Pdag {
        let mut p = Pdag::empty(self.nodes.clone());
        for (a, b) in self.edges() {
            p.add_directed(a, b).expect("DAG edges are valid PDAG edges");
        }
        p
    }

    pub fn nodes_vec(&self) -> Vec<Node> {
        self.nodes.iter().cloned().collect()
    }
}
