use std::collections::BTreeSet;

use super::{GraphError, Nodes};

/// A partially directed graph: a set of directed edges plus a set of
/// undirected edges, never both on the same pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdag {
    nodes: Nodes,
    directed: BTreeSet<(usize, usize)>,
    /// Stored as `(min, max)`.
    undirected: BTreeSet<(usize, usize)>,
}

impl Pdag {
    pub fn empty(nodes: Nodes) -> Self {
        Pdag {
            nodes,
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        }
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

    pub fn name(&self, v: usize) -> &str {
        self.nodes.name(v)
    }

    fn check_new_pair(&self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(self.name(a).to_string()));
        }
        if self.adjacent(a, b) {
            return Err(GraphError::AlreadyAdjacent(
                self.name(a).to_string(),
                self.name(b).to_string(),
            ));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check_new_pair(from, to)?;
        self.directed.insert((from, to));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check_new_pair(a, b)?;
        self.undirected.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.directed.contains(&(from, to))
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn parents(&self, v: usize) -> BTreeSet<usize> {
        self.directed.iter().filter(|e| e.1 == v).map(|e| e.0).collect()
    }

    pub fn children(&self, v: usize) -> BTreeSet<usize> {
        self.directed.iter().filter(|e| e.0 == v).map(|e| e.1).collect()
    }

    /// Nodes joined to `v` by an undirected edge.
    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.undirected
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Every node adjacent to `v` through any edge.
    pub fn adjacencies(&self, v: usize) -> BTreeSet<usize> {
        let mut s = self.parents(v);
        s.extend(self.children(v));
        s.extend(self.neighbors(v));
        s
    }

    /// Parents, children, undirected neighbours and the other parents of
    /// directed children.
    pub fn markov_blanket(&self, v: usize) -> BTreeSet<usize> {
        let mut mb = self.adjacencies(v);
        for c in self.children(v) {
            mb.extend(self.parents(c));
        }
        mb.remove(&v);
        mb
    }

    /// Partition of the nodes by undirected reachability, ignoring edge
    /// direction. Components are listed by their first node; members sorted.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in self.directed.iter().chain(self.undirected.iter()) {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![];
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Nodes with no incident edge.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        self.connected_components()
            .into_iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect()
    }

    /// Nodes reachable from `v` along directed edges only, `v` excluded.
    pub fn directed_descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for c in self.children(u) {
                if c != v && out.insert(c) {
                    stack.push(c);
                }
            }
        }
        out
    }

    pub fn same_nodes(&self, other: &Pdag) -> bool {
        self.nodes == other.nodes
    }
}
