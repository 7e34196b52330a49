use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::graph::{Dag, NodeKind, Nodes};

/// A required edge. Directed entries fix `a -> b`; undirected entries
/// require an edge between `a` and `b` in either orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WhitelistEntry {
    pub a: usize,
    pub b: usize,
    pub directed: bool,
}

/// Forbidden and mandatory edges, as node indices into a schema.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    blacklist: BTreeSet<(usize, usize)>,
    whitelist: BTreeMap<(usize, usize), WhitelistEntry>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forbid(&mut self, from: usize, to: usize) {
        self.blacklist.insert((from, to));
    }

    /// Requires an edge between `a` and `b` in either orientation. A
    /// directed entry already present on the pair takes precedence.
    pub fn require_either(&mut self, a: usize, b: usize) {
        self.whitelist
            .entry((a.min(b), a.max(b)))
            .or_insert(WhitelistEntry { a, b, directed: false });
    }

    /// Requires `from -> to`. Fails if the opposite direction was already
    /// required.
    pub fn require_directed(&mut self, from: usize, to: usize) -> Result<(), SearchError> {
        let key = (from.min(to), from.max(to));
        if let Some(e) = self.whitelist.get(&key) {
            if e.directed && e.a != from {
                return Err(SearchError::Inadmissible(format!(
                    "both directions of pair ({from}, {to}) are whitelisted"
                )));
            }
        }
        self.whitelist.insert(
            key,
            WhitelistEntry {
                a: from,
                b: to,
                directed: true,
            },
        );
        Ok(())
    }

    pub fn is_blacklisted(&self, from: usize, to: usize) -> bool {
        self.blacklist.contains(&(from, to))
    }

    /// Whitelist entry covering the pair, in either orientation.
    pub fn whitelist_entry(&self, a: usize, b: usize) -> Option<&WhitelistEntry> {
        self.whitelist.get(&(a.min(b), a.max(b)))
    }

    pub fn blacklist(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blacklist.iter().copied()
    }

    pub fn whitelist(&self) -> impl Iterator<Item = &WhitelistEntry> + '_ {
        self.whitelist.values()
    }

    pub fn blacklist_len(&self) -> usize {
        self.blacklist.len()
    }

    pub fn whitelist_len(&self) -> usize {
        self.whitelist.len()
    }

    /// Edge allowed by the blacklist and the CLGBN typing rule.
    pub fn edge_allowed(&self, nodes: &Nodes, from: usize, to: usize) -> bool {
        from != to
            && !self.is_blacklisted(from, to)
            && !(nodes.kind(from) == NodeKind::Continuous && nodes.kind(to) == NodeKind::Discrete)
    }

    /// Whether `dag` has no blacklisted or continuous-to-discrete edge and
    /// contains every whitelist entry.
    pub fn satisfied_by(&self, dag: &Dag) -> bool {
        dag.edges().all(|(a, b)| self.edge_allowed(dag.nodes(), a, b))
            && self.whitelist.values().all(|e| {
                if e.directed {
                    dag.has_edge(e.a, e.b)
                } else {
                    dag.adjacent(e.a, e.b)
                }
            })
    }

    /// The starting graph of a search: every directed entry, plus every
    /// undirected entry oriented from the earlier-declared node unless that
    /// orientation is forbidden. Fails when the constraints admit no
    /// starting DAG.
    pub fn initial_dag(&self, nodes: &Nodes) -> Result<Dag, SearchError> {
        let mut dag = Dag::empty(nodes.clone());
        for e in self.whitelist.values() {
            let (lo, hi) = (e.a.min(e.b), e.a.max(e.b));
            let (from, to) = if e.directed {
                (e.a, e.b)
            } else if self.edge_allowed(nodes, lo, hi) {
                (lo, hi)
            } else {
                (hi, lo)
            };
            if !self.edge_allowed(nodes, from, to) {
                return Err(SearchError::Inadmissible(format!(
                    "whitelisted pair ({}, {}) has no allowed orientation",
                    nodes.name(e.a),
                    nodes.name(e.b)
                )));
            }
            dag.add_edge(from, to).map_err(|err| {
                SearchError::Inadmissible(format!("whitelist cannot be embedded in a DAG: {err}"))
            })?;
        }
        Ok(dag)
    }

    /// Blacklist as `(from, to)` names.
    pub fn named_blacklist(&self, nodes: &Nodes) -> Vec<(String, String)> {
        self.blacklist
            .iter()
            .map(|&(a, b)| (nodes.name(a).to_string(), nodes.name(b).to_string()))
            .collect()
    }
}

/// Strategy 1: every continuous -> discrete pair plus any extra denied pairs.
pub fn strategy1_blacklist<S: AsRef<str>>(nodes: &Nodes, denied: &[(S, S)]) -> Result<ConstraintSet, SearchError> {
    let mut cs = ConstraintSet::new();
    for a in 0..nodes.len() {
        for b in 0..nodes.len() {
            if nodes.kind(a) == NodeKind::Continuous && nodes.kind(b) == NodeKind::Discrete {
                cs.forbid(a, b);
            }
        }
    }
    for (a, b) in denied {
        cs.forbid(nodes.index_of(a.as_ref())?, nodes.index_of(b.as_ref())?);
    }
    Ok(cs)
}

/// Strategy 2: the Strategy 1 blacklist plus an undirected whitelist entry
/// for every pair of indicators sharing a domain. Every continuous node
/// must be mapped.
pub fn strategy2_whitelist<S: AsRef<str>>(
    nodes: &Nodes,
    domains: &DomainMap,
    denied: &[(S, S)],
) -> Result<ConstraintSet, SearchError> {
    let mut cs = strategy1_blacklist(nodes, denied)?;
    let assignment = domains.assign(nodes)?;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if let (Some(da), Some(db)) = (&assignment[a], &assignment[b]) {
                if da == db {
                    cs.require_either(a, b);
                }
            }
        }
    }
    Ok(cs)
}

/// Indicator to domain assignment, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainMap {
    entries: Vec<(String, String)>,
}

impl DomainMap {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, S)>) -> Result<Self, SearchError> {
        let entries: Vec<(String, String)> = entries.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let mut seen = BTreeSet::new();
        for (node, _) in &entries {
            if !seen.insert(node.as_str()) {
                return Err(SearchError::Inadmissible(format!("`{node}` mapped to more than one domain")));
            }
        }
        Ok(DomainMap { entries })
    }

    pub fn domain_of(&self, node: &str) -> Option<&str> {
        self.entries.iter().find(|(n, _)| n == node).map(|(_, d)| d.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Distinct domains in order of first appearance.
    pub fn domains(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (_, d) in &self.entries {
            if !out.contains(&d.as_str()) {
                out.push(d);
            }
        }
        out
    }

    /// Domain of each node of `nodes`. Continuous nodes must be mapped;
    /// unmapped discrete nodes get `None`. Entries naming unknown nodes are
    /// rejected.
    pub fn assign(&self, nodes: &Nodes) -> Result<Vec<Option<String>>, SearchError> {
        for (n, _) in &self.entries {
            nodes.index_of(n)?;
        }
        nodes
            .iter()
            .map(|node| match self.domain_of(&node.name) {
                Some(d) => Ok(Some(d.to_string())),
                None if node.kind == NodeKind::Discrete => Ok(None),
                None => Err(SearchError::UnmappedNode(node.name.clone())),
            })
            .collect()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_pair(line: usize, l: &str, sep: &str) -> Result<(String, String), SearchError> {
    let mut parts = l.splitn(2, sep);
    match (parts.next().map(str::trim), parts.next().map(str::trim)) {
        (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() && !b.contains(sep) => Ok((a.to_string(), b.to_string())),
        _ => Err(SearchError::Parse {
            line,
            message: format!("expected `from{sep}to`, found `{l}`"),
        }),
    }
}

/// Blacklist file: one `from,to` pair per line. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_blacklist(text: &str) -> Result<Vec<(String, String)>, SearchError> {
    content_lines(text).map(|(i, l)| split_pair(i, l, ",")).collect()
}

/// A parsed whitelist line: `a,b` (either direction) or `a->b` (directed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitelistLine {
    pub a: String,
    pub b: String,
    pub directed: bool,
}

pub fn parse_whitelist(text: &str) -> Result<Vec<WhitelistLine>, SearchError> {
    content_lines(text)
        .map(|(i, l)| {
            let (sep, directed) = if l.contains("->") { ("->", true) } else { (",", false) };
            let (a, b) = split_pair(i, l, sep)?;
            Ok(WhitelistLine { a, b, directed })
        })
        .collect()
}

/// Domain map file: `indicator,domain` per line; an initial
/// `indicator,domain` header is skipped.
pub fn parse_domain_map(text: &str) -> Result<DomainMap, SearchError> {
    let mut pairs = Vec::new();
    for (i, l) in content_lines(text) {
        let (a, b) = split_pair(i, l, ",")?;
        if pairs.is_empty() && a.eq_ignore_ascii_case("indicator") && b.eq_ignore_ascii_case("domain") {
            continue;
        }
        pairs.push((a, b));
    }
    DomainMap::new(pairs)
}

/// Adds parsed whitelist lines to a constraint set, resolving names.
pub fn apply_whitelist(cs: &mut ConstraintSet, nodes: &Nodes, lines: &[WhitelistLine]) -> Result<(), SearchError> {
    for w in lines {
        let (a, b) = (nodes.index_of(&w.a)?, nodes.index_of(&w.b)?);
        if a == b {
            return Err(SearchError::Inadmissible(format!("self-loop `{}` in whitelist", w.a)));
        }
        if w.directed {
            cs.require_directed(a, b)?;
        } else {
            cs.require_either(a, b);
        }
    }
    Ok(())
}
