//! Descriptive queries over an estimated (possibly partially directed)
//! network and their Markdown/JSON reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::graph::{ConnectionKind, DegreeTable, DotStyle, GraphError, Pdag};
use crate::search::{DomainMap, SearchError};

/// Nodes reached from a source along directed edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Influence {
    pub source: String,
    /// Children of the source.
    pub direct: BTreeSet<String>,
    /// Reachable by a directed path of length two or more, and not direct.
    pub indirect: BTreeSet<String>,
    /// Joined to the source by an undirected edge; direction unknown.
    pub ambiguous: BTreeSet<String>,
}

pub fn influence_set(g: &Pdag, source: &str) -> Result<Influence, GraphError> {
    let s = g.nodes().index_of(source)?;
    let name = |v: usize| g.name(v).to_string();
    let children = g.children(s);
    let reach = g.directed_descendants(s);
    Ok(Influence {
        source: source.to_string(),
        direct: children.iter().map(|&v| name(v)).collect(),
        indirect: reach.iter().filter(|v| !children.contains(v) && **v != s).map(|&v| name(v)).collect(),
        ambiguous: g.neighbors(s).iter().map(|&v| name(v)).collect(),
    })
}

/// Partners of one domain: other domains joined to it by at least one edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainConnections {
    pub domain: String,
    /// Number of distinct partner domains.
    pub count: usize,
    /// Partner domain and number of edges joining the two, in map order.
    pub partners: Vec<(String, usize)>,
}

impl DomainConnections {
    /// Partners as `Health, Landscape (3)`: multiplicities above one in
    /// parentheses.
    pub fn render_partners(&self) -> String {
        self.partners
            .iter()
            .map(|(d, m)| if *m > 1 { format!("{d} ({m})") } else { d.clone() })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Cross-domain edge counts, one entry per domain of the map. Every
/// continuous node must be mapped; unmapped discrete nodes are ignored.
pub fn domain_connections(g: &Pdag, domains: &DomainMap) -> Result<Vec<DomainConnections>, SearchError> {
    let assign = domains.assign(g.nodes())?;
    let order = domains.domains();
    let mut mult: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (a, b) in g.directed_edges().chain(g.undirected_edges()) {
        if let (Some(da), Some(db)) = (&assign[a], &assign[b]) {
            if da != db {
                *mult.entry((da, db)).or_default() += 1;
                *mult.entry((db, da)).or_default() += 1;
            }
        }
    }
    Ok(order
        .iter()
        .map(|&d| {
            let partners: Vec<(String, usize)> = order
                .iter()
                .filter_map(|&o| mult.get(&(d, o)).map(|&m| (o.to_string(), m)))
                .collect();
            DomainConnections {
                domain: d.to_string(),
                count: partners.len(),
                partners,
            }
        })
        .collect())
}

/// A pair of directed edges through a middle node `z`; `a` precedes `b`
/// in node order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionTriple {
    pub a: String,
    pub z: String,
    pub b: String,
    pub connection: ConnectionKind,
}

/// Every pair of directed edges sharing a node, classified. Undirected
/// edges are ignored. Ordered by middle node, then by endpoints.
pub fn connection_inventory(g: &Pdag) -> Vec<ConnectionTriple> {
    let mut out = Vec::new();
    for z in 0..g.len() {
        let parents = g.parents(z);
        let children = g.children(z);
        let around: Vec<usize> = parents.union(&children).copied().collect();
        for (i, &a) in around.iter().enumerate() {
            for &b in &around[i + 1..] {
                let connection = match (parents.contains(&a), parents.contains(&b)) {
                    (true, true) => ConnectionKind::Converging {
                        vstructure: !g.adjacent(a, b),
                    },
                    (false, false) => ConnectionKind::Diverging,
                    _ => ConnectionKind::Serial,
                };
                out.push(ConnectionTriple {
                    a: g.name(a).to_string(),
                    z: g.name(z).to_string(),
                    b: g.name(b).to_string(),
                    connection,
                });
            }
        }
    }
    out
}

pub fn degree_summary(g: &Pdag) -> DegreeTable {
    g.degrees()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryCounts {
    pub serial: usize,
    pub diverging: usize,
    pub converging: usize,
    pub vstructures: usize,
}

/// Summary of a network for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub n_nodes: usize,
    pub n_directed: usize,
    pub n_undirected: usize,
    pub components: Vec<Vec<String>>,
    pub isolated: Vec<String>,
    pub degrees: DegreeTable,
    pub connections: InventoryCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub influence: Vec<Influence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<Vec<DomainConnections>>,
}

/// Builds the report, with influence sets for `sources` and domain
/// connections when a map is given.
pub fn analyze(g: &Pdag, sources: &[String], domains: Option<&DomainMap>) -> Result<AnalyticsReport, SearchError> {
    let names = |vs: &[usize]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
    let mut counts = InventoryCounts::default();
    for t in connection_inventory(g) {
        match t.connection {
            ConnectionKind::Serial => counts.serial += 1,
            ConnectionKind::Diverging => counts.diverging += 1,
            ConnectionKind::Converging { vstructure } => {
                counts.converging += 1;
                counts.vstructures += usize::from(vstructure);
            }
        }
    }
    Ok(AnalyticsReport {
        n_nodes: g.len(),
        n_directed: g.directed_edges().count(),
        n_undirected: g.undirected_edges().count(),
        components: g.connected_components().iter().map(|c| names(c)).collect(),
        isolated: names(&g.isolated_nodes()),
        degrees: degree_summary(g),
        connections: counts,
        influence: sources
            .iter()
            .map(|s| influence_set(g, s))
            .collect::<Result<_, _>>()?,
        domains: domains.map(|d| domain_connections(g, d)).transpose()?,
    })
}

fn join(items: impl IntoIterator<Item = impl AsRef<str>>) -> String {
    let v: Vec<String> = items.into_iter().map(|s| s.as_ref().to_string()).collect();
    if v.is_empty() { "(none)".to_string() } else { v.join(", ") }
}

impl AnalyticsReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Network summary\n");
        let _ = writeln!(
            out,
            "{} nodes, {} directed and {} undirected edges.\n",
            self.n_nodes, self.n_directed, self.n_undirected
        );
        let _ = writeln!(out, "## Connected components\n");
        for (i, c) in self.components.iter().enumerate() {
            let _ = writeln!(out, "{}. {} ({} nodes)", i + 1, join(c), c.len());
        }
        let _ = writeln!(out, "\nIsolated nodes: {}\n", join(&self.isolated));
        let _ = writeln!(out, "## Degrees\n");
        let _ = writeln!(out, "| Node | In-degree | Out-degree | Mb size |");
        let _ = writeln!(out, "|---|---:|---:|---:|");
        for r in &self.degrees.rows {
            let _ = writeln!(out, "| {} | {} | {} | {} |", r.node, r.in_degree, r.out_degree, r.mb_size);
        }
        let [mi, mo, mm] = self.degrees.mean;
        let [si, so, sm] = self.degrees.std;
        let _ = writeln!(out, "| Average | {mi:.2} | {mo:.2} | {mm:.2} |");
        let _ = writeln!(out, "| St. Dev. | {si:.2} | {so:.2} | {sm:.2} |");
        let c = &self.connections;
        let _ = writeln!(out, "\n## Connections\n");
        let _ = writeln!(
            out,
            "Serial: {}, diverging: {}, converging: {} (of which v-structures: {})",
            c.serial, c.diverging, c.converging, c.vstructures
        );
        if !self.influence.is_empty() {
            let _ = writeln!(out, "\n## Influence\n");
            for inf in &self.influence {
                let _ = writeln!(out, "### {}\n", inf.source);
                let _ = writeln!(out, "- direct ({}): {}", inf.direct.len(), join(&inf.direct));
                let _ = writeln!(out, "- indirect ({}): {}", inf.indirect.len(), join(&inf.indirect));
                let _ = writeln!(out, "- ambiguous adjacency ({}): {}\n", inf.ambiguous.len(), join(&inf.ambiguous));
            }
        }
        if let Some(domains) = &self.domains {
            let _ = writeln!(out, "\n## Connections among domains\n");
            let _ = writeln!(out, "| Domain | Number | Connected domains |");
            let _ = writeln!(out, "|---|---:|---|");
            for d in domains {
                let _ = writeln!(out, "| {} | {} | {} |", d.domain, d.count, d.render_partners());
            }
        }
        out
    }
}

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5",
    "#ffed6f",
];

/// A DOT style filling each mapped node with its domain's colour; the
/// colours cycle after twelve domains.
pub fn domain_style(domains: &DomainMap) -> DotStyle {
    let order = domains.domains();
    let mut style = DotStyle::default();
    for (node, d) in domains.entries() {
        let i = order.iter().position(|o| o == d).expect("domain listed");
        style.node_fill.insert(node.clone(), PALETTE[i % PALETTE.len()].to_string());
    }
    style.comments = order
        .iter()
        .enumerate()
        .map(|(i, d)| format!("domain {d}: {}", PALETTE[i % PALETTE.len()]))
        .collect();
    style
}
