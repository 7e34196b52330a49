use std::collections::HashMap;
use std::fmt::Write;

use super::{Dag, Nodes, Pdag};

/// Optional decorations for DOT output.
#[derive(Debug, Clone, Default)]
pub struct DotStyle {
    /// Emitted as `//` comment lines before the graph.
    pub comments: Vec<String>,
    /// Fill colour per node name.
    pub node_fill: HashMap<String, String>,
    /// Edge label keyed by `(from, to)` names; undirected edges are looked
    /// up in both orientations.
    pub edge_labels: HashMap<(String, String), String>,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn render(nodes: &Nodes, directed: &[(usize, usize)], undirected: &[(usize, usize)], style: &DotStyle) -> String {
    let mut out = String::new();
    for c in &style.comments {
        for line in c.lines() {
            let _ = writeln!(out, "// {line}");
        }
    }
    out.push_str("digraph {\n");
    for node in nodes {
        let _ = write!(out, "  {}", quote(&node.name));
        let mut attrs = vec![format!("shape={}", match node.kind {
            super::NodeKind::Discrete => "box",
            super::NodeKind::Continuous => "ellipse",
        })];
        if let Some(fill) = style.node_fill.get(&node.name) {
            attrs.push(format!("style=filled fillcolor={}", quote(fill)));
        }
        let _ = writeln!(out, " [{}];", attrs.join(" "));
    }
    let label = |a: &str, b: &str, either: bool| {
        style
            .edge_labels
            .get(&(a.to_string(), b.to_string()))
            .or_else(|| {
                either
                    .then(|| style.edge_labels.get(&(b.to_string(), a.to_string())))
                    .flatten()
            })
            .map(|l| format!(" label={}", quote(l)))
            .unwrap_or_default()
    };
    for &(a, b) in directed {
        let (na, nb) = (nodes.name(a), nodes.name(b));
        let l = label(na, nb, false);
        let attrs = if l.is_empty() { String::new() } else { format!(" [{}]", l.trim()) };
        let _ = writeln!(out, "  {} -> {}{};", quote(na), quote(nb), attrs);
    }
    for &(a, b) in undirected {
        let (na, nb) = (nodes.name(a), nodes.name(b));
        let _ = writeln!(out, "  {} -> {} [dir=none{}];", quote(na), quote(nb), label(na, nb, true));
    }
    out.push_str("}\n");
    out
}

impl Dag {
    pub fn to_dot(&self, style: &DotStyle) -> String {
        let edges: Vec<_> = self.edges().collect();
        render(self.nodes(), &edges, &[], style)
    }
}

impl Pdag {
    /// Undirected edges are rendered with `dir=none`.
    pub fn to_dot(&self, style: &DotStyle) -> String {
        let d: Vec<_> = self.directed_edges().collect();
        let u: Vec<_> = self.undirected_edges().collect();
        render(self.nodes(), &d, &u, style)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Node, Nodes};

    #[test]
    fn undirected_edges_use_dir_none() {
        let nodes = Nodes::new([Node::discrete("A"), Node::continuous("B"), Node::continuous("C")]).unwrap();
        let mut p = Pdag::empty(nodes);
        p.add_directed(0, 1).unwrap();
        p.add_undirected(1, 2).unwrap();
        let mut style = DotStyle::default();
        style.edge_labels.insert(("C".into(), "B".into()), "0.9".into());
        let dot = p.to_dot(&style);
        assert_eq!(
            dot,
            "digraph {\n  \"A\" [shape=box];\n  \"B\" [shape=ellipse];\n  \"C\" [shape=ellipse];\n  \"A\" -> \"B\";\n  \"B\" -> \"C\" [dir=none label=\"0.9\"];\n}\n"
        );
    }
}
