use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::DepGraph;
use crate::Result;

/// Node of a JSON graph document. Group nodes (collapsed leaves) carry their
/// member names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub name: String,
    pub repository: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub parent: String,
    pub child: String,
    pub relation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betweenness: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub highlighted: bool,
}

impl GraphEdge {
    pub fn strong(parent: impl Into<String>, child: impl Into<String>) -> Self {
        GraphEdge { parent: parent.into(), child: child.into(), relation: "strong".into(), h: None, betweenness: None, highlighted: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl GraphDocument {
    /// Every node and every strong and weak edge of `g`.
    pub fn from_dep_graph(g: &DepGraph) -> Self {
        let nodes = g
            .nodes()
            .map(|v| GraphNode { name: g.name(v).to_string(), repository: g.repository(v).to_string(), members: None, depth: None })
            .collect();
        let mut edges: Vec<GraphEdge> = g.strong().edges().map(|(_, p, c)| GraphEdge::strong(g.name(p), g.name(c))).collect();
        edges.extend(g.weak().edges().map(|(_, p, c)| GraphEdge { relation: "weak".into(), ..GraphEdge::strong(g.name(p), g.name(c)) }));
        GraphDocument { nodes, edges }
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", escape(name));
        for n in &self.nodes {
            match &n.members {
                Some(m) => {
                    let _ = writeln!(s, "  \"{}\" [shape=box, style=filled, fillcolor=palegreen, label=\"{} ({})\"];", escape(&n.name), escape(&n.name), m.len());
                }
                None => {
                    let _ = writeln!(s, "  \"{}\";", escape(&n.name));
                }
            }
        }
        for e in &self.edges {
            let mut attrs = Vec::new();
            if let Some(h) = e.h {
                attrs.push(format!("label=\"{h}\""));
            }
            if e.relation == "weak" {
                attrs.push("style=dashed".to_string());
            }
            if e.highlighted {
                attrs.push("color=red".to_string());
            }
            let attrs = if attrs.is_empty() { String::new() } else { format!(" [{}]", attrs.join(", ")) };
            let _ = writeln!(s, "  \"{}\" -> \"{}\"{};", escape(&e.parent), escape(&e.child), attrs);
        }
        s.push_str("}\n");
        s
    }

    pub fn write_nodes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["name", "repository"])?;
        for n in &self.nodes {
            w.write_record([n.name.as_str(), n.repository.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_edges_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["parent", "child", "relation", "h", "betweenness"])?;
        for e in &self.edges {
            w.write_record([
                e.parent.clone(),
                e.child.clone(),
                e.relation.clone(),
                e.h.map(|h| h.to_string()).unwrap_or_default(),
                e.betweenness.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_lists_both_relations() {
        let g = DepGraph::from_named_edges(&[("A", "B")], &[("C", "B")], &[]);
        let doc = GraphDocument::from_dep_graph(&g);
        assert_eq!(doc.nodes.len(), 3);
        assert_eq!(doc.edges.iter().filter(|e| e.relation == "weak").count(), 1);
        let json = serde_json::to_string(&doc).unwrap();
        let back: GraphDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let dot = doc.to_dot("g");
        assert!(dot.contains("\"C\" -> \"B\" [style=dashed];"));
    }
}
