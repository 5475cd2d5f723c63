//! The dependency graph: strong and weak edge sets over a dense node index,
//! with a bitset reachability index over the strong edges.

mod digraph;
mod export;
mod paths;
mod reach;
mod traverse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

pub use digraph::{Digraph, EdgeId, NodeId};
pub use export::{GraphDocument, GraphEdge, GraphNode};
pub use paths::{downstream_paths, upstream_paths};
pub use reach::{iter_ones, BitMatrix, ReachabilityIndex};
pub use traverse::{
    depth, distance, distances_from, distances_to, reach_without, upstream_filtered, UNREACHABLE,
};

use crate::ingest::{PackageDatabase, Repository};
use crate::{Error, Result};

pub type NodeSet = BTreeSet<NodeId>;

/// Immutable package dependency graph. Edges point from parent to child.
#[derive(Debug)]
pub struct DepGraph {
    names: Vec<String>,
    repositories: Vec<Repository>,
    lookup: HashMap<String, NodeId>,
    strong: Digraph,
    weak: Digraph,
    diagnostics: Vec<String>,
    reach: OnceLock<ReachabilityIndex>,
}

impl Clone for DepGraph {
    fn clone(&self) -> Self {
        DepGraph {
            names: self.names.clone(),
            repositories: self.repositories.clone(),
            lookup: self.lookup.clone(),
            strong: self.strong.clone(),
            weak: self.weak.clone(),
            diagnostics: self.diagnostics.clone(),
            reach: self.reach.clone(),
        }
    }
}

/// Builds the graph from a database: strong edges for Depends, Imports and
/// LinkingTo, weak edges for Suggests and Enhances; external declarations are
/// skipped. Nodes are indexed in sorted name order.
pub fn build_graph(db: &PackageDatabase) -> DepGraph {
    let names: Vec<String> = db.packages.keys().cloned().collect();
    let repositories: Vec<Repository> = db.packages.values().map(|r| r.repository.clone()).collect();
    let mut strong = Vec::new();
    let mut weak = Vec::new();
    for record in db.packages.values() {
        for d in &record.declarations {
            if d.external || !db.packages.contains_key(&d.name) {
                continue;
            }
            let pair = (d.name.clone(), record.name.clone());
            if d.field_kind.is_strong() {
                strong.push(pair);
            } else {
                weak.push(pair);
            }
        }
    }
    DepGraph::from_parts(names, repositories, strong, weak)
}

impl DepGraph {
    /// Assembles a graph from named nodes and `(parent, child)` name pairs.
    /// Names are re-sorted; edges naming unknown nodes are ignored with a
    /// diagnostic.
    pub fn from_parts(
        names: Vec<String>,
        repositories: Vec<Repository>,
        strong: impl IntoIterator<Item = (String, String)>,
        weak: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        assert_eq!(names.len(), repositories.len());
        let mut nodes: BTreeMap<String, Repository> = BTreeMap::new();
        for (n, r) in names.into_iter().zip(repositories) {
            nodes.insert(n, r);
        }
        let names: Vec<String> = nodes.keys().cloned().collect();
        let repositories: Vec<Repository> = nodes.into_values().collect();
        let lookup: HashMap<String, NodeId> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), NodeId(i as u32))).collect();

        let mut diagnostics = Vec::new();
        let mut resolve = |edges: Vec<(String, String)>, kind: &str| -> Vec<(NodeId, NodeId)> {
            let mut out = Vec::with_capacity(edges.len());
            for (p, c) in edges {
                match (lookup.get(&p), lookup.get(&c)) {
                    (Some(&a), Some(&b)) if a == b => diagnostics.push(format!("self-dependency of `{p}` ignored")),
                    (Some(&a), Some(&b)) => out.push((a, b)),
                    _ => diagnostics.push(format!("{kind} edge {p} -> {c} names an unknown package")),
                }
            }
            out
        };
        let strong_edges = resolve(strong.into_iter().collect(), "strong");
        let strong_set: BTreeSet<(NodeId, NodeId)> = strong_edges.iter().copied().collect();
        // strong wins when a pair is declared both ways
        let weak_edges: Vec<(NodeId, NodeId)> =
            resolve(weak.into_iter().collect(), "weak").into_iter().filter(|e| !strong_set.contains(e)).collect();

        let n = names.len();
        let g = DepGraph {
            strong: Digraph::from_edges(n, strong_edges),
            weak: Digraph::from_edges(n, weak_edges),
            names,
            repositories,
            lookup,
            diagnostics,
            reach: OnceLock::new(),
        };
        g.finish()
    }

    /// Convenience constructor for fixtures: nodes are the edge endpoints plus
    /// `extra_nodes`, all tagged with an unknown repository.
    pub fn from_named_edges(strong: &[(&str, &str)], weak: &[(&str, &str)], extra_nodes: &[&str]) -> Self {
        let mut names: BTreeSet<String> = extra_nodes.iter().map(|s| s.to_string()).collect();
        for (a, b) in strong.iter().chain(weak) {
            names.insert(a.to_string());
            names.insert(b.to_string());
        }
        let repos = vec![Repository::unknown(); names.len()];
        let own = |es: &[(&str, &str)]| es.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
        DepGraph::from_parts(names.into_iter().collect(), repos, own(strong), own(weak))
    }

    fn finish(mut self) -> Self {
        let idx = ReachabilityIndex::build(&self.strong);
        for cycle in idx.cycles() {
            let names: Vec<&str> = cycle.iter().map(|&v| self.name(v)).collect();
            self.diagnostics.push(format!("strong dependency cycle among {}", names.join(", ")));
        }
        for d in &self.diagnostics {
            log::warn!("{d}");
        }
        let _ = self.reach.set(idx);
        self
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len() as u32).map(NodeId)
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn repository(&self, v: NodeId) -> &Repository {
        &self.repositories[v.index()]
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.lookup.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<NodeId> {
        self.id(name).ok_or_else(|| Error::UnknownPackage(name.to_string()))
    }

    pub fn strong(&self) -> &Digraph {
        &self.strong
    }

    pub fn weak(&self) -> &Digraph {
        &self.weak
    }

    pub fn reach(&self) -> &ReachabilityIndex {
        self.reach.get_or_init(|| ReachabilityIndex::build(&self.strong))
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn names_of<'a>(&'a self, set: impl IntoIterator<Item = &'a NodeId>) -> Vec<&'a str> {
        set.into_iter().map(|&v| self.name(v)).collect()
    }

    pub(crate) fn missing_edge(&self, parent: NodeId, child: NodeId) -> Error {
        Error::MissingEdge { parent: self.name(parent).to_string(), child: self.name(child).to_string() }
    }

    pub fn strong_edge(&self, parent: NodeId, child: NodeId) -> Result<EdgeId> {
        self.strong.edge_id(parent, child).ok_or_else(|| self.missing_edge(parent, child))
    }

    pub fn upstream(&self, p: NodeId) -> NodeSet {
        self.reach().upstream(p).collect()
    }

    pub fn downstream(&self, p: NodeId) -> NodeSet {
        self.reach().downstream(p).collect()
    }
}

/// Dependency categories of a package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Parents,
    WeakParents,
    StrongDependencies,
    Children,
    Downstream,
    IndirectDownstream,
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "parents" => Category::Parents,
            "weak_parents" => Category::WeakParents,
            "strong_dependencies" | "upstream" => Category::StrongDependencies,
            "children" => Category::Children,
            "downstream" => Category::Downstream,
            "indirect_downstream" => Category::IndirectDownstream,
            other => return Err(Error::domain(format!("unknown dependency category `{other}`"))),
        })
    }
}

pub fn dependency_query(g: &DepGraph, p: NodeId, category: Category) -> NodeSet {
    match category {
        Category::Parents => g.strong.parents(p).iter().copied().collect(),
        Category::WeakParents => g.weak.parents(p).iter().copied().collect(),
        Category::StrongDependencies => g.upstream(p),
        Category::Children => g.strong.children(p).iter().copied().collect(),
        Category::Downstream => g.downstream(p),
        Category::IndirectDownstream => {
            let children = g.strong.children(p);
            g.reach().downstream(p).filter(|v| children.binary_search(v).is_err()).collect()
        }
    }
}

/// Number of strong dependencies (upstream packages) of `p`.
pub fn strong_dep_count(g: &DepGraph, p: NodeId) -> usize {
    g.reach().upstream_count(p)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::ingest::{build_database, DepDeclaration, FieldKind, RawPackageRecord};

    #[test]
    fn g1_shape() {
        let g = g1();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.strong().edge_count(), 6);
        assert_eq!(g.names(), ["A", "B", "C", "D", "E", "P"]);
    }

    #[test]
    fn queries_on_g1() {
        let g = g1();
        let p = g.id("P").unwrap();
        let c = g.id("C").unwrap();
        assert_eq!(dependency_query(&g, p, Category::StrongDependencies), ids(&g, &["A", "B", "C", "D", "E"]));
        assert_eq!(strong_dep_count(&g, p), 5);
        assert_eq!(dependency_query(&g, c, Category::IndirectDownstream), ids(&g, &["P"]));
        assert_eq!(dependency_query(&g, c, Category::Children), ids(&g, &["A", "B"]));
        assert_eq!(dependency_query(&g, c, Category::Downstream), ids(&g, &["A", "B", "P"]));
        let e = g.id("E").unwrap();
        assert!(dependency_query(&g, e, Category::StrongDependencies).is_empty());
    }

    #[test]
    fn isolated_node_has_no_dependencies() {
        let g = DepGraph::from_named_edges(&[("A", "B")], &[], &["Z"]);
        assert_eq!(strong_dep_count(&g, g.id("Z").unwrap()), 0);
    }

    #[test]
    fn build_from_database() {
        let mut p = RawPackageRecord::new("Pk", Repository::Cran);
        p.declare(DepDeclaration::new("Aa", FieldKind::Imports));
        p.declare(DepDeclaration::new("Aa", FieldKind::Suggests));
        p.declare(DepDeclaration::new("Bb", FieldKind::Suggests));
        p.declare(DepDeclaration::new("R", FieldKind::Depends));
        let db = build_database(
            vec![p, RawPackageRecord::new("Aa", Repository::Cran), RawPackageRecord::new("Bb", Repository::Cran)],
            &crate::ingest::default_exclusions(),
        );
        let g = build_graph(&db);
        assert_eq!(g.strong().edge_count(), 1);
        // strong wins over the duplicate Suggests
        assert_eq!(g.weak().edge_count(), 1);
        assert!(g.weak().has_edge(g.id("Bb").unwrap(), g.id("Pk").unwrap()));
    }

    #[test]
    fn suggests_only_has_no_strong_edges() {
        let g = DepGraph::from_named_edges(&[], &[("A", "B"), ("C", "B")], &[]);
        assert_eq!(g.strong().edge_count(), 0);
        assert_eq!(g.weak().edge_count(), 2);
    }

    #[test]
    fn cycle_is_diagnosed() {
        let g = DepGraph::from_named_edges(&[("A", "B"), ("B", "A")], &[], &[]);
        assert!(g.diagnostics().iter().any(|d| d.contains("cycle")));
        assert_eq!(g.upstream(g.id("A").unwrap()), ids(&g, &["B"]));
        assert_eq!(g.upstream(g.id("B").unwrap()), ids(&g, &["A"]));
    }

    #[test]
    fn deterministic_indexing() {
        let a = DepGraph::from_named_edges(&[("x1", "y1"), ("a1", "y1")], &[], &[]);
        let b = DepGraph::from_named_edges(&[("a1", "y1"), ("x1", "y1")], &[], &[]);
        assert_eq!(a.names(), b.names());
        assert_eq!(a.strong(), b.strong());
    }
}
