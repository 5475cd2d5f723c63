use std::collections::BTreeSet;
use std::path::PathBuf;

use depheavy::adjusted::Penalties;
use depheavy::analytics::{core_graph, edge_betweenness, CoreGraph, EdgeBetweenness, DEFAULT_CORE_THRESHOLD, DEFAULT_KEY_PATH_THRESHOLD};
use depheavy::graph::build_graph;
use depheavy::heaviness::{compute_heaviness_table, HeavinessTable};
use depheavy::ingest::{load_database, Repository};
use depheavy::report::{ecosystem_summary, stats_from_table, EcosystemSummary, ExportOptions, PackageStatsRow};
use depheavy::{DepGraph, Exact, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotConfig {
    pub penalties: Penalties,
    pub h_threshold: u64,
    pub bt_threshold: f64,
    pub export: ExportOptions,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            penalties: Penalties::default(),
            h_threshold: DEFAULT_CORE_THRESHOLD,
            bt_threshold: DEFAULT_KEY_PATH_THRESHOLD as f64,
            export: ExportOptions::default(),
        }
    }
}

/// Where `/reload` reads the database from.
#[derive(Debug, Clone)]
pub struct SnapshotSource {
    pub path: PathBuf,
    pub repository: Repository,
    pub exclusions: BTreeSet<String>,
    pub config: SnapshotConfig,
}

impl SnapshotSource {
    pub fn load(&self) -> Result<Snapshot> {
        let db = load_database(&self.path, self.repository.clone(), &self.exclusions)?;
        Ok(Snapshot::build(build_graph(&db), self.config))
    }
}

/// Everything the service answers from, computed once.
pub struct Snapshot {
    pub graph: DepGraph,
    pub table: HeavinessTable,
    /// Sorted by name, so row `i` is package `NodeId(i)`.
    pub rows: Vec<PackageStatsRow<Exact>>,
    pub summary: Option<EcosystemSummary<Exact>>,
    pub core: CoreGraph,
    pub core_betweenness: EdgeBetweenness<f64>,
    pub config: SnapshotConfig,
}

impl Snapshot {
    pub fn build(graph: DepGraph, config: SnapshotConfig) -> Self {
        let table = compute_heaviness_table(&graph);
        let rows = stats_from_table(&graph, &table, &config.penalties);
        let summary = ecosystem_summary(&rows).ok();
        let core = core_graph(&graph, &table, config.h_threshold);
        let core_betweenness = edge_betweenness(&core.graph);
        Snapshot { graph, table, rows, summary, core, core_betweenness, config }
    }
}
