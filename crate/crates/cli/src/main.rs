//! `depheavy`: command-line front end for the heaviness engine.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use depheavy::adjusted::{
    default_epsilon, select_penalty, stability_curve, Penalties, DEFAULT_HC_PENALTY, DEFAULT_HID_PENALTY,
    DEFAULT_MHP_OFFSET, DEFAULT_RANK_WINDOW,
};
use depheavy::analytics::{component_sizes, core_graph, edge_betweenness, key_paths, EdgeBetweenness};
use depheavy::fitting::{fit_power_law, fit_stretched_exponential, histogram, pmf_from_counts, FitResult};
use depheavy::graph::build_graph;
use depheavy::heaviness::{compute_heaviness_table, whatif_demote};
use depheavy::ingest::{default_exclusions, load_database, write_edge_list, PackageDatabase, Repository};
use depheavy::report::{
    default_top_list_specs, ecosystem_summary, stats_from_table, top_list, top_lists, write_rows_csv, write_rows_json,
    write_summary_csv, write_summary_json, write_top_lists_json, ExportOptions, Metric, PackageStatsRow, TopListSpec,
};
use depheavy::{DepGraph, Exact, Real};
use depheavy_server::{AppState, SnapshotConfig, SnapshotSource};

#[derive(Parser)]
#[command(name = "depheavy", version, about = "Dependency heaviness analytics for package ecosystems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse package indexes or edge lists into a database file.
    Ingest(IngestArgs),
    /// Per-package statistics table.
    Stats(StatsArgs),
    /// Per-repository means.
    Summary(SummaryArgs),
    /// Packages passing a metric threshold, or the default top lists.
    Top(TopArgs),
    /// Core graph of heavy edges with betweenness and key paths.
    CoreGraph(CoreGraphArgs),
    /// Demote strong parents of a package and report the reduction.
    Whatif(WhatifArgs),
    /// Fit the edge heaviness or core component size distribution.
    Fit(FitArgs),
    /// Stability curve and selected penalty for an adjusted metric.
    Stability(StabilityArgs),
    /// Serve the HTTP query API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Database: `.json` from `ingest`, `.csv` edge list, or a DCF index.
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Repository tag for DCF input.
    #[arg(long, default_value = "unknown")]
    repo: String,
    /// Extra package names to drop from DCF input.
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
}

impl InputArgs {
    fn exclusions(&self) -> BTreeSet<String> {
        let mut ex = default_exclusions();
        ex.extend(self.exclude.iter().cloned());
        ex
    }

    fn load(&self) -> Result<DepGraph> {
        let db = load_database(&self.input, Repository::parse(&self.repo), &self.exclusions())
            .with_context(|| format!("reading {}", self.input.display()))?;
        let g = build_graph(&db);
        log::info!("loaded {} packages, {} strong edges", g.node_count(), g.strong().edge_count());
        for d in g.diagnostics() {
            log::warn!("{d}");
        }
        Ok(g)
    }
}

#[derive(Args, Clone, Copy)]
struct PenaltyArgs {
    #[arg(long, default_value_t = DEFAULT_MHP_OFFSET)]
    mhp_offset: u64,
    #[arg(long, default_value_t = DEFAULT_HC_PENALTY)]
    hc_penalty: u32,
    #[arg(long, default_value_t = DEFAULT_HID_PENALTY)]
    hid_penalty: u32,
}

impl PenaltyArgs {
    fn penalties(self) -> Penalties {
        Penalties { mhp_offset: self.mhp_offset, hc_a: self.hc_penalty, hid_a: self.hid_penalty }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Defaults to the output file's extension, else csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Decimal places for non-integer values.
    #[arg(long, default_value_t = 1)]
    precision: usize,
}

impl OutputArgs {
    fn format(&self) -> Format {
        self.format.unwrap_or(match self.out.as_deref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        })
    }

    fn options(&self) -> ExportOptions {
        ExportOptions { precision: self.precision }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Input files; each is read with the same repository tag.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, default_value = "unknown")]
    repo: String,
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    /// Existing database to merge into; the new records win on conflicts.
    #[arg(long)]
    append: Option<PathBuf>,
    /// `.json` database or `.csv` edge list; JSON to stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    penalties: PenaltyArgs,
}

#[derive(Args)]
struct SummaryArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TopArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    penalties: PenaltyArgs,
    /// Metric column to filter and sort on; without it the four default lists are written as JSON.
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long, requires = "metric")]
    threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Args)]
struct CoreGraphArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 30)]
    h_threshold: u64,
    #[arg(long, default_value_t = 20.0)]
    bt_threshold: f64,
    /// Output format.
    #[arg(long = "out", value_enum, default_value = "json")]
    format: GraphFormat,
    /// Output file; stdout when omitted.
    #[arg(short = 'o')]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct WhatifArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    package: String,
    #[arg(long, value_delimiter = ',', required = true)]
    demote: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitTarget {
    Heaviness,
    Components,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    target: FitTarget,
    /// Core graph threshold for component sizes.
    #[arg(long, default_value_t = 30)]
    h_threshold: u64,
    /// Largest distinct component sizes left out of the power-law fit.
    #[arg(long, default_value_t = 5)]
    drop_top: usize,
    /// Writes `value,observed,fitted` rows here.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenalizedMetric {
    Hc,
    Hid,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    metric: PenalizedMetric,
    #[arg(long, default_value_t = 30)]
    max_penalty: u32,
    #[arg(long, default_value_t = DEFAULT_RANK_WINDOW)]
    window: usize,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    penalties: PenaltyArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long, default_value_t = 30)]
    h_threshold: u64,
    #[arg(long, default_value_t = 20.0)]
    bt_threshold: f64,
    /// Built explorer to serve under /ui.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Stats(a) => stats(a),
        Command::Summary(a) => summary(a),
        Command::Top(a) => top(a),
        Command::CoreGraph(a) => core(a),
        Command::Whatif(a) => whatif(a),
        Command::Fit(a) => fit(a),
        Command::Stability(a) => stability(a),
        Command::Serve(a) => serve(a),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("DEPHEAVY_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("DEPHEAVY_THREADS must be a count, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn rows(g: &DepGraph, penalties: &Penalties) -> Vec<PackageStatsRow<Exact>> {
    let table = compute_heaviness_table(g);
    stats_from_table(g, &table, penalties)
}

fn ingest(a: IngestArgs) -> Result<()> {
    let mut exclusions = default_exclusions();
    exclusions.extend(a.exclude.iter().cloned());
    let mut db = match &a.append {
        Some(p) => load_database(p, Repository::unknown(), &exclusions).with_context(|| format!("reading {}", p.display()))?,
        None => PackageDatabase::default(),
    };
    for p in &a.paths {
        let next = load_database(p, Repository::parse(&a.repo), &exclusions).with_context(|| format!("reading {}", p.display()))?;
        log::info!("{}: {} packages", p.display(), next.len());
        db = db.merge(next);
    }
    eprintln!("{} packages, {} strong relations", db.len(), db.strong_relation_count());
    let mut w = open_out(a.out.as_deref())?;
    match a.out.as_deref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => write_edge_list(&db, &mut w)?,
        _ => {
            db.to_json_writer(&mut w)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let g = a.input.load()?;
    let rows = rows(&g, &a.penalties.penalties());
    let mut w = open_out(a.output.out.as_deref())?;
    match a.output.format() {
        Format::Csv => write_rows_csv(&rows, a.output.options(), &mut w)?,
        Format::Json => write_rows_json(&rows, a.output.options(), &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn summary(a: SummaryArgs) -> Result<()> {
    let g = a.input.load()?;
    let rows = rows(&g, &Penalties::default());
    let summary = ecosystem_summary(&rows)?;
    let mut w = open_out(a.output.out.as_deref())?;
    match a.output.format() {
        Format::Csv => write_summary_csv(&summary, a.output.options(), &mut w)?,
        Format::Json => write_summary_json(&summary, a.output.options(), &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn top(a: TopArgs) -> Result<()> {
    let g = a.input.load()?;
    let rows = rows(&g, &a.penalties.penalties());
    let mut w = open_out(a.output.out.as_deref())?;
    match a.metric {
        None => write_top_lists_json(&top_lists(&rows, &default_top_list_specs()), a.output.options(), &mut w)?,
        Some(metric) => {
            let threshold = a.threshold.map(exact_threshold).transpose()?.unwrap_or_else(|| Exact::from_integer(0));
            let list = top_list(&rows, &TopListSpec { metric, threshold: Some(threshold) });
            match a.output.format() {
                Format::Csv => write_rows_csv(&list.packages, a.output.options(), &mut w)?,
                Format::Json => write_top_lists_json(&[list], a.output.options(), &mut w)?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Thresholds are compared exactly, so the decimal given on the command line
/// is read as a ratio rather than through a float.
fn exact_threshold(x: f64) -> Result<Exact> {
    if !x.is_finite() {
        bail!("threshold must be finite");
    }
    let scaled = (x * 1e6).round();
    if scaled.abs() > 9.0e15 {
        bail!("threshold {x} out of range");
    }
    Ok(Exact::new(scaled as i64, 1_000_000))
}

fn core(a: CoreGraphArgs) -> Result<()> {
    let g = a.input.load()?;
    let table = compute_heaviness_table(&g);
    let cg = core_graph(&g, &table, a.h_threshold);
    let bt: EdgeBetweenness<Real> = edge_betweenness(&cg.graph);
    let kp = key_paths(&cg, &bt, a.bt_threshold);
    let sizes = component_sizes(&cg);
    eprintln!(
        "core graph: {} packages, {} edges, {:.1}% of heaviness flow, {} components (largest {})",
        cg.node_count(),
        cg.edge_count(),
        100.0 * cg.flow_fraction::<Real>(),
        sizes.len(),
        sizes.first().copied().unwrap_or(0)
    );
    eprintln!(
        "key paths: {} edges, {} packages, {:.1}% of betweenness",
        kp.edges.len(),
        kp.nodes.len(),
        100.0 * kp.flow_fraction()
    );
    let doc = cg.to_document(&g, Some(&bt), Some(a.bt_threshold));
    let mut w = open_out(a.path.as_deref())?;
    match a.format {
        GraphFormat::Dot => w.write_all(doc.to_dot("core").as_bytes())?,
        GraphFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn whatif(a: WhatifArgs) -> Result<()> {
    let g = a.input.load()?;
    let p = g.require(&a.package)?;
    let parents = a.demote.iter().map(|n| g.require(n)).collect::<depheavy::Result<Vec<_>>>()?;
    let w = whatif_demote(&g, p, &parents)?;
    write_json(
        None,
        &serde_json::json!({
            "package": a.package,
            "demote": a.demote,
            "old_count": w.old_count,
            "new_count": w.new_count,
            "reduced": g.names_of(&w.reduced),
        }),
    )
}

fn fit(a: FitArgs) -> Result<()> {
    let g = a.input.load()?;
    let table = compute_heaviness_table(&g);
    let (result, points): (FitResult<Real>, Vec<(Real, Real)>) = match a.target {
        FitTarget::Heaviness => {
            let pmf = pmf_from_counts::<Real>(&histogram(table.edge_h.iter().copied()));
            let points = pmf.iter().map(|(&h, &p)| (h as Real, p)).collect();
            (fit_stretched_exponential(&pmf)?, points)
        }
        FitTarget::Components => {
            let cg = core_graph(&g, &table, a.h_threshold);
            let sizes: Vec<u64> = component_sizes(&cg).into_iter().map(|s| s as u64).collect();
            let points = histogram(sizes.iter().copied()).into_iter().map(|(s, f)| (s as Real, f as Real)).collect();
            (fit_power_law(&sizes, a.drop_top)?, points)
        }
    };
    if let Some(p) = &a.points {
        result.write_observed_fitted(&points, BufWriter::new(File::create(p)?))?;
    }
    write_json(a.out.as_deref(), &serde_json::to_value(&result)?)
}

fn stability(a: StabilityArgs) -> Result<()> {
    let g = a.input.load()?;
    let rows = rows(&g, &Penalties::default());
    let mut metric = BTreeMap::new();
    let mut k = BTreeMap::new();
    for r in &rows {
        let (value, count) = match a.metric {
            PenalizedMetric::Hc => (r.hc, r.k_c),
            PenalizedMetric::Hid => (r.hid, r.k_id),
        };
        if let Some(v) = value {
            metric.insert(r.name.clone(), v);
            k.insert(r.name.clone(), count);
        }
    }
    let curve = stability_curve(&metric, &k, 1..=a.max_penalty, a.window)?;
    let default = match a.metric {
        PenalizedMetric::Hc => DEFAULT_HC_PENALTY,
        PenalizedMetric::Hid => DEFAULT_HID_PENALTY,
    };
    let selected = select_penalty(&curve, default_epsilon(), default);
    let s: Vec<Option<f64>> = curve.s_values.iter().map(|s| s.map(|s| *s.numer() as f64 / *s.denom() as f64)).collect();
    write_json(
        a.out.as_deref(),
        &serde_json::json!({
            "packages": metric.len(),
            "rank_window": curve.rank_window,
            "a_values": curve.a_values,
            "s_values": s,
            "selected": selected,
        }),
    )
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = SnapshotConfig {
        penalties: a.penalties.penalties(),
        h_threshold: a.h_threshold,
        bt_threshold: a.bt_threshold,
        ..SnapshotConfig::default()
    };
    let source = SnapshotSource {
        path: a.input.input.clone(),
        repository: Repository::parse(&a.input.repo),
        exclusions: a.input.exclusions(),
        config,
    };
    let snapshot = source.load().with_context(|| format!("loading {}", source.path.display()))?;
    log::info!("snapshot ready: {} packages", snapshot.rows.len());
    let mut state = AppState::new(snapshot).with_source(source);
    if let Some(dir) = a.ui_dir {
        state = state.with_ui_dir(dir);
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(depheavy_server::serve(state, a.addr))
}
