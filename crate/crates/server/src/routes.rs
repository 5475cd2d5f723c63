use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use depheavy::analytics::{classify_parent_pair, key_paths, component_sizes};
use depheavy::graph::{downstream_paths, upstream_paths, GraphDocument, GraphEdge, GraphNode};
use depheavy::heaviness::{heaviness_from_upstream, upstream_heaviness_all, whatif_demote};
use depheavy::report::{row_to_json, summary_to_json, Metric, PackageStatsRow};
use depheavy::{Exact, NodeId};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::views::downstream_graph_grouped;
use crate::{AppState, Snapshot};

const DEFAULT_PER_PAGE: usize = 100;
const MAX_PER_PAGE: usize = 1000;

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: AppState) -> Router {
    let mut app = Router::new()
        .route("/packages", get(packages))
        .route("/package/{name}", get(package))
        .route("/package/{name}/upstream", get(upstream))
        .route("/package/{name}/downstream", get(downstream))
        .route("/package/{name}/downstream-graph", get(downstream_graph))
        .route("/core-graph", get(core_graph))
        .route("/key-paths", get(key_paths_route))
        .route("/summary", get(summary))
        .route("/whatif", post(whatif))
        .route("/reload", post(reload));
    if let Some(dir) = &state.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.layer(CorsLayer::permissive()).with_state(state)
}

fn lookup(snap: &Snapshot, name: &str) -> Result<NodeId, ApiError> {
    snap.graph.id(name).ok_or_else(|| ApiError::not_found(name))
}

fn row(snap: &Snapshot, v: NodeId) -> Value {
    row_to_json(&snap.rows[v.index()], snap.config.export)
}

#[derive(Deserialize)]
struct PageQuery {
    sort: Option<String>,
    dir: Option<String>,
    page: Option<usize>,
    per_page: Option<usize>,
}

async fn packages(State(st): State<AppState>, Query(q): Query<PageQuery>) -> ApiResult {
    let snap = st.snapshot();
    let sort = q.sort.as_deref().unwrap_or("name");
    let metric = match sort {
        "name" => None,
        other => Some(other.parse::<Metric>().map_err(|e| ApiError::bad_request(e.to_string()))?),
    };
    let desc = match q.dir.as_deref() {
        None => metric.is_some(),
        Some("desc") => true,
        Some("asc") => false,
        Some(other) => return Err(ApiError::bad_request(format!("dir must be asc or desc, got `{other}`"))),
    };
    let mut rows: Vec<&PackageStatsRow<Exact>> = snap.rows.iter().collect();
    if let Some(m) = metric {
        rows.sort_by(|a, b| {
            let ord = match (m.value(a), m.value(b)) {
                (Some(x), Some(y)) => {
                    let o = x.cmp(&y);
                    if desc { o.reverse() } else { o }
                }
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            };
            ord.then_with(|| a.name.cmp(&b.name))
        });
    } else if desc {
        rows.reverse();
    }
    let per_page = q.per_page.unwrap_or(DEFAULT_PER_PAGE).clamp(1, MAX_PER_PAGE);
    let page = q.page.unwrap_or(1).max(1);
    let items: Vec<Value> =
        rows.iter().skip((page - 1) * per_page).take(per_page).map(|r| row_to_json(r, snap.config.export)).collect();
    Ok(Json(json!({ "total": rows.len(), "page": page, "per_page": per_page, "rows": items })))
}

async fn package(State(st): State<AppState>, Path(name): Path<String>) -> ApiResult {
    let snap = st.snapshot();
    let g = &snap.graph;
    let v = lookup(&snap, &name)?;
    let s = g.strong();
    let parents: Vec<Value> =
        s.in_edges(v).map(|(e, a)| json!({ "name": g.name(a), "h": snap.table.edge_h[e.index()] })).collect();
    let children: Vec<Value> =
        s.out_edges(v).map(|(e, c)| json!({ "name": g.name(c), "h": snap.table.edge_h[e.index()] })).collect();
    let weak_parents: Vec<&str> = g.weak().parents(v).iter().map(|&a| g.name(a)).collect();
    let weak_children: Vec<&str> = g.weak().children(v).iter().map(|&c| g.name(c)).collect();
    let relation = match snap.table.package(v).mcohp_pair {
        Some((a, b)) => {
            let r = classify_parent_pair(g, a, b, v)?;
            let witness = match r {
                depheavy::analytics::PairRelation::CommonUpstream(c) => Some(g.name(c)),
                _ => None,
            };
            json!({ "category": r.label(), "witness": witness })
        }
        None => Value::Null,
    };
    Ok(Json(json!({
        "stats": row(&snap, v),
        "parents": parents,
        "children": children,
        "weak_parents": weak_parents,
        "weak_children": weak_children,
        "mcohp_relation": relation,
    })))
}

async fn upstream(State(st): State<AppState>, Path(name): Path<String>) -> ApiResult {
    let snap = st.snapshot();
    let g = &snap.graph;
    let p = lookup(&snap, &name)?;
    let hu = upstream_heaviness_all(g, p);
    let entries: Vec<Value> = upstream_paths(g.strong(), p)
        .into_iter()
        .zip(&hu)
        .map(|((u, path), &(u2, h))| {
            debug_assert_eq!(u, u2);
            json!({ "name": g.name(u), "path": g.names_of(&path), "h_u": h })
        })
        .collect();

    // the full upstream subgraph, edges annotated with h
    let mut members: Vec<NodeId> = hu.iter().map(|x| x.0).collect();
    members.push(p);
    members.sort_unstable();
    let nodes = members
        .iter()
        .map(|&v| GraphNode { name: g.name(v).to_string(), repository: g.repository(v).to_string(), members: None, depth: None })
        .collect();
    let edges = members
        .iter()
        .flat_map(|&v| g.strong().out_edges(v).map(move |(e, c)| (v, e, c)))
        .filter(|(_, _, c)| members.binary_search(c).is_ok())
        .map(|(v, e, c)| GraphEdge { h: Some(snap.table.edge_h[e.index()]), ..GraphEdge::strong(g.name(v), g.name(c)) })
        .collect();
    Ok(Json(json!({ "package": name, "upstream": entries, "graph": GraphDocument { nodes, edges } })))
}

#[derive(Deserialize)]
struct DepthQuery {
    min_depth: Option<u32>,
    max_depth: Option<u32>,
}

impl DepthQuery {
    fn range(&self) -> Result<(u32, u32), ApiError> {
        let (lo, hi) = (self.min_depth.unwrap_or(1), self.max_depth.unwrap_or(u32::MAX - 1));
        if lo > hi {
            return Err(ApiError::bad_request(format!("min_depth {lo} exceeds max_depth {hi}")));
        }
        Ok((lo, hi))
    }
}

async fn downstream(State(st): State<AppState>, Path(name): Path<String>, Query(q): Query<DepthQuery>) -> ApiResult {
    let snap = st.snapshot();
    let g = &snap.graph;
    let p = lookup(&snap, &name)?;
    let (lo, hi) = q.range()?;
    let entries: Vec<Value> = downstream_paths(g.strong(), p)
        .into_iter()
        .filter(|(_, d, _)| (lo..=hi).contains(d))
        .map(|(x, d, path)| {
            let h = heaviness_from_upstream(g, p, x).expect("downstream package");
            json!({ "name": g.name(x), "depth": d, "path": g.names_of(&path), "h_u": h })
        })
        .collect();
    Ok(Json(json!({ "package": name, "downstream": entries })))
}

async fn downstream_graph(State(st): State<AppState>, Path(name): Path<String>, Query(q): Query<DepthQuery>) -> ApiResult {
    let snap = st.snapshot();
    let p = lookup(&snap, &name)?;
    let (lo, hi) = q.range()?;
    let doc = downstream_graph_grouped(&snap.graph, &snap.table, p, lo, hi);
    Ok(Json(serde_json::to_value(doc).expect("document serializes")))
}

async fn core_graph(State(st): State<AppState>) -> ApiResult {
    let snap = st.snapshot();
    let core = &snap.core;
    let doc = core.to_document(&snap.graph, Some(&snap.core_betweenness), Some(snap.config.bt_threshold));
    Ok(Json(json!({
        "h_threshold": core.threshold,
        "nodes": core.node_count(),
        "edges": core.edge_count(),
        "flow_fraction": core.flow_fraction::<f64>(),
        "components": component_sizes(core),
        "graph": doc,
    })))
}

async fn key_paths_route(State(st): State<AppState>) -> ApiResult {
    let snap = st.snapshot();
    let g = &snap.graph;
    let kp = key_paths(&snap.core, &snap.core_betweenness, snap.config.bt_threshold);
    let edges: Vec<Value> = kp
        .edges
        .iter()
        .map(|&e| {
            let (a, c) = snap.core.graph.edge(e);
            json!({
                "parent": g.name(a),
                "child": g.name(c),
                "h": snap.core.edge_h[e.index()],
                "betweenness": snap.core_betweenness.values[e.index()],
            })
        })
        .collect();
    Ok(Json(json!({
        "bt_threshold": kp.threshold,
        "nodes": g.names_of(&kp.nodes),
        "edges": edges,
        "flow_fraction": kp.flow_fraction(),
        "edge_fraction": if snap.core.edge_count() == 0 { 0.0 } else { kp.edges.len() as f64 / snap.core.edge_count() as f64 },
    })))
}

async fn summary(State(st): State<AppState>) -> ApiResult {
    let snap = st.snapshot();
    match &snap.summary {
        Some(s) => Ok(Json(summary_to_json(s, snap.config.export))),
        None => Ok(Json(json!([]))),
    }
}

#[derive(Deserialize)]
struct WhatIfBody {
    package: String,
    #[serde(default)]
    demote: Vec<String>,
}

async fn whatif(State(st): State<AppState>, Json(body): Json<WhatIfBody>) -> ApiResult {
    let snap = st.snapshot();
    let g = &snap.graph;
    let p = lookup(&snap, &body.package)?;
    let parents = body.demote.iter().map(|n| lookup(&snap, n)).collect::<Result<Vec<_>, _>>()?;
    let w = whatif_demote(g, p, &parents).map_err(|e| ApiError { package: Some(body.package.clone()), ..e.into() })?;
    Ok(Json(json!({
        "package": body.package,
        "demote": body.demote,
        "old_count": w.old_count,
        "new_count": w.new_count,
        "reduced": g.names_of(&w.reduced),
    })))
}

async fn reload(State(st): State<AppState>) -> ApiResult {
    let Some(source) = st.source.clone() else {
        return Err(ApiError::bad_request("service was started without a reloadable source"));
    };
    let fresh = tokio::task::spawn_blocking(move || source.load())
        .await
        .map_err(|e| ApiError::bad_request(format!("reload task failed: {e}")))??;
    let packages = fresh.rows.len();
    st.replace(fresh);
    Ok(Json(json!({ "reloaded": true, "packages": packages })))
}
