//! Dependency-heaviness analytics for package ecosystems.
//!
//! The crate ingests package metadata (DCF indexes or a plain edge list),
//! builds the strong/weak dependency graph, and computes the heaviness family
//! of metrics: per-edge heaviness, heaviness from upstream packages, heaviness
//! on children / downstream / indirect downstream, co-heaviness of parent
//! pairs, the adjusted variants used for ranking, and the graph-level analyses
//! built on top of them (core graph, edge betweenness, key paths, transmission
//! length, source scores, distribution fits).
//!
//! Numeric code that is not inherently integral is generic over [`Scalar`], so
//! the same routine can run on `f32`/`f64` or on exact rationals. The aliases
//! [`Real`] and [`Exact`] name the two instantiations used by the reporting
//! layer.

pub mod adjusted;
pub mod analytics;
pub mod error;
pub mod fitting;
pub mod graph;
pub mod heaviness;
pub mod ingest;
pub mod num;
pub mod report;

pub use error::{Error, Result};
pub use graph::{DepGraph, Digraph, EdgeId, NodeId};
pub use num::Scalar;

/// Floating-point scalar used for fits and betweenness in exports.
pub type Real = f64;

/// Exact rational scalar used for means, ratios and rankings.
pub type Exact = num_rational::Ratio<i64>;

/// Edge betweenness over `f64`.
pub type RealBetweenness = analytics::EdgeBetweenness<Real>;

/// Edge betweenness with exact rational credit.
pub type ExactBetweenness = analytics::EdgeBetweenness<Exact>;

/// Distribution fit over `f64`.
pub type RealFit = fitting::FitResult<Real>;

/// Stability curve with exact scores.
pub type ExactStabilityCurve = adjusted::StabilityCurve<Exact>;
