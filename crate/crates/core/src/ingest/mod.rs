//! Metadata ingestion: DCF package indexes and edge-list files, normalized
//! into a [`PackageDatabase`].

mod dcf;
mod edgelist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dcf::{parse_dcf, parse_dep_field, unfold_dcf};
pub use edgelist::{load_edge_list, parse_edge_list, write_edge_list};

use crate::{Error, Result};

/// Base and recommended packages that never appear as database entries.
pub const DEFAULT_EXCLUSIONS: &[&str] = &[
    "R", "base", "stats", "utils", "methods", "graphics", "grDevices", "tools", "datasets",
    "parallel", "splines", "grid", "compiler", "tcltk", "stats4", "Matrix", "MASS", "lattice",
    "survival", "nlme", "mgcv", "boot", "class", "cluster", "codetools", "foreign",
    "KernSmooth", "nnet", "rpart", "spatial",
];

pub fn default_exclusions() -> BTreeSet<String> {
    DEFAULT_EXCLUSIONS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    Depends,
    Imports,
    LinkingTo,
    Suggests,
    Enhances,
}

impl FieldKind {
    pub const ALL: [FieldKind; 5] = [
        FieldKind::Depends,
        FieldKind::Imports,
        FieldKind::LinkingTo,
        FieldKind::Suggests,
        FieldKind::Enhances,
    ];

    /// Depends, Imports and LinkingTo are mandatory at install time.
    pub fn is_strong(self) -> bool {
        matches!(self, FieldKind::Depends | FieldKind::Imports | FieldKind::LinkingTo)
    }

    pub fn field_name(self) -> &'static str {
        match self {
            FieldKind::Depends => "Depends",
            FieldKind::Imports => "Imports",
            FieldKind::LinkingTo => "LinkingTo",
            FieldKind::Suggests => "Suggests",
            FieldKind::Enhances => "Enhances",
        }
    }

    pub fn from_field_name(name: &str) -> Option<Self> {
        FieldKind::ALL.into_iter().find(|k| k.field_name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Repository {
    #[default]
    Cran,
    Bioconductor,
    Other(String),
}

impl Repository {
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "CRAN" | "cran" => Repository::Cran,
            "Bioconductor" | "bioconductor" | "BioC" | "bioc" => Repository::Bioconductor,
            other => Repository::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Repository::Cran => "CRAN",
            Repository::Bioconductor => "Bioconductor",
            Repository::Other(s) => s,
        }
    }

    /// Tag for packages whose origin the input does not state.
    pub fn unknown() -> Self {
        Repository::Other("unknown".into())
    }
}

impl fmt::Display for Repository {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Repository {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Repository {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Repository::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepDeclaration {
    pub name: String,
    pub field_kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_constraint: Option<String>,
    /// Set by [`build_database`] when the target is excluded or not in the
    /// database. External declarations never become graph edges.
    #[serde(default)]
    pub external: bool,
}

impl DepDeclaration {
    pub fn new(name: impl Into<String>, field_kind: FieldKind) -> Self {
        DepDeclaration { name: name.into(), field_kind, version_constraint: None, external: false }
    }

    pub fn with_constraint(mut self, constraint: impl Into<String>) -> Self {
        self.version_constraint = Some(constraint.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPackageRecord {
    pub name: String,
    pub declarations: Vec<DepDeclaration>,
    pub repository: Repository,
}

impl RawPackageRecord {
    pub fn new(name: impl Into<String>, repository: Repository) -> Self {
        RawPackageRecord { name: name.into(), declarations: Vec::new(), repository }
    }

    /// Adds a declaration unless one with the same name and field already exists.
    pub fn declare(&mut self, decl: DepDeclaration) {
        if !self
            .declarations
            .iter()
            .any(|d| d.name == decl.name && d.field_kind == decl.field_kind)
        {
            self.declarations.push(decl);
        }
    }

    pub fn strong_declarations(&self) -> impl Iterator<Item = &DepDeclaration> {
        self.declarations.iter().filter(|d| d.field_kind.is_strong())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PackageDatabase {
    pub packages: BTreeMap<String, RawPackageRecord>,
    pub excluded_names: BTreeSet<String>,
    #[serde(default)]
    pub snapshot_label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PackageDatabase {
    pub fn len(&self) -> usize {
        self.packages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packages.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&RawPackageRecord> {
        self.packages.get(name)
    }

    /// Number of (package, strong parent) pairs that become graph edges.
    pub fn strong_relation_count(&self) -> usize {
        self.packages
            .values()
            .map(|r| {
                r.strong_declarations()
                    .filter(|d| !d.external)
                    .map(|d| d.name.as_str())
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .sum()
    }

    /// Merges another database into this one; records of `other` win.
    pub fn merge(mut self, other: PackageDatabase) -> PackageDatabase {
        let exclusions: BTreeSet<String> =
            self.excluded_names.union(&other.excluded_names).cloned().collect();
        let mut records: Vec<RawPackageRecord> = std::mem::take(&mut self.packages).into_values().collect();
        records.extend(other.packages.into_values());
        let mut db = build_database(records, &exclusions);
        let mut warnings = self.warnings;
        warnings.extend(other.warnings);
        warnings.extend(db.warnings);
        db.warnings = warnings;
        db.snapshot_label = if other.snapshot_label.is_empty() { self.snapshot_label } else { other.snapshot_label };
        db
    }

    pub fn to_json_writer<W: std::io::Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_json_reader<R: std::io::Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

/// Package names: letters, digits and dots, starting with a letter, at least
/// two characters, not ending with a dot.
pub fn is_valid_package_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    first.is_ascii_alphabetic()
        && name.len() >= 2
        && !name.ends_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '.')
}

/// Normalizes parsed records into a database.
///
/// Duplicate names resolve last-wins with a warning. Excluded names are
/// dropped from the package map, and every declaration that points at an
/// excluded or unknown package is kept but marked external.
pub fn build_database(
    records: impl IntoIterator<Item = RawPackageRecord>,
    exclusions: &BTreeSet<String>,
) -> PackageDatabase {
    let mut packages: BTreeMap<String, RawPackageRecord> = BTreeMap::new();
    let mut warnings = Vec::new();

    for record in records {
        if exclusions.contains(&record.name) {
            continue;
        }
        if !is_valid_package_name(&record.name) {
            warnings.push(format!("package name `{}` does not follow the naming rules", record.name));
        }
        if let Some(prev) = packages.get(&record.name) {
            warnings.push(format!(
                "duplicate package `{}` ({} replaced by {})",
                record.name, prev.repository, record.repository
            ));
        }
        packages.insert(record.name.clone(), record);
    }

    let names: BTreeSet<String> = packages.keys().cloned().collect();
    for record in packages.values_mut() {
        let mut deduped = RawPackageRecord::new(record.name.clone(), record.repository.clone());
        for mut decl in std::mem::take(&mut record.declarations) {
            decl.external = exclusions.contains(&decl.name) || !names.contains(&decl.name);
            deduped.declare(decl);
        }
        record.declarations = deduped.declarations;
    }

    for w in &warnings {
        log::debug!("{w}");
    }
    if !warnings.is_empty() {
        log::warn!("{} ingest warnings (first: {})", warnings.len(), warnings[0]);
    }

    PackageDatabase { packages, excluded_names: exclusions.clone(), snapshot_label: String::new(), warnings }
}

/// Loads a database from disk, picking the reader by extension: `.json` is a
/// serialized database, `.csv` an edge list, anything else a DCF index tagged
/// with `repository` and filtered through `exclusions`.
pub fn load_database(
    path: impl AsRef<Path>,
    repository: Repository,
    exclusions: &BTreeSet<String>,
) -> Result<PackageDatabase> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => PackageDatabase::from_json_reader(std::io::BufReader::new(std::fs::File::open(path)?)),
        Some("csv") => load_edge_list(path),
        _ => {
            let bytes = std::fs::read(path)?;
            let text = String::from_utf8_lossy(&bytes);
            let mut records = Vec::new();
            for parsed in parse_dcf(&text, repository) {
                match parsed {
                    Ok(r) => records.push(r),
                    Err(e) => log::warn!("{}: {e}", path.display()),
                }
            }
            let mut db = build_database(records, exclusions);
            db.snapshot_label = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(db)
        }
    }
}

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}
