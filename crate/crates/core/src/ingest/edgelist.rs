use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use super::{build_database, parse_error, DepDeclaration, FieldKind, PackageDatabase, RawPackageRecord, Repository};
use crate::Result;

/// Loads an edge-list CSV (`child,parent,relation[,repository]`).
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<PackageDatabase> {
    let path = path.as_ref();
    let mut db = parse_edge_list(std::fs::File::open(path)?)?;
    db.snapshot_label = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(db)
}

/// Parses an edge list. Every endpoint becomes a package; `strong` maps to
/// an `Imports` declaration and `weak` to `Suggests`. A row with empty
/// `parent` and `relation` declares a package without dependencies.
pub fn parse_edge_list<R: Read>(reader: R) -> Result<PackageDatabase> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);

    let headers = rdr.headers()?.clone();
    let expected = ["child", "parent", "relation"];
    if headers.len() < 3 || headers.iter().take(3).ne(expected) {
        return Err(parse_error(1, format!("expected header `child,parent,relation[,repository]`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }

    let mut records: BTreeMap<String, RawPackageRecord> = BTreeMap::new();
    let mut repos: BTreeMap<String, Repository> = BTreeMap::new();

    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");
        let (child, parent, relation) = (field(0), field(1), field(2));
        if child.is_empty() {
            return Err(parse_error(line, "empty child column"));
        }
        if let Some(repo) = row.get(3).filter(|r| !r.is_empty()) {
            repos.insert(child.to_string(), Repository::parse(repo));
        }
        records.entry(child.to_string()).or_insert_with(|| RawPackageRecord::new(child, Repository::unknown()));
        if parent.is_empty() && relation.is_empty() {
            continue;
        }
        let kind = match relation {
            "strong" => FieldKind::Imports,
            "weak" => FieldKind::Suggests,
            other => return Err(parse_error(line, format!("unknown relation `{other}` (expected strong or weak)"))),
        };
        if parent.is_empty() {
            return Err(parse_error(line, "empty parent column"));
        }
        records.entry(parent.to_string()).or_insert_with(|| RawPackageRecord::new(parent, Repository::unknown()));
        records.get_mut(child).expect("inserted above").declare(DepDeclaration::new(parent, kind));
    }

    for (name, repo) in repos {
        if let Some(r) = records.get_mut(&name) {
            r.repository = repo;
        }
    }
    Ok(build_database(records.into_values(), &BTreeSet::new()))
}

/// Writes the non-external relations of `db` as an edge list with the
/// repository column. Packages without any relation get a standalone row.
pub fn write_edge_list<W: Write>(db: &PackageDatabase, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["child", "parent", "relation", "repository"])?;
    for record in db.packages.values() {
        let mut rows: BTreeSet<(&str, &str)> = BTreeSet::new();
        for d in record.declarations.iter().filter(|d| !d.external) {
            rows.insert((d.name.as_str(), if d.field_kind.is_strong() { "strong" } else { "weak" }));
        }
        // a pair declared both ways is strong
        let strong: BTreeSet<&str> = rows.iter().filter(|(_, r)| *r == "strong").map(|(n, _)| *n).collect();
        rows.retain(|(n, r)| *r == "strong" || !strong.contains(n));
        if rows.is_empty() {
            w.write_record([record.name.as_str(), "", "", record.repository.as_str()])?;
        }
        for (parent, relation) in rows {
            w.write_record([record.name.as_str(), parent, relation, record.repository.as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}
