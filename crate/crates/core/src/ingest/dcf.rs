use super::{is_valid_package_name, parse_error, DepDeclaration, FieldKind, RawPackageRecord, Repository};
use crate::{Error, Result};

/// One stanza with its fields in source order, continuation lines folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcfStanza {
    /// 1-based line of the stanza's first line.
    pub line: usize,
    pub fields: Vec<(String, String)>,
}

impl DcfStanza {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

/// Stanza being read: first line, fields so far, first error.
type Pending = Option<(usize, Vec<(String, String)>, Option<Error>)>;

/// Splits a DCF document into stanzas and folds continuation lines into the
/// preceding field with a single joining space.
pub fn unfold_dcf(text: &str) -> Vec<Result<DcfStanza>> {
    let mut out = Vec::new();
    let mut current: Pending = None;

    let flush = |cur: &mut Pending, out: &mut Vec<Result<DcfStanza>>| {
        if let Some((line, fields, err)) = cur.take() {
            out.push(match err {
                Some(e) => Err(e),
                None => Ok(DcfStanza { line, fields }),
            });
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut current, &mut out);
            continue;
        }
        let stanza = current.get_or_insert_with(|| (lineno, Vec::new(), None));
        if stanza.2.is_some() {
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            match stanza.1.last_mut() {
                Some((_, value)) => {
                    let piece = line.trim();
                    if !piece.is_empty() {
                        if !value.is_empty() {
                            value.push(' ');
                        }
                        value.push_str(piece);
                    }
                }
                None => stanza.2 = Some(parse_error(lineno, "continuation line before any field")),
            }
            continue;
        }
        match line.split_once(':') {
            Some((name, value)) if !name.is_empty() && !name.contains(char::is_whitespace) => {
                stanza.1.push((name.to_string(), value.trim().to_string()));
            }
            _ => stanza.2 = Some(parse_error(lineno, format!("expected `Field: value`, found `{line}`"))),
        }
    }
    flush(&mut current, &mut out);
    out
}

/// Parses a DCF package index into one record per stanza.
///
/// Stanza-level problems (a continuation line before any field, a missing
/// `Package:` field, a malformed dependency list) are reported in place and do
/// not stop the other stanzas from parsing.
pub fn parse_dcf(text: &str, repository: Repository) -> Vec<Result<RawPackageRecord>> {
    unfold_dcf(text)
        .into_iter()
        .map(|stanza| {
            let stanza = stanza?;
            let name = stanza
                .get("Package")
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| parse_error(stanza.line, "stanza has no `Package:` field"))?;
            let mut record = RawPackageRecord::new(name, repository.clone());
            for kind in FieldKind::ALL {
                if let Some(value) = stanza.get(kind.field_name()) {
                    let decls = parse_dep_field(value, kind).map_err(|e| match e {
                        Error::Domain(msg) => parse_error(stanza.line, format!("package `{name}`: {msg}")),
                        other => other,
                    })?;
                    for d in decls {
                        record.declare(d);
                    }
                }
            }
            Ok(record)
        })
        .collect()
}

/// Parses a comma-separated dependency list such as
/// `"pkgA, pkgB (>= 0.1.1)"`.
pub fn parse_dep_field(field_text: &str, field_kind: FieldKind) -> Result<Vec<DepDeclaration>> {
    let mut entries = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in field_text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                entries.push(&field_text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    entries.push(&field_text[start..]);

    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (name, constraint) = match entry.find('(') {
            Some(open) => {
                let close = entry.rfind(')').filter(|&c| c > open && entry[c + 1..].trim().is_empty());
                let balanced = entry.matches('(').count() == 1 && entry.matches(')').count() == 1;
                match close {
                    Some(close) if balanced => (entry[..open].trim(), Some(entry[open + 1..close].trim())),
                    _ => return Err(Error::domain(format!("unbalanced parenthesis in dependency entry `{entry}`"))),
                }
            }
            None if entry.contains(')') => {
                return Err(Error::domain(format!("unbalanced parenthesis in dependency entry `{entry}`")))
            }
            None => (entry, None),
        };
        if name.is_empty() {
            return Err(Error::domain(format!("dependency entry `{entry}` has no package name")));
        }
        if name != "R" && !is_valid_package_name(name) {
            log::warn!("dependency name `{name}` does not follow the naming rules");
        }
        let mut decl = DepDeclaration::new(name, field_kind);
        decl.version_constraint = constraint.map(str::to_string);
        out.push(decl);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LUBRIDATE: &str = "\
Package: lubridate
Version: 1.8.0
Depends: methods, R (>= 3.2)
Imports: generics
LinkingTo: cpp11 (>= 0.2.7)
Suggests: covr, knitr, testthat (>= 2.1.0), vctrs (>= 0.3.0), rmarkdown
Enhances: chron, timeDate, tis, zoo
License: GPL (>= 2)
";

    #[test]
    fn all_five_fields() {
        let recs = parse_dcf(LUBRIDATE, Repository::Cran);
        assert_eq!(recs.len(), 1);
        let r = recs[0].as_ref().unwrap();
        assert_eq!(r.name, "lubridate");
        for kind in FieldKind::ALL {
            assert!(r.declarations.iter().any(|d| d.field_kind == kind), "{kind:?} missing");
        }
        let cpp = r.declarations.iter().find(|d| d.name == "cpp11").unwrap();
        assert_eq!(cpp.version_constraint.as_deref(), Some(">= 0.2.7"));
        assert_eq!(r.declarations.len(), 2 + 1 + 1 + 5 + 4);
    }

    #[test]
    fn empty_text() {
        assert!(parse_dcf("", Repository::Cran).is_empty());
        assert!(parse_dcf("\n\n  \n", Repository::Cran).is_empty());
    }

    #[test]
    fn dep_field_examples() {
        let d = parse_dep_field("pkgA, pkgB (>= 0.1.1)", FieldKind::Imports).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].name.as_str(), d[0].version_constraint.as_deref()), ("pkgA", None));
        assert_eq!((d[1].name.as_str(), d[1].version_constraint.as_deref()), ("pkgB", Some(">= 0.1.1")));
        assert!(parse_dep_field("", FieldKind::Imports).unwrap().is_empty());
        let d = parse_dep_field("R (>= 3.5.0),\n  methods", FieldKind::Depends).unwrap();
        assert_eq!((d[0].name.as_str(), d[0].version_constraint.as_deref()), ("R", Some(">= 3.5.0")));
        assert_eq!((d[1].name.as_str(), d[1].version_constraint.as_deref()), ("methods", None));
    }

    #[test]
    fn trailing_comma_and_spaces() {
        let d = parse_dep_field(" a1 ,  b2(>=1.0) ,", FieldKind::Suggests).unwrap();
        assert_eq!(d.iter().map(|x| x.name.as_str()).collect::<Vec<_>>(), ["a1", "b2"]);
    }

    #[test]
    fn unbalanced_paren_names_entry() {
        let err = parse_dep_field("good, bad (>= 1.0", FieldKind::Imports).unwrap_err();
        assert!(err.to_string().contains("bad (>= 1.0"), "{err}");
        assert!(parse_dep_field("x1 >= 1)", FieldKind::Imports).is_err());
        assert!(parse_dep_field("(>= 1)", FieldKind::Imports).is_err());
    }

    #[test]
    fn malformed_stanza_does_not_stop_others() {
        let text = "  orphan continuation\nPackage: aa\n\nPackage: bb\nImports: aa\n\nVersion: 1.0\n\nPackage: cc\n";
        let recs = parse_dcf(text, Repository::Cran);
        assert_eq!(recs.len(), 4);
        match &recs[0] {
            Err(Error::Parse { line, .. }) => assert_eq!(*line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(recs[1].as_ref().unwrap().name, "bb");
        match &recs[2] {
            Err(Error::Parse { line, .. }) => assert_eq!(*line, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(recs[3].as_ref().unwrap().name, "cc");
    }

    #[test]
    fn field_names_are_case_sensitive() {
        let recs = parse_dcf("Package: aa\nimports: bb\n", Repository::Cran);
        assert!(recs[0].as_ref().unwrap().declarations.is_empty());
    }

    #[test]
    fn crlf_input() {
        let recs = parse_dcf("Package: aa\r\nImports: bb,\r\n  cc\r\n", Repository::Cran);
        let r = recs[0].as_ref().unwrap();
        assert_eq!(r.declarations.len(), 2);
    }
}
