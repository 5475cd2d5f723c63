use std::io::Write;

use serde::Serialize;

use super::{EcosystemSummary, PackageStatsRow, TopList, SUMMARY_ROWS};
use crate::num::format_fixed;
use crate::{Result, Scalar};

pub const COLUMNS: [&str; 21] = [
    "name",
    "repository",
    "n_strong",
    "k_p",
    "mhp",
    "mhp_parents",
    "adjusted_mhp",
    "mcohp",
    "mcohp_pair",
    "k_c",
    "hc",
    "adjusted_hc",
    "k_d",
    "hd",
    "k_id",
    "hid",
    "adjusted_hid",
    "total_downstream",
    "gini_from_parents",
    "gini_on_children",
    "depth",
];

/// Decimal places for non-integer values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportOptions {
    pub precision: usize,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { precision: 1 }
    }
}

fn fixed<T: Scalar>(v: Option<T>, o: ExportOptions) -> String {
    v.map(|v| format_fixed(v, o.precision)).unwrap_or_default()
}

fn rounded<T: Scalar>(v: Option<T>, o: ExportOptions) -> Option<f64> {
    v.map(|v| format_fixed(v, o.precision).parse().expect("formatted number"))
}

#[derive(Serialize)]
struct RowView<'a> {
    name: &'a str,
    repository: &'a str,
    n_strong: u64,
    k_p: u64,
    mhp: u64,
    mhp_parents: &'a [String],
    adjusted_mhp: Option<f64>,
    mcohp: u64,
    mcohp_pair: Option<[&'a str; 2]>,
    k_c: u64,
    hc: Option<f64>,
    adjusted_hc: Option<f64>,
    k_d: u64,
    hd: Option<f64>,
    k_id: u64,
    hid: Option<f64>,
    adjusted_hid: Option<f64>,
    total_downstream: u64,
    gini_from_parents: Option<f64>,
    gini_on_children: Option<f64>,
    depth: u32,
}

fn view<T: Scalar>(r: &PackageStatsRow<T>, o: ExportOptions) -> RowView<'_> {
    RowView {
        name: &r.name,
        repository: &r.repository,
        n_strong: r.n_strong,
        k_p: r.k_p,
        mhp: r.mhp,
        mhp_parents: &r.mhp_parents,
        adjusted_mhp: rounded(Some(r.adjusted_mhp), o),
        mcohp: r.mcohp,
        mcohp_pair: r.mcohp_pair.as_ref().map(|(a, b)| [a.as_str(), b.as_str()]),
        k_c: r.k_c,
        hc: rounded(r.hc, o),
        adjusted_hc: rounded(r.adjusted_hc, o),
        k_d: r.k_d,
        hd: rounded(r.hd, o),
        k_id: r.k_id,
        hid: rounded(r.hid, o),
        adjusted_hid: rounded(r.adjusted_hid, o),
        total_downstream: r.total_downstream,
        gini_from_parents: rounded(r.gini_from_parents, o),
        gini_on_children: rounded(r.gini_on_children, o),
        depth: r.depth,
    }
}

/// One row as a JSON object, formatted exactly as in [`write_rows_json`].
pub fn row_to_json<T: Scalar>(r: &PackageStatsRow<T>, o: ExportOptions) -> serde_json::Value {
    serde_json::to_value(view(r, o)).expect("row serializes")
}

/// The summary as a JSON array, formatted exactly as in [`write_summary_json`].
pub fn summary_to_json<T: Scalar>(summary: &EcosystemSummary<T>, o: ExportOptions) -> serde_json::Value {
    let groups: Vec<serde_json::Value> = summary
        .groups
        .iter()
        .map(|g| {
            let mut m = serde_json::Map::new();
            m.insert("repository".into(), g.repository.clone().into());
            m.insert("packages".into(), g.packages.into());
            for (label, v) in SUMMARY_ROWS.iter().zip(g.values()) {
                m.insert(label.to_string(), rounded(v, o).into());
            }
            serde_json::Value::Object(m)
        })
        .collect();
    serde_json::Value::Array(groups)
}

/// Multi-valued cells are joined with `;`.
pub fn write_rows_csv<T: Scalar, W: Write>(rows: &[PackageStatsRow<T>], o: ExportOptions, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for r in rows {
        out.write_record([
            r.name.clone(),
            r.repository.clone(),
            r.n_strong.to_string(),
            r.k_p.to_string(),
            r.mhp.to_string(),
            r.mhp_parents.join(";"),
            fixed(Some(r.adjusted_mhp), o),
            r.mcohp.to_string(),
            r.mcohp_pair.as_ref().map(|(a, b)| format!("{a};{b}")).unwrap_or_default(),
            r.k_c.to_string(),
            fixed(r.hc, o),
            fixed(r.adjusted_hc, o),
            r.k_d.to_string(),
            fixed(r.hd, o),
            r.k_id.to_string(),
            fixed(r.hid, o),
            fixed(r.adjusted_hid, o),
            r.total_downstream.to_string(),
            fixed(r.gini_from_parents, o),
            fixed(r.gini_on_children, o),
            r.depth.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_rows_json<T: Scalar, W: Write>(rows: &[PackageStatsRow<T>], o: ExportOptions, mut w: W) -> Result<()> {
    let views: Vec<RowView<'_>> = rows.iter().map(|r| view(r, o)).collect();
    serde_json::to_writer_pretty(&mut w, &views)?;
    writeln!(w)?;
    Ok(())
}

/// One line per summary row, one column per group.
pub fn write_summary_csv<T: Scalar, W: Write>(summary: &EcosystemSummary<T>, o: ExportOptions, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["metric".to_string()];
    header.extend(summary.groups.iter().map(|g| g.repository.clone()));
    out.write_record(&header)?;
    let mut counts = vec!["packages".to_string()];
    counts.extend(summary.groups.iter().map(|g| g.packages.to_string()));
    out.write_record(&counts)?;
    let values: Vec<[Option<T>; 10]> = summary.groups.iter().map(|g| g.values()).collect();
    for (i, label) in SUMMARY_ROWS.iter().enumerate() {
        let mut rec = vec![label.to_string()];
        rec.extend(values.iter().map(|v| fixed(v[i], o)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_json<T: Scalar, W: Write>(summary: &EcosystemSummary<T>, o: ExportOptions, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &summary_to_json(summary, o))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_top_lists_json<T: Scalar, W: Write>(lists: &[TopList<T>], o: ExportOptions, mut w: W) -> Result<()> {
    #[derive(Serialize)]
    struct ListView<'a> {
        metric: &'static str,
        threshold: Option<f64>,
        packages: Vec<RowView<'a>>,
    }
    let views: Vec<ListView<'_>> = lists
        .iter()
        .map(|l| ListView {
            metric: l.metric.column(),
            threshold: l.threshold.map(|t| t.as_f64()),
            packages: l.packages.iter().map(|r| view(r, o)).collect(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut w, &views)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjusted::Penalties;
    use crate::graph::fixtures::*;
    use crate::report::compute_all_stats;
    use crate::Exact;

    #[test]
    fn g1_csv_and_json() {
        let rows = compute_all_stats::<Exact>(&g1(), &Penalties::default());
        let mut csv_out = Vec::new();
        write_rows_csv(&rows, ExportOptions::default(), &mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[3], "C,unknown,1,1,1,E,15.5,0,,2,2.0,0.3,3,2.0,1,2.0,0.3,6,0.0,0.0,1");

        let mut json_out = Vec::new();
        write_rows_json(&rows, ExportOptions::default(), &mut json_out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 6);
        assert_eq!(v[5]["hc"], serde_json::Value::Null);
        assert_eq!(v[2]["hc"], 2.0);
        assert_eq!(v[5]["mcohp_pair"], serde_json::json!(["A", "B"]));
    }
}
