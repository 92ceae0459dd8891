//! Report serialization: JSON, flattened `path,value` CSV, and Markdown
//! tables laid out like the usual segmentation / clinical-index tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

use super::evaluate::{MeanStd, MethodReport};
use crate::error::{Error, Result};
use crate::geometry::StructureId;
use crate::io::Instant;
use crate::stats::AgreementStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!(
                "unknown format `{s}` (expected json, csv or markdown)"
            )),
        }
    }
}

pub fn render_report(report: &MethodReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text.into_bytes()
        }
        ReportFormat::Csv => render_csv(report).into_bytes(),
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
    }
}

/// Reads a JSON or flattened-CSV report back.
pub fn parse_report(bytes: &[u8], format: ReportFormat) -> Result<MethodReport> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_slice(bytes)?),
        ReportFormat::Csv => Ok(serde_json::from_value(unflatten(bytes)?)?),
        ReportFormat::Markdown => Err(Error::InvalidArgument(
            "markdown reports are write-only".into(),
        )),
    }
}

fn render_csv(report: &MethodReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut rows = Vec::new();
    flatten(&value, String::new(), &mut rows);
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["path", "value"])
        .expect("in-memory write");
    for (path, literal) in rows {
        writer
            .write_record([path, literal])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Leaves become `(dotted.path, json literal)`; empty containers are kept as
/// `[]` / `{}` leaves so the tree can be rebuilt exactly.
fn flatten(value: &Value, path: String, out: &mut Vec<(String, String)>) {
    let child = |key: &str| {
        if path.is_empty() {
            key.to_string()
        } else {
            format!("{path}.{key}")
        }
    };
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(v, child(k), out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, child(&i.to_string()), out);
            }
        }
        leaf => out.push((path, leaf.to_string())),
    }
}

fn is_index(segment: &str) -> bool {
    !segment.is_empty() && segment.bytes().all(|b| b.is_ascii_digit())
}

fn unflatten(bytes: &[u8]) -> Result<Value> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["path", "value"] {
        return Err(Error::InvalidArgument(
            "report csv header must be `path,value`".into(),
        ));
    }
    let mut root = Value::Object(Map::new());
    for record in rdr.records() {
        let record = record?;
        let (path, literal) = (&record[0], &record[1]);
        let leaf: Value = serde_json::from_str(literal)?;
        let segments: Vec<&str> = path.split('.').collect();
        insert(&mut root, &segments, leaf)
            .map_err(|msg| Error::InvalidArgument(format!("report csv path `{path}`: {msg}")))?;
    }
    Ok(root)
}

fn insert(node: &mut Value, segments: &[&str], leaf: Value) -> std::result::Result<(), String> {
    let (head, rest) = segments.split_first().ok_or("empty path")?;
    let fresh = || match rest.first() {
        Some(next) if is_index(next) => Value::Array(Vec::new()),
        Some(_) => Value::Object(Map::new()),
        None => Value::Null,
    };
    let slot = match node {
        Value::Object(map) => map.entry(head.to_string()).or_insert_with(fresh),
        Value::Array(items) => {
            let i: usize = head
                .parse()
                .map_err(|_| format!("`{head}` is not an index"))?;
            if i == items.len() {
                items.push(fresh());
            } else if i > items.len() {
                return Err(format!("index {i} skips entries"));
            }
            &mut items[i]
        }
        _ => return Err(format!("`{head}` descends into a scalar")),
    };
    if rest.is_empty() {
        *slot = leaf;
        Ok(())
    } else {
        insert(slot, rest, leaf)
    }
}

fn mean_std(v: Option<MeanStd>, decimals: usize) -> String {
    match v {
        Some(m) => format!("{:.*} ± {:.*}", decimals, m.mean, decimals, m.std),
        None => "n/a".into(),
    }
}

fn agreement_cells(a: Option<&AgreementStats>) -> [String; 3] {
    match a {
        Some(s) => [
            s.corr.map_or("n/a".into(), |c| format!("{c:.3}")),
            format!("{:.1} ± {:.1}", s.bias, s.std),
            format!("{:.1}", s.mae),
        ],
        None => ["n/a".into(), "n/a".into(), "n/a".into()],
    }
}

fn list_or_all<T: std::fmt::Display>(items: &Option<Vec<T>>) -> String {
    match items {
        Some(v) => v
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", "),
        None => "all".into(),
    }
}

fn render_markdown(report: &MethodReport) -> String {
    let meta = &report.metadata;
    let cohort = &meta.cohort;
    let mut out = String::new();
    let _ = writeln!(out, "# Segmentation benchmark report\n");
    let _ = writeln!(out, "- Engine version: {}", meta.engine_version);
    let _ = writeln!(out, "- Prediction masks: {}", meta.prediction_variant);
    let _ = writeln!(out, "- Reference masks: {}", meta.reference_variant);
    let _ = writeln!(
        out,
        "- Long axis: {} ({} discs)",
        meta.axis_construction, meta.discs
    );
    let _ = writeln!(
        out,
        "- Cohort: quality {}; folds {}; views {}; instants {}",
        list_or_all(&cohort.quality),
        list_or_all(&cohort.folds),
        list_or_all(&cohort.views),
        list_or_all(&cohort.instants)
    );
    let _ = writeln!(
        out,
        "- Patients: {}; cases: {}\n",
        cohort.n_patients, cohort.n_cases
    );

    if cohort.n_cases == 0 {
        let _ = writeln!(out, "> No cases in the cohort: 0 cases scored.\n");
    }

    let _ = writeln!(out, "## Segmentation accuracy (mean ± std)\n");
    let mut header = vec![String::new()];
    let mut values = vec!["mean ± std".to_string()];
    let mut counts = vec!["scored / failed / excluded".to_string()];
    for structure in StructureId::ALL {
        for instant in Instant::ALL {
            let agg = report
                .segmentation
                .iter()
                .find(|a| a.structure == structure && a.instant == instant);
            for (name, decimals, pick) in [
                (
                    "D",
                    3,
                    (|a: &super::evaluate::SegmentationAggregate| a.dice) as fn(&_) -> _,
                ),
                ("d_m", 1, |a| a.d_m),
                ("d_H", 1, |a| a.d_h),
            ] {
                header.push(format!("{structure} {instant} {name}"));
                values.push(mean_std(agg.and_then(pick), decimals));
                counts.push(agg.map_or("0 / 0 / 0".into(), |a| {
                    format!("{} / {} / {}", a.n_scored, a.n_failed, a.n_excluded)
                }));
            }
        }
    }
    table(&mut out, &header, &[values, counts]);

    let clinical = &report.clinical;
    let _ = writeln!(out, "## Clinical indices\n");
    let mut header = vec![String::new()];
    let mut row = vec![format!("{} patients", clinical.n_patients)];
    for (name, stats) in [
        ("EDV", clinical.edv.as_ref()),
        ("ESV", clinical.esv.as_ref()),
        ("EF", clinical.ef.as_ref()),
    ] {
        for col in ["corr", "bias ± σ", "mae"] {
            header.push(format!("{name} {col}"));
        }
        row.extend(agreement_cells(stats));
    }
    table(&mut out, &header, &[row]);
    if clinical.n_patients == 0 {
        let _ = writeln!(
            out,
            "> No patients with all four LV_endo images: 0 clinical pairs.\n"
        );
    }

    let outliers = &report.outliers;
    let _ = writeln!(out, "## Outliers\n");
    match outliers.rate {
        Some(rate) => {
            let _ = writeln!(
                out,
                "{} of {} cases ({:.1}%) exceed the {:?} rule on {}.\n",
                outliers.n_outliers,
                outliers.n_cases,
                100.0 * rate,
                meta.outlier_mode,
                meta.outlier_structures
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(" / ")
            );
        }
        None => {
            let _ = writeln!(out, "0 cases evaluated.\n");
        }
    }

    if !report.failed.is_empty() || !clinical.failed.is_empty() {
        let _ = writeln!(out, "## Failures\n");
        for f in &report.failed {
            let _ = writeln!(out, "- {} {}: {:?}", f.case, f.structure, f.reason);
        }
        for f in &clinical.failed {
            let _ = writeln!(out, "- {} clinical: {}", f.patient_id, f.reason);
        }
        out.push('\n');
    }
    out
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header));
    out.push_str(&line(&vec!["---".to_string(); header.len()]));
    for row in rows {
        out.push_str(&line(row));
    }
    out.push('\n');
}
