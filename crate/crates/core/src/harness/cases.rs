//! Per-case score table: `patient_id,view,instant,structure,status,dice,dm,dh`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::evaluate::MethodReport;
use crate::error::{Error, Result};
use crate::geometry::StructureId;
use crate::io::{Instant, View};
use crate::metrics::{FailureReason, StructureScore};

pub const CASES_HEADER: &str = "patient_id,view,instant,structure,status,dice,dm,dh";

/// One structure of one case. Distances are empty unless `status` is
/// `scored`; `dice` is empty for excluded structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub patient_id: String,
    pub view: View,
    pub instant: Instant,
    pub structure: StructureId,
    pub status: String,
    pub dice: Option<f64>,
    pub dm: Option<f64>,
    pub dh: Option<f64>,
}

impl CaseRow {
    /// `(patient_id, view, instant, structure)` as text, used to match rows.
    pub fn key(&self) -> String {
        format!(
            "{}_{}_{}/{}",
            self.patient_id, self.view, self.instant, self.structure
        )
    }
}

fn status_of(score: &StructureScore) -> &'static str {
    match score {
        StructureScore::Scored(_) => "scored",
        StructureScore::Failed { reason, .. } => match reason {
            FailureReason::MissingPrediction => "missing_prediction",
            FailureReason::InvalidPrediction(_) => "invalid_prediction",
            FailureReason::EmptyPrediction => "empty_prediction",
            FailureReason::DegeneratePrediction => "degenerate_prediction",
        },
    }
}

/// Rows in case order, structures in LV_endo, LV_epi, LA order.
pub fn case_rows(report: &MethodReport) -> Vec<CaseRow> {
    let mut rows = Vec::new();
    for case in &report.cases {
        for structure in StructureId::ALL {
            let row = |status: &str, dice, dm, dh| CaseRow {
                patient_id: case.patient_id.clone(),
                view: case.view,
                instant: case.instant,
                structure,
                status: status.to_string(),
                dice,
                dm,
                dh,
            };
            rows.push(match case.score(structure) {
                Some(score @ StructureScore::Scored(g)) => {
                    row(status_of(score), Some(g.dice), Some(g.d_m), Some(g.d_h))
                }
                Some(score) => row(status_of(score), Some(score.dice()), None, None),
                None => row("excluded", None, None, None),
            });
        }
    }
    rows
}

pub fn cases_csv(rows: &[CaseRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        writer.write_record(CASES_HEADER.split(','))?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_cases_csv(reader: impl std::io::Read) -> Result<Vec<CaseRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CASES_HEADER {
        return Err(Error::InvalidArgument(format!(
            "cases table header must be `{CASES_HEADER}`, got `{}`",
            header.join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_cases_csv(path: impl AsRef<Path>) -> Result<Vec<CaseRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_cases_csv(file)
}
