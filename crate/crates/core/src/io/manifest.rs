//! Cohort manifests: one CSV row per (patient, view, instant) image with its
//! quality grade, ejection-fraction group and optional fold.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_COLUMNS: [&str; 6] = [
    "patient_id",
    "view",
    "instant",
    "quality",
    "ef_group",
    "fold",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum View {
    #[serde(rename = "2CH")]
    TwoChamber,
    #[serde(rename = "4CH")]
    FourChamber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Instant {
    ED,
    ES,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quality {
    Good,
    Medium,
    Poor,
}

/// LV ejection-fraction group: ≤45 %, ≥55 %, or in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EfGroup {
    #[serde(rename = "le45")]
    AtMost45,
    #[serde(rename = "ge55")]
    AtLeast55,
    #[serde(rename = "else")]
    Between,
}

impl View {
    pub const ALL: [View; 2] = [View::TwoChamber, View::FourChamber];

    pub fn as_str(self) -> &'static str {
        match self {
            View::TwoChamber => "2CH",
            View::FourChamber => "4CH",
        }
    }
}

impl Instant {
    pub const ALL: [Instant; 2] = [Instant::ED, Instant::ES];

    pub fn as_str(self) -> &'static str {
        match self {
            Instant::ED => "ED",
            Instant::ES => "ES",
        }
    }
}

impl Quality {
    pub const ALL: [Quality; 3] = [Quality::Good, Quality::Medium, Quality::Poor];

    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Good => "Good",
            Quality::Medium => "Medium",
            Quality::Poor => "Poor",
        }
    }
}

impl EfGroup {
    pub const ALL: [EfGroup; 3] = [EfGroup::AtMost45, EfGroup::AtLeast55, EfGroup::Between];

    pub fn as_str(self) -> &'static str {
        match self {
            EfGroup::AtMost45 => "le45",
            EfGroup::AtLeast55 => "ge55",
            EfGroup::Between => "else",
        }
    }

    /// Group of a measured ejection fraction in percent.
    pub fn from_ef(ef_percent: f64) -> Self {
        if ef_percent <= 45.0 {
            EfGroup::AtMost45
        } else if ef_percent >= 55.0 {
            EfGroup::AtLeast55
        } else {
            EfGroup::Between
        }
    }
}

macro_rules! display_via_as_str {
    ($($ty:ty),*) => {$(
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    )*};
}
display_via_as_str!(View, Instant, Quality, EfGroup);

impl FromStr for View {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "2CH" => Ok(View::TwoChamber),
            "4CH" => Ok(View::FourChamber),
            _ => Err(format!("unknown view `{s}`")),
        }
    }
}

impl FromStr for Instant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ED" => Ok(Instant::ED),
            "ES" => Ok(Instant::ES),
            _ => Err(format!("unknown instant `{s}`")),
        }
    }
}

impl FromStr for Quality {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "good" => Ok(Quality::Good),
            "medium" => Ok(Quality::Medium),
            "poor" => Ok(Quality::Poor),
            _ => Err(format!("unknown quality `{s}`")),
        }
    }
}

impl FromStr for EfGroup {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "le45" | "<=45" | "≤45" | "≤45%" | "<=45%" => Ok(EfGroup::AtMost45),
            "ge55" | ">=55" | "≥55" | "≥55%" | ">=55%" => Ok(EfGroup::AtLeast55),
            "else" | "other" => Ok(EfGroup::Between),
            _ => Err(format!("unknown ef_group `{s}`")),
        }
    }
}

/// Identity of one scored image.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CaseKey {
    pub patient_id: String,
    pub view: View,
    pub instant: Instant,
}

impl CaseKey {
    /// File stem used by submission and reference directories.
    pub fn file_stem(&self) -> String {
        format!("{}_{}_{}", self.patient_id, self.view, self.instant)
    }
}

impl fmt::Display for CaseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.file_stem())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientCase {
    pub patient_id: String,
    pub view: View,
    pub instant: Instant,
    pub quality: Quality,
    pub ef_group: EfGroup,
    pub fold: Option<u32>,
}

impl PatientCase {
    pub fn key(&self) -> CaseKey {
        CaseKey {
            patient_id: self.patient_id.clone(),
            view: self.view,
            instant: self.instant,
        }
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<PatientCase>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(file, path)
}

/// Parses manifest CSV from any reader; `origin` is used in error messages.
pub fn parse_manifest(reader: impl std::io::Read, origin: &Path) -> Result<Vec<PatientCase>> {
    let manifest_err = |line: u64, msg: String| Error::Manifest {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(MANIFEST_COLUMNS) {
        *slot = column(name).ok_or_else(|| manifest_err(1, format!("missing column `{name}`")))?;
    }
    let fold_col = column("fold");

    let mut seen = BTreeSet::new();
    let mut cases = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_err = |msg: String| manifest_err(line, msg);

        let patient_id = field(idx[0]).to_string();
        if patient_id.is_empty() {
            return Err(parse_err("empty patient_id".into()));
        }
        let fold = match fold_col.map(field) {
            None | Some("") => None,
            Some(v) => Some(
                v.parse::<u32>()
                    .ok()
                    .filter(|&f| f >= 1)
                    .ok_or_else(|| parse_err(format!("invalid fold `{v}`")))?,
            ),
        };
        let case = PatientCase {
            patient_id,
            view: field(idx[1]).parse().map_err(parse_err)?,
            instant: field(idx[2]).parse().map_err(parse_err)?,
            quality: field(idx[3]).parse().map_err(parse_err)?,
            ef_group: field(idx[4]).parse().map_err(parse_err)?,
            fold,
        };
        if !seen.insert(case.key()) {
            return Err(Error::DuplicateCase(case.key().to_string()));
        }
        cases.push(case);
    }
    Ok(cases)
}
