//! Paired method-vs-method significance testing on per-case scores.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cases::CaseRow;
use crate::error::{Error, Result};
use crate::geometry::StructureId;
use crate::io::Instant;
use crate::stats::{wilcoxon_signed_rank, WilcoxonResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Dice,
    Dm,
    Dh,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Dice => "dice",
            Metric::Dm => "dm",
            Metric::Dh => "dh",
        }
    }

    fn value(self, row: &CaseRow) -> Option<f64> {
        match self {
            Metric::Dice => row.dice,
            Metric::Dm => row.dm,
            Metric::Dh => row.dh,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dice" | "d" => Ok(Metric::Dice),
            "dm" | "d_m" => Ok(Metric::Dm),
            "dh" | "d_h" => Ok(Metric::Dh),
            _ => Err(format!("unknown metric `{s}` (expected dice, dm or dh)")),
        }
    }
}

/// Whether all matched pairs feed one test or one test per structure and
/// instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    #[default]
    Pooled,
    ByStructureAndInstant,
}

impl FromStr for Pooling {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pooled" => Ok(Pooling::Pooled),
            "by-structure-and-instant" | "stratified" => Ok(Pooling::ByStructureAndInstant),
            _ => Err(format!(
                "unknown pooling `{s}` (expected pooled or by-structure-and-instant)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGroup {
    pub structure: Option<StructureId>,
    pub instant: Option<Instant>,
    /// Pairs where both sides carry the metric.
    pub n_pairs: usize,
    /// Pairs dropped because one side has no value (failed or excluded).
    pub n_skipped: usize,
    pub result: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: Metric,
    pub pooling: Pooling,
    pub groups: Vec<ComparisonGroup>,
}

fn index<'a>(rows: &'a [CaseRow], side: &str) -> Result<BTreeMap<String, &'a CaseRow>> {
    let mut map = BTreeMap::new();
    for row in rows {
        if map.insert(row.key(), row).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate row {} in {side}",
                row.key()
            )));
        }
    }
    Ok(map)
}

/// Wilcoxon signed-rank test of `a − b` on `metric`, pairing rows by
/// (patient, view, instant, structure). Both tables must hold the same keys.
pub fn compare_methods(
    a: &[CaseRow],
    b: &[CaseRow],
    metric: Metric,
    pooling: Pooling,
) -> Result<Comparison> {
    let (ia, ib) = (index(a, "a")?, index(b, "b")?);
    let mut unmatched: Vec<String> = ia
        .keys()
        .filter(|k| !ib.contains_key(*k))
        .map(|k| format!("{k} (only in a)"))
        .collect();
    unmatched.extend(
        ib.keys()
            .filter(|k| !ia.contains_key(*k))
            .map(|k| format!("{k} (only in b)")),
    );
    if !unmatched.is_empty() {
        return Err(Error::KeyMismatch(unmatched));
    }

    type GroupKey = (Option<StructureId>, Option<Instant>);
    let mut groups: BTreeMap<GroupKey, (Vec<f64>, Vec<f64>, usize)> = BTreeMap::new();
    for (key, ra) in &ia {
        let rb = ib[key];
        let group = match pooling {
            Pooling::Pooled => (None, None),
            Pooling::ByStructureAndInstant => (Some(ra.structure), Some(ra.instant)),
        };
        let entry = groups.entry(group).or_default();
        match (metric.value(ra), metric.value(rb)) {
            (Some(x), Some(y)) => {
                entry.0.push(x);
                entry.1.push(y);
            }
            _ => entry.2 += 1,
        }
    }
    if groups.is_empty() {
        return Err(Error::Empty("no case rows to compare"));
    }

    let mut out = Vec::new();
    for ((structure, instant), (x, y, skipped)) in groups {
        if x.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no pairs with a {metric} value on both sides{}",
                match (structure, instant) {
                    (Some(s), Some(i)) => format!(" for {s} at {i}"),
                    _ => String::new(),
                }
            )));
        }
        out.push(ComparisonGroup {
            structure,
            instant,
            n_pairs: x.len(),
            n_skipped: skipped,
            result: wilcoxon_signed_rank(&x, &y)?,
        });
    }
    Ok(Comparison {
        metric,
        pooling,
        groups: out,
    })
}
