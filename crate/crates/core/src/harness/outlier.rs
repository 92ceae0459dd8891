//! Classification of segmentations falling outside inter-observer variability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Instant;
use crate::metrics::GeometricScores;

/// Distance thresholds in mm; a value must exceed a threshold to fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierRule {
    pub dm_max_ed: f64,
    pub dm_max_es: f64,
    pub dh_max_ed: f64,
    pub dh_max_es: f64,
}

impl Default for OutlierRule {
    fn default() -> Self {
        Self {
            dm_max_ed: 3.5,
            dm_max_es: 4.0,
            dh_max_ed: 8.2,
            dh_max_es: 8.8,
        }
    }
}

impl OutlierRule {
    pub fn new(dm_max_ed: f64, dm_max_es: f64, dh_max_ed: f64, dh_max_es: f64) -> Result<Self> {
        let rule = Self {
            dm_max_ed,
            dm_max_es,
            dh_max_ed,
            dh_max_es,
        };
        if [dm_max_ed, dm_max_es, dh_max_ed, dh_max_es]
            .iter()
            .any(|t| !(t.is_finite() && *t > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "outlier thresholds must be positive: {rule:?}"
            )));
        }
        Ok(rule)
    }

    pub fn dm_max(&self, instant: Instant) -> f64 {
        match instant {
            Instant::ED => self.dm_max_ed,
            Instant::ES => self.dm_max_es,
        }
    }

    pub fn dh_max(&self, instant: Instant) -> f64 {
        match instant {
            Instant::ED => self.dh_max_ed,
            Instant::ES => self.dh_max_es,
        }
    }
}

/// How the d_m and d_H tests combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierMode {
    #[default]
    Or,
    And,
}

/// `d_m > dm_max(instant) || d_H > dh_max(instant)`.
pub fn classify_outlier(scores: &GeometricScores, instant: Instant, rule: &OutlierRule) -> bool {
    classify_outlier_with(scores, instant, rule, OutlierMode::Or)
}

pub fn classify_outlier_with(
    scores: &GeometricScores,
    instant: Instant,
    rule: &OutlierRule,
    mode: OutlierMode,
) -> bool {
    let dm = scores.d_m > rule.dm_max(instant);
    let dh = scores.d_h > rule.dh_max(instant);
    match mode {
        OutlierMode::Or => dm || dh,
        OutlierMode::And => dm && dh,
    }
}
