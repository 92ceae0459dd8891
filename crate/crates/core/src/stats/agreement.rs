use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier for the 95 % limits of agreement.
pub const LOA_MULTIPLIER: f64 = 1.96;

/// Agreement between a method's values and the reference.
///
/// `std` is the population (1/n) standard deviation of the differences.
/// `mae >= |bias|` always holds but is not relied upon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub n: usize,
    /// Pearson coefficient; `None` when either series is constant or n < 2.
    pub corr: Option<f64>,
    pub bias: f64,
    pub std: f64,
    pub mae: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

impl AgreementStats {
    pub fn correlation(&self) -> Result<f64> {
        self.corr.ok_or(Error::UndefinedCorrelation)
    }
}

fn check_pairs(user: &[f64], reference: &[f64]) -> Result<()> {
    if user.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: user.len(),
            right: reference.len(),
        });
    }
    if user.is_empty() {
        return Err(Error::Empty("agreement needs at least one pair"));
    }
    Ok(())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Pearson correlation; `None` for fewer than two points or a constant series.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn agreement(user: &[f64], reference: &[f64]) -> Result<AgreementStats> {
    check_pairs(user, reference)?;
    let diffs: Vec<f64> = user.iter().zip(reference).map(|(u, r)| u - r).collect();
    let bias = mean(&diffs);
    let std = population_std(&diffs);
    let mae = diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64;
    Ok(AgreementStats {
        n: diffs.len(),
        corr: pearson(user, reference),
        bias,
        std,
        mae,
        loa_low: bias - LOA_MULTIPLIER * std,
        loa_high: bias + LOA_MULTIPLIER * std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    /// `(mean, difference)` per pair, in input order.
    pub points: Vec<(f64, f64)>,
    pub stats: AgreementStats,
}

impl BlandAltman {
    /// `mean,difference` header and one row per pair; no summary rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mean,difference\n");
        for (m, d) in &self.points {
            out.push_str(&format!("{m},{d}\n"));
        }
        out
    }
}

pub fn bland_altman(user: &[f64], reference: &[f64]) -> Result<BlandAltman> {
    let stats = agreement(user, reference)?;
    let points = user
        .iter()
        .zip(reference)
        .map(|(u, r)| ((u + r) / 2.0, u - r))
        .collect();
    Ok(BlandAltman { points, stats })
}
