//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped before ranking; tied absolute differences
//! share their mid-rank. Up to [`EXACT_MAX_N`] non-zero differences the
//! two-sided p-value comes from the exact null distribution of `W+` over all
//! `2^n` sign assignments (tallied by subset-sum counting on doubled ranks,
//! which keeps mid-ranks integral). Larger samples use the normal
//! approximation with tie-corrected variance and a 0.5 continuity correction.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 25;

/// Largest sample the exact path accepts when forced.
const EXACT_HARD_LIMIT: usize = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Exact up to [`EXACT_MAX_N`], normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences `x − y`.
    pub w_plus: f64,
    pub n_effective: usize,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(x, y, MethodChoice::Auto)
}

pub fn wilcoxon_signed_rank_with(
    x: &[f64],
    y: &[f64],
    choice: MethodChoice,
) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Empty("signed-rank test needs at least one pair"));
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(Error::InvalidArgument("NaN in paired samples".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            n_effective: 0,
            p_value: 1.0,
            method: WilcoxonMethod::Exact,
        });
    }

    let ranked = DoubledRanks::new(&diffs);
    let w2_plus: u64 = ranked
        .doubled
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();
    let w_plus = w2_plus as f64 / 2.0;

    let exact = match choice {
        MethodChoice::Auto => n <= EXACT_MAX_N,
        MethodChoice::Exact => {
            if n > EXACT_HARD_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "exact signed-rank test limited to {EXACT_HARD_LIMIT} differences, got {n}"
                )));
            }
            true
        }
        MethodChoice::Normal => false,
    };

    let (p_value, method) = if exact {
        (exact_p(&ranked.doubled, w2_plus), WilcoxonMethod::Exact)
    } else {
        (
            normal_p(n, w_plus, &ranked.tie_sizes),
            WilcoxonMethod::NormalApproximation,
        )
    };
    Ok(WilcoxonResult {
        w_plus,
        n_effective: n,
        p_value,
        method,
    })
}

/// Twice the mid-ranks of `|d|`, plus the sizes of tie groups.
struct DoubledRanks {
    doubled: Vec<u64>,
    tie_sizes: Vec<usize>,
}

impl DoubledRanks {
    fn new(diffs: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..diffs.len()).collect();
        order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
        let mut doubled = vec![0u64; diffs.len()];
        let mut tie_sizes = Vec::new();
        let mut start = 0;
        while start < order.len() {
            let value = diffs[order[start]].abs();
            let mut end = start + 1;
            while end < order.len() && diffs[order[end]].abs() == value {
                end += 1;
            }
            // positions start+1 ..= end share rank (start+1+end)/2
            let twice_mid = (start + 1 + end) as u64;
            for &i in &order[start..end] {
                doubled[i] = twice_mid;
            }
            tie_sizes.push(end - start);
            start = end;
        }
        Self { doubled, tie_sizes }
    }
}

fn exact_p(doubled: &[u64], observed: u64) -> f64 {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = observed as usize;
    let lower: u64 = counts[..=observed].iter().sum();
    let upper: u64 = counts[observed..].iter().sum();
    let assignments = (doubled.len() as f64).exp2();
    (2.0 * lower.min(upper) as f64 / assignments).min(1.0)
}

fn normal_p(n: usize, w_plus: f64, tie_sizes: &[usize]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
