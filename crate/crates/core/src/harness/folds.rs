//! Cross-validation folds stratified by image quality and EF group.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{EfGroup, PatientCase, Quality};

/// Stratification tags of one patient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientStrata {
    pub patient_id: String,
    pub quality: Quality,
    pub ef_group: EfGroup,
}

/// Collapses manifest rows to one entry per patient, sorted by id.
///
/// A patient's quality is the worst quality among its rows. All rows of a
/// patient must agree on the EF group.
pub fn patient_strata(cases: &[PatientCase]) -> Result<Vec<PatientStrata>> {
    let mut by_patient: BTreeMap<&str, PatientStrata> = BTreeMap::new();
    for case in cases {
        match by_patient.get_mut(case.patient_id.as_str()) {
            None => {
                by_patient.insert(
                    &case.patient_id,
                    PatientStrata {
                        patient_id: case.patient_id.clone(),
                        quality: case.quality,
                        ef_group: case.ef_group,
                    },
                );
            }
            Some(entry) => {
                if entry.ef_group != case.ef_group {
                    return Err(Error::InvalidArgument(format!(
                        "patient {} has conflicting ef_group values {} and {}",
                        case.patient_id, entry.ef_group, case.ef_group
                    )));
                }
                entry.quality = entry.quality.max(case.quality);
            }
        }
    }
    Ok(by_patient.into_values().collect())
}

/// Patient → fold index in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    k: u32,
    folds: BTreeMap<String, u32>,
}

impl FoldAssignment {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn fold_of(&self, patient_id: &str) -> Option<u32> {
        self.folds.get(patient_id).copied()
    }

    /// `(patient_id, fold)` in patient order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.folds.iter().map(|(p, f)| (p.as_str(), *f))
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k as usize];
        for f in self.folds.values() {
            sizes[*f as usize - 1] += 1;
        }
        sizes
    }

    /// `patient_id,fold` rows sorted by patient id.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("patient_id,fold\n");
        for (p, f) in self.iter() {
            out.push_str(&format!("{p},{f}\n"));
        }
        out
    }

    /// Copies fold indices onto manifest rows.
    pub fn apply(&self, cases: &mut [PatientCase]) {
        for case in cases {
            case.fold = self.fold_of(&case.patient_id);
        }
    }
}

/// Assigns patients to `k` folds of sizes differing by at most one.
///
/// Patients are grouped into (quality, EF group) cells and shuffled within
/// each cell by a ChaCha8 stream seeded with `seed`. Cells are then dealt in
/// order; each patient goes to the fold that currently holds the fewest
/// patients of its quality plus its EF group, with ties broken by fold size
/// and then fold index. This keeps both marginal distributions balanced,
/// which a plain per-cell round-robin does not guarantee.
pub fn make_folds(cases: &[PatientCase], k: usize, seed: u64) -> Result<FoldAssignment> {
    let patients = patient_strata(cases)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > patients.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of patients ({})",
            patients.len()
        )));
    }

    let mut cells: BTreeMap<(Quality, EfGroup), Vec<&PatientStrata>> = BTreeMap::new();
    for p in &patients {
        cells.entry((p.quality, p.ef_group)).or_default().push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for members in cells.values_mut() {
        members.shuffle(&mut rng);
    }

    let base = patients.len() / k;
    let mut larger_left = patients.len() % k;
    let mut size = vec![0usize; k];
    let mut by_quality = vec![[0usize; 3]; k];
    let mut by_ef = vec![[0usize; 3]; k];
    let mut folds = BTreeMap::new();

    for ((quality, ef), members) in &cells {
        let (qi, ei) = (quality_index(*quality), ef_index(*ef));
        for p in members {
            let fold = (0..k)
                .filter(|&f| size[f] < base || (size[f] == base && larger_left > 0))
                .min_by_key(|&f| (by_quality[f][qi] + by_ef[f][ei], size[f], f))
                .expect("total capacity equals the number of patients");
            if size[fold] == base {
                larger_left -= 1;
            }
            size[fold] += 1;
            by_quality[fold][qi] += 1;
            by_ef[fold][ei] += 1;
            folds.insert(p.patient_id.clone(), fold as u32 + 1);
        }
    }
    Ok(FoldAssignment { k: k as u32, folds })
}

fn quality_index(q: Quality) -> usize {
    match q {
        Quality::Good => 0,
        Quality::Medium => 1,
        Quality::Poor => 2,
    }
}

fn ef_index(e: EfGroup) -> usize {
    match e {
        EfGroup::AtMost45 => 0,
        EfGroup::AtLeast55 => 1,
        EfGroup::Between => 2,
    }
}

/// Largest absolute gap, in percentage points, between a fold's share and
/// the global share of any quality level or EF group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldBalance {
    pub max_quality_gap: f64,
    pub max_ef_gap: f64,
}

pub fn fold_balance(
    patients: &[PatientStrata],
    assignment: &FoldAssignment,
) -> Result<FoldBalance> {
    let k = assignment.k() as usize;
    let mut size = vec![0usize; k];
    let mut by_quality = vec![[0usize; 3]; k];
    let mut by_ef = vec![[0usize; 3]; k];
    let (mut q_total, mut e_total) = ([0usize; 3], [0usize; 3]);
    for p in patients {
        let fold = assignment.fold_of(&p.patient_id).ok_or_else(|| {
            Error::InvalidArgument(format!("patient {} has no fold", p.patient_id))
        })? as usize
            - 1;
        let (qi, ei) = (quality_index(p.quality), ef_index(p.ef_group));
        size[fold] += 1;
        by_quality[fold][qi] += 1;
        by_ef[fold][ei] += 1;
        q_total[qi] += 1;
        e_total[ei] += 1;
    }
    let n = patients.len() as f64;
    let gap = |counts: &[[usize; 3]], totals: [usize; 3]| {
        let mut worst = 0.0f64;
        for (f, row) in counts.iter().enumerate() {
            if size[f] == 0 {
                continue;
            }
            for g in 0..3 {
                let share = 100.0 * row[g] as f64 / size[f] as f64;
                let global = 100.0 * totals[g] as f64 / n;
                worst = worst.max((share - global).abs());
            }
        }
        worst
    };
    Ok(FoldBalance {
        max_quality_gap: gap(&by_quality, q_total),
        max_ef_gap: gap(&by_ef, e_total),
    })
}
