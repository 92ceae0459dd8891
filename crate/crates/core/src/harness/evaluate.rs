//! Batch scoring of a submission directory against reference masks.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::outlier::{classify_outlier_with, OutlierMode, OutlierRule};
use crate::clinical::{
    annotation_contour, clinical_scores, BiplaneCase, ClinicalScores, AXIS_CONSTRUCTION,
    DEFAULT_DISCS,
};
use crate::error::{Error, Result};
use crate::geometry::{Contour, StructureId};
use crate::io::{read_label_mask, CaseKey, Instant, LabelMask, PatientCase, Quality, View};
use crate::metrics::{reference_contour, score_case, FailureReason, ScoreOptions, StructureScore};
use crate::stats::{agreement, mean, population_std, AgreementStats};
use crate::ENGINE_VERSION;

/// Structures whose distances decide whether an image is an outlier.
pub const OUTLIER_STRUCTURES: [StructureId; 2] = [StructureId::LvEndo, StructureId::LvEpi];

pub const PREDICTION_POSTPROCESSED: &str = "largest 4-connected component, 8-connected hole fill";
pub const PREDICTION_RAW: &str = "raw";
pub const REFERENCE_VARIANT: &str = "as-is";

/// Cohort restriction; `None` keeps everything along that axis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    pub quality: Option<BTreeSet<Quality>>,
    pub folds: Option<BTreeSet<u32>>,
    pub views: Option<BTreeSet<View>>,
    pub instants: Option<BTreeSet<Instant>>,
}

impl Filters {
    /// Rows kept by the filters, sorted by case key. Quality is judged per
    /// patient, as the worst quality among the patient's rows.
    pub fn apply(&self, cases: &[PatientCase]) -> Result<Vec<PatientCase>> {
        let mut worst: BTreeMap<&str, Quality> = BTreeMap::new();
        for c in cases {
            let q = worst.entry(&c.patient_id).or_insert(c.quality);
            *q = (*q).max(c.quality);
        }
        let mut kept = Vec::new();
        for c in cases {
            if let Some(qs) = &self.quality {
                if !qs.contains(&worst[c.patient_id.as_str()]) {
                    continue;
                }
            }
            if let Some(folds) = &self.folds {
                let fold = c.fold.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "fold filter given but case {} has no fold",
                        c.key()
                    ))
                })?;
                if !folds.contains(&fold) {
                    continue;
                }
            }
            if self.views.as_ref().is_some_and(|v| !v.contains(&c.view)) {
                continue;
            }
            if self
                .instants
                .as_ref()
                .is_some_and(|i| !i.contains(&c.instant))
            {
                continue;
            }
            kept.push(c.clone());
        }
        kept.sort_by_key(|c| c.key());
        Ok(kept)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub postprocess: bool,
    /// Worker threads; 0 picks the number of CPUs. Never affects output.
    pub workers: usize,
    pub rule: OutlierRule,
    pub mode: OutlierMode,
    pub discs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            postprocess: true,
            workers: 0,
            rule: OutlierRule::default(),
            mode: OutlierMode::Or,
            discs: DEFAULT_DISCS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureResult {
    pub structure: StructureId,
    pub score: StructureScore,
}

/// A structure left out because its reference region is empty or untraceable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedStructure {
    pub structure: StructureId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub patient_id: String,
    pub view: View,
    pub instant: Instant,
    pub quality: Quality,
    pub structures: Vec<StructureResult>,
    pub excluded: Vec<ExcludedStructure>,
    pub outlier: bool,
}

impl CaseResult {
    pub fn key(&self) -> CaseKey {
        CaseKey {
            patient_id: self.patient_id.clone(),
            view: self.view,
            instant: self.instant,
        }
    }

    pub fn score(&self, structure: StructureId) -> Option<&StructureScore> {
        self.structures
            .iter()
            .find(|s| s.structure == structure)
            .map(|s| &s.score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        (!values.is_empty()).then(|| Self {
            mean: mean(values),
            std: population_std(values),
        })
    }
}

/// Scores of one structure at one instant over the cohort. Means cover
/// successfully scored cases only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationAggregate {
    pub structure: StructureId,
    pub instant: Instant,
    pub n_cases: usize,
    pub n_scored: usize,
    pub n_failed: usize,
    pub n_excluded: usize,
    pub dice: Option<MeanStd>,
    pub d_m: Option<MeanStd>,
    pub d_h: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedStructure {
    pub case: String,
    pub structure: StructureId,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientClinical {
    pub patient_id: String,
    pub reference: ClinicalScores,
    pub prediction: ClinicalScores,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalFailure {
    pub patient_id: String,
    pub reason: String,
}

/// Agreement of predicted against reference EDV (ml), ESV (ml) and EF (%).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalSummary {
    /// Patients with scored indices on both sides.
    pub n_patients: usize,
    /// Patients lacking one of the four LV_endo images after filtering.
    pub n_incomplete: usize,
    pub edv: Option<AgreementStats>,
    pub esv: Option<AgreementStats>,
    pub ef: Option<AgreementStats>,
    pub patients: Vec<PatientClinical>,
    pub failed: Vec<ClinicalFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSummary {
    pub n_cases: usize,
    pub n_outliers: usize,
    /// Fraction of cases, `None` for an empty cohort.
    pub rate: Option<f64>,
    pub cases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortDescriptor {
    pub quality: Option<Vec<Quality>>,
    pub folds: Option<Vec<u32>>,
    pub views: Option<Vec<View>>,
    pub instants: Option<Vec<Instant>>,
    pub n_patients: usize,
    pub n_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub engine_version: String,
    pub postprocess: bool,
    pub prediction_variant: String,
    pub reference_variant: String,
    pub discs: usize,
    pub axis_construction: String,
    pub outlier_rule: OutlierRule,
    pub outlier_mode: OutlierMode,
    pub outlier_structures: Vec<StructureId>,
    pub cohort: CohortDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub metadata: ReportMetadata,
    pub segmentation: Vec<SegmentationAggregate>,
    pub clinical: ClinicalSummary,
    pub outliers: OutlierSummary,
    pub failed: Vec<FailedStructure>,
    pub cases: Vec<CaseResult>,
}

/// Image's path inside a submission or reference directory.
pub fn case_path(dir: &Path, key: &CaseKey) -> PathBuf {
    dir.join(format!("{}.mhd", key.file_stem()))
}

struct CaseOutput {
    result: CaseResult,
    reference_lv: std::result::Result<Contour, String>,
    prediction_lv: std::result::Result<Contour, String>,
}

/// Scores every filtered case and aggregates the cohort.
///
/// A missing or unreadable reference is an error. A missing or invalid
/// prediction is recorded as a failure for every structure of the case.
/// The report depends only on the inputs, never on `options.workers`.
pub fn evaluate_submission(
    pred_dir: &Path,
    ref_dir: &Path,
    manifest: &[PatientCase],
    filters: &Filters,
    options: &EvalOptions,
) -> Result<MethodReport> {
    let cases = filters.apply(manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let outputs: Vec<Result<CaseOutput>> = pool.install(|| {
        cases
            .par_iter()
            .map(|c| score_one(c, pred_dir, ref_dir, options))
            .collect()
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;

    let segmentation = aggregate_segmentation(&outputs);
    let clinical = aggregate_clinical(&outputs, options.discs);
    let outlier_cases: Vec<String> = outputs
        .iter()
        .filter(|o| o.result.outlier)
        .map(|o| o.result.key().to_string())
        .collect();
    let outliers = OutlierSummary {
        n_cases: outputs.len(),
        n_outliers: outlier_cases.len(),
        rate: (!outputs.is_empty()).then(|| outlier_cases.len() as f64 / outputs.len() as f64),
        cases: outlier_cases,
    };
    let failed = outputs
        .iter()
        .flat_map(|o| {
            let case = o.result.key().to_string();
            o.result
                .structures
                .iter()
                .filter_map(move |s| match &s.score {
                    StructureScore::Failed { reason, .. } => Some(FailedStructure {
                        case: case.clone(),
                        structure: s.structure,
                        reason: reason.clone(),
                    }),
                    StructureScore::Scored(_) => None,
                })
        })
        .collect();

    let patients: BTreeSet<&str> = cases.iter().map(|c| c.patient_id.as_str()).collect();
    let metadata = ReportMetadata {
        engine_version: ENGINE_VERSION.to_string(),
        postprocess: options.postprocess,
        prediction_variant: if options.postprocess {
            PREDICTION_POSTPROCESSED
        } else {
            PREDICTION_RAW
        }
        .to_string(),
        reference_variant: REFERENCE_VARIANT.to_string(),
        discs: options.discs,
        axis_construction: AXIS_CONSTRUCTION.to_string(),
        outlier_rule: options.rule,
        outlier_mode: options.mode,
        outlier_structures: OUTLIER_STRUCTURES.to_vec(),
        cohort: CohortDescriptor {
            quality: filters
                .quality
                .as_ref()
                .map(|s| s.iter().copied().collect()),
            folds: filters.folds.as_ref().map(|s| s.iter().copied().collect()),
            views: filters.views.as_ref().map(|s| s.iter().copied().collect()),
            instants: filters
                .instants
                .as_ref()
                .map(|s| s.iter().copied().collect()),
            n_patients: patients.len(),
            n_cases: cases.len(),
        },
    };

    Ok(MethodReport {
        metadata,
        segmentation,
        clinical,
        outliers,
        failed,
        cases: outputs.into_iter().map(|o| o.result).collect(),
    })
}

fn score_one(
    case: &PatientCase,
    pred_dir: &Path,
    ref_dir: &Path,
    options: &EvalOptions,
) -> Result<CaseOutput> {
    let key = case.key();
    let ref_path = case_path(ref_dir, &key);
    if !ref_path.is_file() {
        return Err(Error::MissingReference(ref_path.display().to_string()));
    }
    let reference = read_label_mask(&ref_path)?;
    let prediction = load_prediction(&case_path(pred_dir, &key), &reference);

    let score_options = ScoreOptions {
        postprocess: options.postprocess,
    };
    let mut structures = Vec::new();
    let mut excluded = Vec::new();
    for structure in StructureId::ALL {
        let outcome = match &prediction {
            Ok(pred) => score_case(pred, &reference, structure, score_options),
            Err(reason) => {
                reference_contour(&reference, structure).map(|_| StructureScore::Failed {
                    dice: 0.0,
                    reason: reason.clone(),
                })
            }
        };
        match outcome {
            Ok(score) => structures.push(StructureResult { structure, score }),
            // Every remaining error stems from the reference region.
            Err(e) => excluded.push(ExcludedStructure {
                structure,
                reason: e.to_string(),
            }),
        }
    }

    let outlier = structures
        .iter()
        .filter(|s| OUTLIER_STRUCTURES.contains(&s.structure))
        .any(|s| match &s.score {
            StructureScore::Scored(g) => {
                classify_outlier_with(g, case.instant, &options.rule, options.mode)
            }
            StructureScore::Failed { .. } => true,
        });

    let reference_lv = annotation_contour(&reference, false)
        .map(|(c, _)| c)
        .map_err(|e| format!("reference: {e}"));
    let prediction_lv = match &prediction {
        Ok(pred) => annotation_contour(pred, options.postprocess)
            .map(|(c, _)| c)
            .map_err(|e| format!("prediction: {e}")),
        Err(reason) => Err(format!("prediction: {}", failure_text(reason))),
    };

    Ok(CaseOutput {
        result: CaseResult {
            patient_id: case.patient_id.clone(),
            view: case.view,
            instant: case.instant,
            quality: case.quality,
            structures,
            excluded,
            outlier,
        },
        reference_lv,
        prediction_lv,
    })
}

fn load_prediction(
    path: &Path,
    reference: &LabelMask,
) -> std::result::Result<LabelMask, FailureReason> {
    if !path.is_file() {
        return Err(FailureReason::MissingPrediction);
    }
    let pred =
        read_label_mask(path).map_err(|e| FailureReason::InvalidPrediction(e.to_string()))?;
    if !pred.same_grid(reference) {
        return Err(FailureReason::InvalidPrediction(format!(
            "grid {}x{} @ {:?} differs from reference {}x{} @ {:?}",
            pred.width(),
            pred.height(),
            pred.spacing(),
            reference.width(),
            reference.height(),
            reference.spacing()
        )));
    }
    Ok(pred)
}

fn failure_text(reason: &FailureReason) -> String {
    match reason {
        FailureReason::MissingPrediction => "missing".into(),
        FailureReason::InvalidPrediction(msg) => format!("invalid: {msg}"),
        FailureReason::EmptyPrediction => "empty".into(),
        FailureReason::DegeneratePrediction => "degenerate".into(),
    }
}

fn aggregate_segmentation(outputs: &[CaseOutput]) -> Vec<SegmentationAggregate> {
    let mut out = Vec::new();
    for structure in StructureId::ALL {
        for instant in Instant::ALL {
            let at_instant: Vec<&CaseResult> = outputs
                .iter()
                .map(|o| &o.result)
                .filter(|r| r.instant == instant)
                .collect();
            let (mut dice, mut d_m, mut d_h) = (Vec::new(), Vec::new(), Vec::new());
            let (mut n_failed, mut n_excluded) = (0, 0);
            for r in &at_instant {
                match r.score(structure) {
                    Some(StructureScore::Scored(g)) => {
                        dice.push(g.dice);
                        d_m.push(g.d_m);
                        d_h.push(g.d_h);
                    }
                    Some(StructureScore::Failed { .. }) => n_failed += 1,
                    None => n_excluded += 1,
                }
            }
            out.push(SegmentationAggregate {
                structure,
                instant,
                n_cases: at_instant.len(),
                n_scored: dice.len(),
                n_failed,
                n_excluded,
                dice: MeanStd::of(&dice),
                d_m: MeanStd::of(&d_m),
                d_h: MeanStd::of(&d_h),
            });
        }
    }
    out
}

fn aggregate_clinical(outputs: &[CaseOutput], discs: usize) -> ClinicalSummary {
    let mut by_patient: BTreeMap<&str, BTreeMap<(View, Instant), &CaseOutput>> = BTreeMap::new();
    for o in outputs {
        by_patient
            .entry(&o.result.patient_id)
            .or_default()
            .insert((o.result.view, o.result.instant), o);
    }

    let mut patients = Vec::new();
    let mut failed = Vec::new();
    let mut n_incomplete = 0;
    for (patient_id, images) in by_patient {
        let get = |v, i| images.get(&(v, i)).copied();
        let (Some(ed2), Some(ed4), Some(es2), Some(es4)) = (
            get(View::TwoChamber, Instant::ED),
            get(View::FourChamber, Instant::ED),
            get(View::TwoChamber, Instant::ES),
            get(View::FourChamber, Instant::ES),
        ) else {
            n_incomplete += 1;
            continue;
        };
        let side = |pick: fn(&CaseOutput) -> &std::result::Result<Contour, String>| {
            let biplane = |two: &CaseOutput,
                           four: &CaseOutput,
                           instant|
             -> std::result::Result<BiplaneCase, String> {
                Ok(BiplaneCase {
                    contour_2ch: pick(two).clone()?,
                    contour_4ch: pick(four).clone()?,
                    instant,
                })
            };
            let ed = biplane(ed2, ed4, Instant::ED)?;
            let es = biplane(es2, es4, Instant::ES)?;
            clinical_scores(&ed, &es, discs).map_err(|e| e.to_string())
        };
        let reference = side(|o| &o.reference_lv).map_err(|e| {
            if e.starts_with("reference") {
                e
            } else {
                format!("reference: {e}")
            }
        });
        let prediction = side(|o| &o.prediction_lv).map_err(|e| {
            if e.starts_with("prediction") {
                e
            } else {
                format!("prediction: {e}")
            }
        });
        match (reference, prediction) {
            (Ok(reference), Ok(prediction)) => patients.push(PatientClinical {
                patient_id: patient_id.to_string(),
                reference,
                prediction,
            }),
            (Err(reason), _) | (_, Err(reason)) => failed.push(ClinicalFailure {
                patient_id: patient_id.to_string(),
                reason,
            }),
        }
    }

    let series = |f: fn(&ClinicalScores) -> f64| -> Option<AgreementStats> {
        let user: Vec<f64> = patients.iter().map(|p| f(&p.prediction)).collect();
        let reference: Vec<f64> = patients.iter().map(|p| f(&p.reference)).collect();
        agreement(&user, &reference).ok()
    };
    ClinicalSummary {
        n_patients: patients.len(),
        n_incomplete,
        edv: series(|c| c.edv),
        esv: series(|c| c.esv),
        ef: series(|c| c.ef),
        patients,
        failed,
    }
}
