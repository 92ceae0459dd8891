//! Geometric agreement between a predicted and a reference structure: Dice
//! overlap on pixel regions, and mean / Hausdorff surface distances on traced
//! contours in mm.
//!
//! Distances are measured from each vertex of one contour to the nearest
//! point of the other contour's closed polyline (point-to-segment), so the
//! result does not depend on how densely the target contour is sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    keep_largest_fill_holes, largest_component, region_of, trace_contour, BinaryMask, Contour,
    Point, StructureId,
};
use crate::io::LabelMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricScores {
    pub dice: f64,
    /// Mean absolute distance, mm.
    pub d_m: f64,
    /// Hausdorff distance, mm.
    pub d_h: f64,
}

/// `2|a∩b| / (|a|+|b|)`; two empty masks agree perfectly (1.0).
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (mut inter, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        na += x as usize;
        nb += y as usize;
        inter += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (na + nb) as f64)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dz) = (b.x - a.x, b.z - a.z);
    let len2 = dx * dx + dz * dz;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.z - a.z) * dz) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.z + t * dz))
}

/// Distance from `p` to the nearest point of `contour`'s polyline.
pub fn distance_to_contour(p: Point, contour: &Contour) -> f64 {
    contour
        .segments()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

fn directed_distances<'a>(from: &'a Contour, to: &'a Contour) -> impl Iterator<Item = f64> + 'a {
    from.points()
        .iter()
        .map(move |&p| distance_to_contour(p, to))
}

/// Mean over the vertices of `a` of their distance to `b`.
pub fn directed_avg_distance(a: &Contour, b: &Contour) -> f64 {
    directed_distances(a, b).sum::<f64>() / a.len() as f64
}

/// Largest distance from a vertex of `a` to `b`.
pub fn directed_max_distance(a: &Contour, b: &Contour) -> f64 {
    directed_distances(a, b).fold(0.0, f64::max)
}

/// Average of the two directed mean distances.
pub fn mean_absolute_distance(a: &Contour, b: &Contour) -> f64 {
    (directed_avg_distance(a, b) + directed_avg_distance(b, a)) / 2.0
}

pub fn hausdorff(a: &Contour, b: &Contour) -> f64 {
    directed_max_distance(a, b).max(directed_max_distance(b, a))
}

/// Why a prediction could not be scored with distances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// No prediction file for the case.
    MissingPrediction,
    /// Prediction file present but unreadable or invalid.
    InvalidPrediction(String),
    /// The structure's region is empty in the prediction.
    EmptyPrediction,
    /// Region too small to trace a contour.
    DegeneratePrediction,
}

/// Outcome of scoring one structure of one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StructureScore {
    Scored(GeometricScores),
    /// Distances undefined; `dice` still reports the overlap (0 for empty).
    Failed {
        dice: f64,
        reason: FailureReason,
    },
}

impl StructureScore {
    pub fn scores(&self) -> Option<&GeometricScores> {
        match self {
            StructureScore::Scored(s) => Some(s),
            StructureScore::Failed { .. } => None,
        }
    }

    pub fn dice(&self) -> f64 {
        match self {
            StructureScore::Scored(s) => s.dice,
            StructureScore::Failed { dice, .. } => *dice,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, StructureScore::Failed { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// Keep the largest component and fill holes in the prediction.
    pub postprocess: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { postprocess: true }
    }
}

/// Contour of a reference structure: outer boundary of its largest component.
pub fn reference_contour(reference: &LabelMask, structure: StructureId) -> Result<Contour> {
    let region = region_of(reference, structure);
    trace_contour(&keep_largest_fill_holes(&region), reference.spacing())
}

/// Scores one structure of a prediction against its reference.
///
/// Dice uses the (optionally post-processed) prediction region against the
/// reference region as given; distances use the outer contours of the
/// largest components. An empty reference region is an error; an empty or
/// untraceable prediction is reported as [`StructureScore::Failed`].
pub fn score_case(
    pred: &LabelMask,
    reference: &LabelMask,
    structure: StructureId,
    options: ScoreOptions,
) -> Result<StructureScore> {
    if !pred.same_grid(reference) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} @ {:?} vs reference {}x{} @ {:?}",
            pred.width(),
            pred.height(),
            pred.spacing(),
            reference.width(),
            reference.height(),
            reference.spacing()
        )));
    }
    let ref_region = region_of(reference, structure);
    if ref_region.is_empty() {
        return Err(Error::MissingReference(format!(
            "{structure} region is empty"
        )));
    }
    let ref_contour = trace_contour(&keep_largest_fill_holes(&ref_region), reference.spacing())?;

    let mut pred_region = region_of(pred, structure);
    if options.postprocess {
        pred_region = keep_largest_fill_holes(&pred_region);
    }
    let overlap = dice(&pred_region, &ref_region)?;
    if pred_region.is_empty() {
        return Ok(StructureScore::Failed {
            dice: overlap,
            reason: FailureReason::EmptyPrediction,
        });
    }
    let pred_contour = match trace_contour(&largest_component(&pred_region), pred.spacing()) {
        Ok(c) => c,
        Err(Error::DegenerateRegion { .. }) => {
            return Ok(StructureScore::Failed {
                dice: overlap,
                reason: FailureReason::DegeneratePrediction,
            })
        }
        Err(e) => return Err(e),
    };
    Ok(StructureScore::Scored(GeometricScores {
        dice: overlap,
        d_m: mean_absolute_distance(&pred_contour, &ref_contour),
        d_h: hausdorff(&pred_contour, &ref_contour),
    }))
}
