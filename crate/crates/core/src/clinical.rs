//! LV volumes by the biplane method of discs, and ejection fraction.
//!
//! Each LV contour is expected to carry the mitral plane as its longest
//! edge: an open endocardial annotation closed by the chord between its two
//! basal end points. [`annotation_contour`] produces such contours from
//! label masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    contour_from_pixels, keep_largest_fill_holes, largest_component, region_of,
    trace_boundary_pixels, Contour, Point, StructureId,
};
use crate::io::{Instant, LabelMask};

pub const DEFAULT_DISCS: usize = 20;

/// Version tag of the axis/base construction, recorded in reports.
pub const AXIS_CONSTRUCTION: &str = "longest-edge-base/farthest-apex/midpoint-levels v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongAxis {
    pub base_mid: Point,
    pub apex: Point,
    /// mm
    pub length: f64,
    /// Chord lengths perpendicular to the axis at levels `(i - 0.5)/N · length`.
    pub diameters: Vec<f64>,
    /// Set when some level line missed the contour or crossed it more than
    /// twice (non-star-shaped contour).
    pub irregular: bool,
}

/// Extracts the long axis and `discs` perpendicular diameters.
///
/// The base is the midpoint of the contour's longest edge (the closing edge
/// is included even for open contours), the apex the vertex farthest from
/// it. A level line crossing the contour several times contributes the total
/// length of its inside spans.
pub fn long_axis(contour: &Contour, discs: usize) -> Result<LongAxis> {
    if discs == 0 {
        return Err(Error::InvalidArgument("disc count must be positive".into()));
    }
    let pts = contour.points();
    let n = pts.len();
    let mut base = (pts[n - 1], pts[0]);
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let len = a.distance(b);
        if len > best {
            best = len;
            base = (a, b);
        }
    }
    let base_mid = Point::new((base.0.x + base.1.x) / 2.0, (base.0.z + base.1.z) / 2.0);
    let mut apex = pts[0];
    let mut length = f64::NEG_INFINITY;
    for &p in pts {
        let d = p.distance(base_mid);
        if d > length {
            length = d;
            apex = p;
        }
    }
    if !(length > 0.0) {
        return Err(Error::DegenerateContour("zero-length long axis".into()));
    }

    let (ux, uz) = (
        (apex.x - base_mid.x) / length,
        (apex.z - base_mid.z) / length,
    );
    // (along axis, across axis) coordinates of every vertex
    let local: Vec<(f64, f64)> = pts
        .iter()
        .map(|p| {
            let (dx, dz) = (p.x - base_mid.x, p.z - base_mid.z);
            (dx * ux + dz * uz, -dx * uz + dz * ux)
        })
        .collect();

    let step = length / discs as f64;
    let level = |i: usize| (i as f64 + 0.5) * step;
    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); discs];
    for i in 0..n {
        let (p, q) = (local[i], local[(i + 1) % n]);
        let (lo, hi) = if p.0 < q.0 { (p.0, q.0) } else { (q.0, p.0) };
        let first = ((lo / step - 0.5).floor().max(0.0) as usize).min(discs - 1);
        let last = ((hi / step - 0.5).ceil().max(0.0) as usize).min(discs - 1);
        for (k, bucket) in crossings.iter_mut().enumerate().take(last + 1).skip(first) {
            let t = level(k);
            if (p.0 > t) != (q.0 > t) {
                bucket.push(p.1 + (t - p.0) / (q.0 - p.0) * (q.1 - p.1));
            }
        }
    }

    let mut irregular = false;
    let diameters = crossings
        .into_iter()
        .map(|mut xs| {
            if xs.len() != 2 {
                irregular = true;
            }
            xs.sort_by(f64::total_cmp);
            xs.chunks_exact(2).map(|pair| pair[1] - pair[0]).sum()
        })
        .collect();

    Ok(LongAxis {
        base_mid,
        apex,
        length,
        diameters,
        irregular,
    })
}

/// Apical two- and four-chamber LV endocardial contours at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct BiplaneCase {
    pub contour_2ch: Contour,
    pub contour_4ch: Contour,
    pub instant: Instant,
}

/// Volume in ml: `π/4 · Σ aᵢ·bᵢ · L/N` with `L` the longer of the two axes.
pub fn simpson_biplane(case: &BiplaneCase, discs: usize) -> Result<f64> {
    let four = long_axis(&case.contour_4ch, discs)?;
    let two = long_axis(&case.contour_2ch, discs)?;
    Ok(volume_from_axes(&four, &two))
}

pub fn volume_from_axes(four: &LongAxis, two: &LongAxis) -> f64 {
    let discs = four.diameters.len().min(two.diameters.len());
    let length = four.length.max(two.length);
    let sum: f64 = four
        .diameters
        .iter()
        .zip(&two.diameters)
        .map(|(a, b)| a * b)
        .sum();
    std::f64::consts::FRAC_PI_4 * sum * length / discs as f64 / 1000.0
}

/// `100 · (edv − esv) / edv`, percent.
pub fn ejection_fraction(edv: f64, esv: f64) -> Result<f64> {
    if !(edv > 0.0) {
        return Err(Error::Domain(format!(
            "end-diastolic volume must be positive, got {edv}"
        )));
    }
    Ok(100.0 * (edv - esv) / edv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClinicalScores {
    /// ml
    pub edv: f64,
    /// ml
    pub esv: f64,
    /// percent
    pub ef: f64,
}

pub fn clinical_scores(ed: &BiplaneCase, es: &BiplaneCase, discs: usize) -> Result<ClinicalScores> {
    let edv = simpson_biplane(ed, discs)?;
    let esv = simpson_biplane(es, discs)?;
    Ok(ClinicalScores {
        edv,
        esv,
        ef: ejection_fraction(edv, esv)?,
    })
}

/// LV endocardial contour from a label mask, shaped like a closed
/// annotation: the basal run of boundary pixels (those with no myocardium in
/// their 8-neighbourhood) is removed, so the mitral plane becomes a single
/// chord between the two hinge pixels. Returns the contour and whether a
/// basal run was found; without one the full traced boundary is returned.
pub fn annotation_contour(mask: &LabelMask, postprocess: bool) -> Result<(Contour, bool)> {
    let mut region = region_of(mask, StructureId::LvEndo);
    region = if postprocess {
        keep_largest_fill_holes(&region)
    } else {
        largest_component(&region)
    };
    let mut path = trace_boundary_pixels(&region)?;
    if path.len() > 1 && path.last() == path.first() {
        path.pop();
    }
    let spacing = mask.spacing();
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let touches_myocardium = |(c, r): (usize, usize)| {
        (-1..=1).any(|dr| {
            (-1..=1).any(|dc| {
                let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                cc >= 0 && rr >= 0 && cc < w && rr < h && mask.get(cc as usize, rr as usize) == 2
            })
        })
    };
    let basal: Vec<bool> = path.iter().map(|&p| !touches_myocardium(p)).collect();
    let n = path.len();
    if basal.iter().all(|&b| b) || !basal.iter().any(|&b| b) {
        return Ok((contour_from_pixels(&path, spacing)?, false));
    }

    // Longest cyclic run of basal pixels, scanning from a non-basal pixel.
    let anchor = basal
        .iter()
        .position(|&b| !b)
        .expect("some pixel is non-basal");
    let (mut best_start, mut best_len) = (0, 0);
    let (mut run_start, mut run_len) = (0, 0);
    for k in 1..=n {
        let i = (anchor + k) % n;
        if basal[i] {
            if run_len == 0 {
                run_start = i;
            }
            run_len += 1;
            if run_len > best_len {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }

    let kept: Vec<(usize, usize)> = (0..n - best_len)
        .map(|k| path[(best_start + best_len + k) % n])
        .collect();
    let mut deduped: Vec<(usize, usize)> = Vec::with_capacity(kept.len());
    for p in kept {
        if deduped.last() != Some(&p) {
            deduped.push(p);
        }
    }
    while deduped.len() > 1 && deduped.first() == deduped.last() {
        deduped.pop();
    }
    match contour_from_pixels(&deduped, spacing) {
        Ok(c) => Ok((c, true)),
        Err(_) => Ok((contour_from_pixels(&path, spacing)?, false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Ellipse with semi-axis `long` along z and `short` along x, sampled as
    /// an open annotation whose closing chord straddles the base at
    /// `z = -long`.
    fn lv_ellipse(long: f64, short: f64, n: usize) -> Contour {
        let gap = 1e-3;
        let start = -PI / 2.0 + gap;
        let span = 2.0 * PI - 2.0 * gap;
        let pts = (0..n)
            .map(|i| {
                let t = start + span * i as f64 / (n - 1) as f64;
                Point::new(short * t.cos(), long * t.sin())
            })
            .collect();
        Contour::closed(pts).unwrap()
    }

    fn rotate(c: &Contour, angle: f64, shift: (f64, f64)) -> Contour {
        let (s, co) = angle.sin_cos();
        c.map(|p| Point::new(co * p.x - s * p.z + shift.0, s * p.x + co * p.z + shift.1))
            .unwrap()
    }

    #[test]
    fn ellipse_axis() {
        let axis = long_axis(&lv_ellipse(40.0, 25.0, 20_000), 20).unwrap();
        assert!((axis.length - 80.0).abs() < 1e-3, "length {}", axis.length);
        assert!(!axis.irregular);
        // Levels 10 and 11 straddle the centre at ±2 mm: 2·25·sqrt(1 − (2/40)²).
        let expected = 50.0 * (1.0 - (2.0f64 / 40.0).powi(2)).sqrt();
        assert!((axis.diameters[9] - expected).abs() < 1e-3);
        assert!((axis.diameters[10] - expected).abs() < 1e-3);
    }

    #[test]
    fn circle_axis() {
        let axis = long_axis(&lv_ellipse(30.0, 30.0, 20_000), 21).unwrap();
        assert!((axis.length - 60.0).abs() < 1e-3);
        assert!((axis.diameters[10] - 60.0).abs() < 1e-3);
    }

    #[test]
    fn rotation_does_not_change_axis_measurements() {
        let c = lv_ellipse(40.0, 25.0, 4000);
        let a = long_axis(&c, 20).unwrap();
        let b = long_axis(&rotate(&c, PI / 6.0, (12.5, -3.0)), 20).unwrap();
        assert!((a.length - b.length).abs() < 1e-6);
        for (x, y) in a.diameters.iter().zip(&b.diameters) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    fn biplane(c2: Contour, c4: Contour) -> BiplaneCase {
        BiplaneCase {
            contour_2ch: c2,
            contour_4ch: c4,
            instant: Instant::ED,
        }
    }

    #[test]
    fn scaling_is_cubic() {
        let c = lv_ellipse(40.0, 25.0, 3000);
        let v = simpson_biplane(&biplane(c.clone(), c.clone()), 20).unwrap();
        let doubled = c.map(|p| Point::new(2.0 * p.x, 2.0 * p.z)).unwrap();
        let v2 = simpson_biplane(&biplane(doubled.clone(), doubled), 20).unwrap();
        assert_eq!(v2, 8.0 * v);
        let k = 1.7;
        let scaled = c.map(|p| Point::new(k * p.x, k * p.z)).unwrap();
        let vk = simpson_biplane(&biplane(scaled.clone(), scaled), 20).unwrap();
        assert!((vk / v - k * k * k).abs() < 1e-12);
    }

    #[test]
    fn swapping_views_keeps_volume() {
        let a = lv_ellipse(40.0, 25.0, 3000);
        let b = lv_ellipse(38.0, 21.0, 2500);
        let v1 = simpson_biplane(&biplane(a.clone(), b.clone()), 20).unwrap();
        let v2 = simpson_biplane(&biplane(b, a), 20).unwrap();
        assert!((v1 - v2).abs() <= 1e-12 * v1);
    }

    #[test]
    fn ejection_fraction_examples() {
        assert_eq!(ejection_fraction(120.0, 60.0).unwrap(), 50.0);
        assert_eq!(ejection_fraction(100.0, 100.0).unwrap(), 0.0);
        assert!((ejection_fraction(113.10, 56.55).unwrap() - 50.0).abs() < 1e-12);
        assert!(matches!(ejection_fraction(0.0, 1.0), Err(Error::Domain(_))));
        assert!(ejection_fraction(-5.0, 1.0).is_err());
    }

    #[test]
    fn notched_contour_is_flagged() {
        // Two apical lobes: level lines through the notch cross four times.
        let pts = [
            (25.0, 0.0),
            (25.0, 40.0),
            (5.0, 60.0),
            (0.0, 20.0),
            (-5.0, 60.0),
            (-25.0, 40.0),
            (-25.0, 0.0),
        ];
        let c = Contour::closed(pts.iter().map(|&(x, z)| Point::new(x, z)).collect()).unwrap();
        let axis = long_axis(&c, 40).unwrap();
        assert!(axis.irregular);
        assert_eq!(axis.diameters.len(), 40);
        assert!(axis.diameters.iter().all(|&d| d >= 0.0));
        let smooth = lv_ellipse(40.0, 25.0, 500);
        assert!(!long_axis(&smooth, 40).unwrap().irregular);
    }

    fn lv_mask() -> LabelMask {
        // Cavity (1) inside a myocardial wall (2) open at the bottom, where
        // the atrium (3) sits.
        let (w, h) = (60, 90);
        let mut m = LabelMask::zeros(w, h, 0.5, 0.5).unwrap();
        for row in 0..h {
            for col in 0..w {
                let (x, z) = (col as f64 - 30.0, row as f64 - 40.0);
                let inner = (x / 12.0).powi(2) + (z / 25.0).powi(2) <= 1.0;
                let outer = (x / 16.0).powi(2) + (z / 29.0).powi(2) <= 1.0;
                if z <= 15.0 && inner {
                    m.set(col, row, 1);
                } else if z <= 15.0 && outer {
                    m.set(col, row, 2);
                } else if z > 15.0 && (x / 14.0).powi(2) + ((z - 28.0) / 12.0).powi(2) <= 1.0 {
                    m.set(col, row, 3);
                }
            }
        }
        m
    }

    #[test]
    fn annotation_contour_opens_at_the_mitral_plane() {
        let mask = lv_mask();
        let (contour, found) = annotation_contour(&mask, true).unwrap();
        assert!(found);
        let axis = long_axis(&contour, 20).unwrap();
        // Base at row 55 (z = 15) and apex at row 15 (z = -25): 40 px · 0.5 mm.
        assert!(
            (axis.base_mid.z - 55.0 * 0.5).abs() < 1.0,
            "{:?}",
            axis.base_mid
        );
        assert!((axis.apex.z - 15.0 * 0.5).abs() < 1.0, "{:?}", axis.apex);
        assert!((axis.length - 20.0).abs() < 1.0);
    }

    #[test]
    fn annotation_contour_without_myocardium_falls_back() {
        let mut mask = lv_mask();
        for v in mask.labels_mut() {
            if *v == 2 {
                *v = 0;
            }
        }
        let (_, found) = annotation_contour(&mask, true).unwrap();
        assert!(!found);
    }
}
