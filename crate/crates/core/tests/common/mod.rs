//! Synthetic apical-view phantoms and cohort fixtures shared by the
//! integration tests.

#![allow(dead_code)]

use std::path::Path;

use camus_bench::io::{write_mask, EfGroup, Instant, LabelMask, PatientCase, Quality, View};

pub const SPACING: (f64, f64) = (0.5, 0.5);
pub const WIDTH: usize = 96;
pub const HEIGHT: usize = 136;

/// LV cavity (1) as the apical half of an ellipse, myocardium (2) wrapping
/// it everywhere except at the mitral plane, and an atrium (3) below the
/// base. Sizes vary with patient, view and instant; ES is smaller.
pub fn phantom(patient: usize, view: View, instant: Instant) -> LabelMask {
    let jitter = (patient % 7) as f64;
    let (mut a, mut b) = (18.0 + jitter, 56.0 + 1.5 * jitter);
    if view == View::TwoChamber {
        a -= 2.0;
    }
    if instant == Instant::ES {
        let shrink = 0.78 + 0.02 * (patient % 5) as f64;
        a *= shrink;
        b *= 0.88;
    }
    let (cx, base) = (48.0, 70.0);
    let wall = 5.0;
    let (la_a, la_b) = (16.0, 12.0 + (patient % 3) as f64);
    let la_cz = base + la_b + 2.0;

    let mut mask = LabelMask::zeros(WIDTH, HEIGHT, SPACING.0, SPACING.1).unwrap();
    for r in 0..HEIGHT {
        for c in 0..WIDTH {
            let (x, z) = (c as f64 - cx, r as f64 - base);
            let inside = |sa: f64, sb: f64| (x / sa).powi(2) + (z / sb).powi(2) <= 1.0;
            let label = if z <= 0.0 && inside(a, b) {
                1
            } else if z <= 0.0 && inside(a + wall, b + wall) {
                2
            } else if (x / la_a).powi(2) + ((r as f64 - la_cz) / la_b).powi(2) <= 1.0 {
                3
            } else {
                0
            };
            mask.set(c, r, label);
        }
    }
    mask
}

/// Relabels every pixel within `radius` pixels of the cavity as cavity.
pub fn dilate_cavity(mask: &LabelMask, radius: i64) -> LabelMask {
    let mut out = mask.clone();
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for r in 0..h {
        for c in 0..w {
            if mask.get(c as usize, r as usize) != 1 {
                continue;
            }
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    let (cc, rr) = (c + dc, r + dr);
                    if dc * dc + dr * dr <= radius * radius
                        && cc >= 0
                        && rr >= 0
                        && cc < w
                        && rr < h
                    {
                        out.set(cc as usize, rr as usize, 1);
                    }
                }
            }
        }
    }
    out
}

pub fn quality_for(patient: usize, n_poor_per_100: usize) -> Quality {
    match patient % 100 {
        p if p < n_poor_per_100 => Quality::Poor,
        p if p % 2 == 0 => Quality::Good,
        _ => Quality::Medium,
    }
}

/// Four manifest rows per patient.
pub fn manifest(patients: usize, quality: impl Fn(usize) -> Quality) -> Vec<PatientCase> {
    let mut rows = Vec::new();
    for p in 0..patients {
        for view in View::ALL {
            for instant in Instant::ALL {
                rows.push(PatientCase {
                    patient_id: format!("patient{:04}", p + 1),
                    view,
                    instant,
                    quality: quality(p),
                    ef_group: [EfGroup::AtMost45, EfGroup::Between, EfGroup::AtLeast55][p % 3],
                    fold: Some((p % 10) as u32 + 1),
                });
            }
        }
    }
    rows
}

pub fn manifest_csv(rows: &[PatientCase]) -> String {
    let mut out = String::from("patient_id,view,instant,quality,ef_group,fold\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.patient_id,
            r.view,
            r.instant,
            r.quality,
            r.ef_group,
            r.fold.map(|f| f.to_string()).unwrap_or_default()
        ));
    }
    out
}

pub fn patient_index(patient_id: &str) -> usize {
    patient_id
        .trim_start_matches("patient")
        .parse::<usize>()
        .unwrap()
        - 1
}

/// Writes the phantom of every manifest row into `dir`.
pub fn write_cohort(dir: &Path, rows: &[PatientCase]) {
    for r in rows {
        let mask = phantom(patient_index(&r.patient_id), r.view, r.instant);
        write_mask(&mask, dir.join(format!("{}.mhd", r.key().file_stem()))).unwrap();
    }
}
