//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p camus-bench --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant as Clock;

use camus_bench::clinical::{ejection_fraction, simpson_biplane, BiplaneCase};
use camus_bench::geometry::{
    keep_largest_fill_holes, largest_component, region_of, trace_contour, BinaryMask, Contour,
    Point, StructureId,
};
use camus_bench::harness::{
    case_rows, cases_csv, classify_outlier, evaluate_submission, make_folds, render_report,
    EvalOptions, Filters, OutlierRule, ReportFormat,
};
use camus_bench::io::{
    read_mask, write_mask, EfGroup, Instant, LabelMask, PatientCase, Quality, View,
};
use camus_bench::metrics::{
    hausdorff, mean_absolute_distance, score_case, GeometricScores, ScoreOptions, StructureScore,
};
use camus_bench::stats::wilcoxon_signed_rank;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric oracle equivalence", metric_oracle),
        ("concentric-circle calibration", concentric_circles),
        ("Simpson calibration", simpson_calibration),
        ("Wilcoxon exactness", wilcoxon_exactness),
        (
            "post-processing idempotence and flood-fill oracle",
            postprocessing_oracle,
        ),
        (
            "harness determinism and outlier thresholds",
            harness_determinism,
        ),
        ("fold stratification", fold_stratification),
        ("file format round-trip", format_round_trip),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Clock::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- oracles

fn oracle_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (vx, vz) = (b.x - a.x, b.z - a.z);
    let (wx, wz) = (p.x - a.x, p.z - a.z);
    let len2 = vx * vx + vz * vz;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((wx * vx + wz * vz) / len2).clamp(0.0, 1.0)
    };
    ((p.x - (a.x + t * vx)).powi(2) + (p.z - (a.z + t * vz)).powi(2)).sqrt()
}

/// Per-vertex distance from `a` to the closed polyline `b`, over every segment.
fn oracle_directed(a: &Contour, b: &Contour) -> Vec<f64> {
    let pts = b.points();
    a.points()
        .iter()
        .map(|&p| {
            (0..pts.len())
                .map(|i| oracle_segment_distance(p, pts[i], pts[(i + 1) % pts.len()]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn random_label_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LabelMask {
    let mut m =
        LabelMask::zeros(w, h, rng.random_range(0.1..1.0), rng.random_range(0.1..1.0)).unwrap();
    for _ in 0..rng.random_range(1..4) {
        let (c0, r0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (c1, r1) = (
            (c0 + rng.random_range(1..=w)).min(w),
            (r0 + rng.random_range(1..=h)).min(h),
        );
        for r in r0..r1 {
            for c in c0..c1 {
                m.set(c, r, 1);
            }
        }
    }
    for _ in 0..rng.random_range(0..w * h / 4 + 1) {
        let (c, r) = (rng.random_range(0..w), rng.random_range(0..h));
        m.set(c, r, if rng.random_bool(0.5) { 1 } else { 0 });
    }
    m
}

// ---------------------------------------------------------------- [1]

fn metric_oracle() -> Outcome {
    let start = Clock::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let options = ScoreOptions { postprocess: false };
    let (mut pairs, mut attempts) = (0, 0);
    let (mut worst_dm, mut worst_dh) = (0.0f64, 0.0f64);
    while pairs < 250 {
        attempts += 1;
        ensure!(
            attempts < 10_000,
            "only {pairs} scorable pairs in {attempts} attempts"
        );
        let (w, h) = (rng.random_range(3..=16), rng.random_range(3..=16));
        let reference = random_label_mask(&mut rng, w, h);
        let mut pred = random_label_mask(&mut rng, w, h);
        pred = LabelMask::new(
            w,
            h,
            reference.spacing().0,
            reference.spacing().1,
            pred.labels().to_vec(),
        )
        .unwrap();
        let Ok(StructureScore::Scored(got)) =
            score_case(&pred, &reference, StructureId::LvEndo, options)
        else {
            continue;
        };

        let (mut inter, mut n_pred, mut n_ref) = (0usize, 0usize, 0usize);
        for (p, r) in pred.labels().iter().zip(reference.labels()) {
            n_pred += (*p == 1) as usize;
            n_ref += (*r == 1) as usize;
            inter += (*p == 1 && *r == 1) as usize;
        }
        let dice = 2.0 * inter as f64 / (n_pred + n_ref) as f64;
        ensure!(got.dice == dice, "dice {} vs counted {dice}", got.dice);

        let spacing = reference.spacing();
        let ref_contour = trace_contour(
            &keep_largest_fill_holes(&region_of(&reference, StructureId::LvEndo)),
            spacing,
        )
        .map_err(|e| e.to_string())?;
        let pred_contour = trace_contour(
            &largest_component(&region_of(&pred, StructureId::LvEndo)),
            spacing,
        )
        .map_err(|e| e.to_string())?;
        let forward = oracle_directed(&pred_contour, &ref_contour);
        let backward = oracle_directed(&ref_contour, &pred_contour);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let d_m = (mean(&forward) + mean(&backward)) / 2.0;
        let d_h = max(&forward).max(max(&backward));
        worst_dm = worst_dm.max((got.d_m - d_m).abs());
        worst_dh = worst_dh.max((got.d_h - d_h).abs());
        pairs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(
        worst_dm <= 1e-9 && worst_dh <= 1e-9,
        "max |Δd_m| = {worst_dm:e}, max |Δd_H| = {worst_dh:e}"
    );
    ensure!(secs < 10.0, "took {secs:.2} s");
    Ok(format!(
        "{pairs} pairs, max |Δd_m| = {worst_dm:e}, max |Δd_H| = {worst_dh:e}, Dice exact"
    ))
}

// ---------------------------------------------------------------- [2]

fn circle(radius: f64, n: usize) -> Contour {
    Contour::closed(
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect(),
    )
    .unwrap()
}

fn concentric_circles() -> Outcome {
    let (inner, outer) = (circle(20.0, 4000), circle(23.0, 4000));
    let (d_m, d_h) = (
        mean_absolute_distance(&inner, &outer),
        hausdorff(&inner, &outer),
    );
    ensure!(
        (d_m - 3.0).abs() <= 0.01 && (d_h - 3.0).abs() <= 0.01,
        "d_m = {d_m}, d_H = {d_h}"
    );
    Ok(format!("d_m = {d_m:.6} mm, d_H = {d_h:.6} mm"))
}

// ---------------------------------------------------------------- [3]

/// Ellipse with semi-axis `long` along z, `short` along x, traced from just
/// past the base pole round to just before it, so the short closing chord at
/// `z = -long` marks the base.
fn lv_ellipse(long: f64, short: f64, n: usize) -> Contour {
    let gap = 10.0 / n as f64;
    let (start, span) = (-PI / 2.0 + gap, 2.0 * PI - 2.0 * gap);
    Contour::closed(
        (0..n)
            .map(|i| {
                let t = start + span * i as f64 / (n - 1) as f64;
                Point::new(short * t.cos(), long * t.sin())
            })
            .collect(),
    )
    .unwrap()
}

fn simpson_calibration() -> Outcome {
    let mut lines = Vec::new();
    for (name, long, short, stated) in [
        ("ellipse 80x50", 40.0, 25.0, 104.72),
        ("sphere 60", 30.0, 30.0, 113.10),
    ] {
        let expected = 4.0 / 3.0 * PI * long * short * short / 1000.0;
        ensure!(
            (expected - stated).abs() < 0.005,
            "{name}: closed form {expected} ml vs {stated} ml"
        );
        for (discs, points, tolerance) in [(20, 20_000, 0.01), (100_000, 400_000, 1e-4)] {
            let c = lv_ellipse(long, short, points);
            let case = BiplaneCase {
                contour_2ch: c.clone(),
                contour_4ch: c,
                instant: Instant::ED,
            };
            let v = simpson_biplane(&case, discs).map_err(|e| e.to_string())?;
            let rel = (v - expected).abs() / expected;
            ensure!(
                rel <= tolerance,
                "{name} N={discs}: {v} ml vs {expected} ml (rel {rel:e})"
            );
            lines.push(format!("{name} N={discs}: {v:.4} ml"));
        }
    }
    let ef = ejection_fraction(120.0, 60.0).map_err(|e| e.to_string())?;
    ensure!(ef == 50.0, "EF(120, 60) = {ef}");
    lines.push("EF(120, 60) = 50".into());
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- [4]

fn enumeration_p(x: &[f64], y: &[f64]) -> (f64, usize) {
    let d: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|v| *v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return (1.0, 0);
    }
    // Doubled mid-ranks keep every rank integral.
    let ranks: Vec<i64> = d
        .iter()
        .map(|a| {
            let below = d.iter().filter(|b| b.abs() < a.abs()).count() as i64;
            let tied = d.iter().filter(|b| b.abs() == a.abs()).count() as i64;
            2 * below + tied + 1
        })
        .collect();
    let total: i64 = ranks.iter().sum();
    let observed: i64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let extreme = (2 * observed - total).abs();
    let mut hits = 0u64;
    for signs in 0u32..(1 << n) {
        let s: i64 = (0..n)
            .filter(|i| signs >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if (2 * s - total).abs() >= extreme {
            hits += 1;
        }
    }
    (hits as f64 / (1u64 << n) as f64, n)
}

fn wilcoxon_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1945);
    for trial in 0..1000 {
        let n = rng.random_range(1..=12);
        let levels = rng.random_range(2..12);
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 * 0.5)
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 * 0.5)
            .collect();
        let r = wilcoxon_signed_rank(&x, &y).map_err(|e| e.to_string())?;
        let (p, n_eff) = enumeration_p(&x, &y);
        ensure!(
            r.p_value == p && r.n_effective == n_eff,
            "trial {trial}: p {} vs {p}",
            r.p_value
        );
    }
    let r =
        wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).map_err(|e| e.to_string())?;
    ensure!(r.p_value == 0.0625 && r.w_plus == 15.0, "{{1..5}}: {r:?}");
    Ok("1000 samples match enumeration exactly; {1,2,3,4,5} gives p = 0.0625".into())
}

// ---------------------------------------------------------------- [5]

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = i;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    /// Keeps the smaller index as root, so a root is its component's first
    /// pixel in raster order.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn oracle_postprocess(m: &BinaryMask) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let at = |c: usize, r: usize| r * w + c;
    let mut fg = UnionFind((0..w * h).collect());
    for r in 0..h {
        for c in 0..w {
            if !m.get(c, r) {
                continue;
            }
            if c + 1 < w && m.get(c + 1, r) {
                fg.union(at(c, r), at(c + 1, r));
            }
            if r + 1 < h && m.get(c, r + 1) {
                fg.union(at(c, r), at(c, r + 1));
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..w * h {
        if m.as_slice()[i] {
            *sizes.entry(fg.find(i)).or_default() += 1;
        }
    }
    let Some(best) = sizes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(root, _)| *root)
    else {
        return BinaryMask::new(w, h);
    };
    let kept: Vec<bool> = (0..w * h)
        .map(|i| m.as_slice()[i] && fg.find(i) == best)
        .collect();

    // Background pieces 8-connected to the border stay background.
    let outside = w * h;
    let mut bg = UnionFind((0..=outside).collect());
    for r in 0..h {
        for c in 0..w {
            if kept[at(c, r)] {
                continue;
            }
            if c == 0 || r == 0 || c + 1 == w || r + 1 == h {
                bg.union(at(c, r), outside);
            }
            for (dc, dr) in [(1i64, 0i64), (0, 1), (1, 1), (-1, 1)] {
                let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                if cc >= 0
                    && (cc as usize) < w
                    && (rr as usize) < h
                    && !kept[at(cc as usize, rr as usize)]
                {
                    bg.union(at(c, r), at(cc as usize, rr as usize));
                }
            }
        }
    }
    let border = bg.find(outside);
    BinaryMask::from_vec(
        w,
        h,
        (0..w * h)
            .map(|i| kept[i] || bg.find(i) != border)
            .collect(),
    )
}

fn random_binary(rng: &mut ChaCha8Rng) -> BinaryMask {
    let mut m = BinaryMask::new(64, 64);
    let density = rng.random_range(0.0..0.7);
    for r in 0..64 {
        for c in 0..64 {
            m.set(c, r, rng.random_bool(density));
        }
    }
    // Rings leave enclosed holes.
    for _ in 0..rng.random_range(0..4) {
        let (cx, cz) = (
            rng.random_range(0..64) as f64,
            rng.random_range(0..64) as f64,
        );
        let (inner, outer) = (rng.random_range(1.0..10.0), rng.random_range(11.0..25.0));
        for r in 0..64 {
            for c in 0..64 {
                let d = (c as f64 - cx).hypot(r as f64 - cz);
                if d >= inner && d <= outer {
                    m.set(c, r, true);
                } else if d < inner && rng.random_bool(0.8) {
                    m.set(c, r, false);
                }
            }
        }
    }
    m
}

fn postprocessing_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let mut filled = 0;
    for i in 0..1000 {
        let m = random_binary(&mut rng);
        let once = keep_largest_fill_holes(&m);
        ensure!(
            keep_largest_fill_holes(&once) == once,
            "mask {i}: not idempotent"
        );
        ensure!(
            once == oracle_postprocess(&m),
            "mask {i}: differs from union-find oracle"
        );
        if once.count() > largest_component(&m).count() {
            filled += 1;
        }
    }
    Ok(format!(
        "1000 masks agree and are idempotent ({filled} had holes filled)"
    ))
}

// ---------------------------------------------------------------- [6]

fn harness_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rows = common::manifest(12, |p| common::quality_for(p, 0));
    common::write_cohort(dir.path(), &rows);
    let mut rendered = Vec::new();
    for workers in [1, 8] {
        let options = EvalOptions {
            workers,
            ..EvalOptions::default()
        };
        let report =
            evaluate_submission(dir.path(), dir.path(), &rows, &Filters::default(), &options)
                .map_err(|e| e.to_string())?;
        for agg in &report.segmentation {
            let (dice, dm, dh) = (agg.dice.unwrap(), agg.d_m.unwrap(), agg.d_h.unwrap());
            ensure!(
                agg.n_scored == 24
                    && dice.mean == 1.0
                    && dice.std == 0.0
                    && dm.mean == 0.0
                    && dh.mean == 0.0,
                "{} {}: {agg:?}",
                agg.structure,
                agg.instant
            );
        }
        ensure!(
            report.outliers.rate == Some(0.0),
            "outlier rate {:?}",
            report.outliers.rate
        );
        for s in [report.clinical.edv, report.clinical.esv, report.clinical.ef] {
            let s = s.ok_or("no clinical agreement")?;
            ensure!(
                s.bias == 0.0 && s.corr.is_some_and(|c| (c - 1.0).abs() < 1e-12),
                "clinical {s:?}"
            );
        }
        let mut bytes: Vec<Vec<u8>> = [
            ReportFormat::Json,
            ReportFormat::Csv,
            ReportFormat::Markdown,
        ]
        .iter()
        .map(|f| render_report(&report, *f))
        .collect();
        bytes.push(
            cases_csv(&case_rows(&report))
                .map_err(|e| e.to_string())?
                .into_bytes(),
        );
        rendered.push(bytes);
    }
    ensure!(rendered[0] == rendered[1], "1- and 8-worker reports differ");

    let rule = OutlierRule::default();
    for instant in Instant::ALL {
        let (dm, dh) = (rule.dm_max(instant), rule.dh_max(instant));
        let s = |d_m, d_h| GeometricScores {
            dice: 0.9,
            d_m,
            d_h,
        };
        ensure!(
            !classify_outlier(&s(dm, dh), instant, &rule),
            "{instant}: fires at the thresholds"
        );
        ensure!(
            classify_outlier(&s(dm.next_up(), 0.0), instant, &rule),
            "{instant}: d_m just above"
        );
        ensure!(
            classify_outlier(&s(0.0, dh.next_up()), instant, &rule),
            "{instant}: d_H just above"
        );
    }
    ensure!(
        (
            rule.dm_max_ed,
            rule.dm_max_es,
            rule.dh_max_ed,
            rule.dh_max_es
        ) == (3.5, 4.0, 8.2, 8.8),
        "default rule {rule:?}"
    );
    Ok("48 self-scored cases: Dice 1, distances 0, 0% outliers, identical bytes for 1 and 8 workers; thresholds strict at 3.5/4.0 and 8.2/8.8".into())
}

// ---------------------------------------------------------------- [7]

fn fold_stratification() -> Outcome {
    let cells = [
        (Quality::Good, EfGroup::AtMost45, 86),
        (Quality::Good, EfGroup::AtLeast55, 33),
        (Quality::Good, EfGroup::Between, 56),
        (Quality::Medium, EfGroup::AtMost45, 113),
        (Quality::Medium, EfGroup::AtLeast55, 44),
        (Quality::Medium, EfGroup::Between, 73),
        (Quality::Poor, EfGroup::AtMost45, 46),
        (Quality::Poor, EfGroup::AtLeast55, 18),
        (Quality::Poor, EfGroup::Between, 31),
    ];
    let mut patients = Vec::new();
    for (q, e, n) in cells {
        for _ in 0..n {
            patients.push((format!("patient{:04}", patients.len() + 1), q, e));
        }
    }
    ensure!(patients.len() == 500, "{} patients", patients.len());
    let cases: Vec<PatientCase> = patients
        .iter()
        .flat_map(|(id, q, e)| {
            View::ALL.into_iter().flat_map(move |view| {
                Instant::ALL.into_iter().map(move |instant| PatientCase {
                    patient_id: id.clone(),
                    view,
                    instant,
                    quality: *q,
                    ef_group: *e,
                    fold: None,
                })
            })
        })
        .collect();

    let quality_target = [
        (Quality::Good, 35.0),
        (Quality::Medium, 46.0),
        (Quality::Poor, 19.0),
    ];
    let ef_target = [
        (EfGroup::AtMost45, 49.0),
        (EfGroup::AtLeast55, 19.0),
        (EfGroup::Between, 32.0),
    ];
    let mut worst = 0.0f64;
    for seed in 0..25 {
        let folds = make_folds(&cases, 10, seed).map_err(|e| e.to_string())?;
        ensure!(
            folds == make_folds(&cases, 10, seed).unwrap(),
            "seed {seed}: not deterministic"
        );
        for fold in 1..=10u32 {
            let members: Vec<_> = patients
                .iter()
                .filter(|p| folds.fold_of(&p.0) == Some(fold))
                .collect();
            ensure!(
                members.len() == 50,
                "seed {seed} fold {fold}: {} patients",
                members.len()
            );
            let share = |pred: &dyn Fn(&&(String, Quality, EfGroup)) -> bool| {
                100.0 * members.iter().filter(|p| pred(p)).count() as f64 / members.len() as f64
            };
            for (q, target) in quality_target {
                let gap = (share(&|p| p.1 == q) - target).abs();
                worst = worst.max(gap);
                ensure!(
                    gap <= 2.0,
                    "seed {seed} fold {fold}: {q} off by {gap} points"
                );
            }
            for (e, target) in ef_target {
                let gap = (share(&|p| p.2 == e) - target).abs();
                worst = worst.max(gap);
                ensure!(
                    gap <= 2.0,
                    "seed {seed} fold {fold}: {e} off by {gap} points"
                );
            }
        }
    }
    Ok(format!(
        "25 seeds, 10 folds of 50, worst share gap {worst:.1} points"
    ))
}

// ---------------------------------------------------------------- [8]

fn format_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let (w, h) = (rng.random_range(1..=80), rng.random_range(1..=80));
        let labels: Vec<u8> = (0..w * h).map(|_| rng.random_range(0..=3)).collect();
        let spacing = (rng.random_range(1e-3..10.0), rng.random_range(1e-3..10.0));
        let mut mask =
            LabelMask::new(w, h, spacing.0, spacing.1, labels).map_err(|e| e.to_string())?;
        if rng.random_bool(0.3) {
            mask = mask.with_extra_key("Comment", format!("case {i}"));
        }
        let path = dir.path().join(format!("m{i}.mhd"));
        write_mask(&mask, &path).map_err(|e| e.to_string())?;
        let back = read_mask(&path).map_err(|e| e.to_string())?;
        ensure!(back == mask, "mask {i}: read differs from written");
        ensure!(
            back.spacing().0.to_bits() == spacing.0.to_bits()
                && back.spacing().1.to_bits() == spacing.1.to_bits(),
            "mask {i}: spacing bits changed"
        );
        let again = dir.path().join(format!("m{i}_again.mhd"));
        write_mask(&back, &again).map_err(|e| e.to_string())?;
        let raw = |p: &std::path::Path| std::fs::read(p.with_extension("raw")).unwrap();
        ensure!(raw(&path) == raw(&again), "mask {i}: payload bytes changed");
        let header =
            |p: &std::path::Path| std::fs::read_to_string(p).unwrap().replace("_again", "");
        ensure!(header(&path) == header(&again), "mask {i}: header changed");
    }
    Ok("1000 random masks round-trip bit-identically".into())
}
