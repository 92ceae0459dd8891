//! `camus-bench` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use camus_bench::clinical::{annotation_contour, simpson_biplane, BiplaneCase, DEFAULT_DISCS};
use camus_bench::geometry::Contour;
use camus_bench::harness::{
    case_rows, cases_csv, compare_methods, evaluate_submission, make_folds, parse_report,
    read_cases_csv, render_report, EvalOptions, Filters, Metric, OutlierMode, Pooling,
    ReportFormat,
};
use camus_bench::io::{load_manifest, read_contour_csv, read_label_mask, Instant, Quality, View};
use camus_bench::stats::bland_altman;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "camus-bench",
    version,
    about = "Score echocardiography segmentations against reference masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a submission directory and write a report.
    Score(ScoreArgs),
    /// Assign patients to stratified cross-validation folds.
    Folds {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wilcoxon signed-rank test between two per-case score tables.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// dice, dm or dh.
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
        /// pooled or by-structure-and-instant.
        #[arg(long, default_value = "pooled")]
        pooling: Pooling,
    },
    /// Biplane LV volume in ml from two- and four-chamber contours.
    Simpson {
        /// `x,z` contour CSV (mm) or `.mhd` label mask.
        #[arg(long)]
        c2ch: PathBuf,
        #[arg(long)]
        c4ch: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DISCS)]
        discs: usize,
    },
    /// Print a JSON or CSV report in another format.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        /// json, csv or markdown.
        #[arg(long)]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// e.g. `good,medium`.
    #[arg(long, value_delimiter = ',')]
    quality: Option<Vec<Quality>>,
    #[arg(long, value_delimiter = ',')]
    folds: Option<Vec<u32>>,
    /// e.g. `2ch,4ch`.
    #[arg(long, value_delimiter = ',')]
    views: Option<Vec<View>>,
    /// e.g. `ed,es`.
    #[arg(long, value_delimiter = ',')]
    instants: Option<Vec<Instant>>,
    /// Report path; `.csv` and `.md` select those formats, anything else JSON.
    #[arg(long)]
    out: PathBuf,
    /// Score prediction masks without largest-component and hole-fill cleanup.
    #[arg(long)]
    no_postprocess: bool,
    /// Worker threads, 0 for one per CPU.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Require both d_m and d_H above threshold to flag an outlier.
    #[arg(long)]
    and_outliers: bool,
    #[arg(long, default_value_t = DEFAULT_DISCS)]
    discs: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> AnyResult<()> {
    fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn format_for(path: &Path) -> ReportFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("csv") => ReportFormat::Csv,
        Some("md") | Some("markdown") => ReportFormat::Markdown,
        _ => ReportFormat::Json,
    }
}

fn run(command: Command) -> AnyResult<()> {
    match command {
        Command::Score(args) => score(args),
        Command::Folds {
            manifest,
            k,
            seed,
            out,
        } => {
            let cases = load_manifest(&manifest)?;
            let folds = make_folds(&cases, k, seed)?;
            write(&out, folds.to_csv())
        }
        Command::Compare {
            a,
            b,
            metric,
            out,
            pooling,
        } => {
            let comparison =
                compare_methods(&read_cases_csv(&a)?, &read_cases_csv(&b)?, metric, pooling)?;
            let mut text = serde_json::to_string_pretty(&comparison)?;
            text.push('\n');
            write(&out, text)
        }
        Command::Simpson { c2ch, c4ch, discs } => {
            let case = BiplaneCase {
                contour_2ch: load_contour(&c2ch)?,
                contour_4ch: load_contour(&c4ch)?,
                instant: Instant::ED,
            };
            println!("{}", simpson_biplane(&case, discs)?);
            Ok(())
        }
        Command::Render { input, format } => {
            let bytes =
                fs::read(&input).map_err(|e| format!("cannot read {}: {e}", input.display()))?;
            let source = match format_for(&input) {
                ReportFormat::Csv => ReportFormat::Csv,
                _ => ReportFormat::Json,
            };
            let report = parse_report(&bytes, source)?;
            use std::io::Write;
            std::io::stdout().write_all(&render_report(&report, format))?;
            Ok(())
        }
    }
}

fn load_contour(path: &Path) -> AnyResult<Contour> {
    let is_mask = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mhd"));
    Ok(if is_mask {
        annotation_contour(&read_label_mask(path)?, true)?.0
    } else {
        read_contour_csv(path)?
    })
}

fn score(args: ScoreArgs) -> AnyResult<()> {
    let manifest = load_manifest(&args.manifest)?;
    let set = |v: Option<Vec<_>>| v.map(BTreeSet::from_iter);
    let filters = Filters {
        quality: set(args.quality),
        folds: args.folds.map(BTreeSet::from_iter),
        views: args.views.map(BTreeSet::from_iter),
        instants: args.instants.map(BTreeSet::from_iter),
    };
    let options = EvalOptions {
        postprocess: !args.no_postprocess,
        workers: args.workers,
        mode: if args.and_outliers {
            OutlierMode::And
        } else {
            OutlierMode::Or
        },
        discs: args.discs,
        ..EvalOptions::default()
    };
    let report = evaluate_submission(&args.pred, &args.reference, &manifest, &filters, &options)?;
    write(&args.out, render_report(&report, format_for(&args.out)))?;
    write(
        &sibling(&args.out, "_cases.csv"),
        cases_csv(&case_rows(&report))?,
    )?;
    if !report.clinical.patients.is_empty() {
        let pred: Vec<f64> = report
            .clinical
            .patients
            .iter()
            .map(|p| p.prediction.ef)
            .collect();
        let reference: Vec<f64> = report
            .clinical
            .patients
            .iter()
            .map(|p| p.reference.ef)
            .collect();
        write(
            &sibling(&args.out, "_ef_bland_altman.csv"),
            bland_altman(&pred, &reference)?.to_csv(),
        )?;
    }
    println!(
        "scored {} cases of {} patients; {} failed structures; {} outliers",
        report.metadata.cohort.n_cases,
        report.metadata.cohort.n_patients,
        report.failed.len(),
        report.outliers.n_outliers
    );
    Ok(())
}
