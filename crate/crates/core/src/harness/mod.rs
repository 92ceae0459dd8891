//! Cohort orchestration: folds, batch scoring, outlier classification,
//! method comparison and report rendering.

pub mod cases;
pub mod compare;
pub mod evaluate;
pub mod folds;
pub mod outlier;
pub mod report;

pub use cases::{case_rows, cases_csv, parse_cases_csv, read_cases_csv, CaseRow, CASES_HEADER};
pub use compare::{compare_methods, Comparison, ComparisonGroup, Metric, Pooling};
pub use evaluate::{
    case_path, evaluate_submission, CaseResult, ClinicalSummary, EvalOptions, Filters, MeanStd,
    MethodReport, SegmentationAggregate,
};
pub use folds::{
    fold_balance, make_folds, patient_strata, FoldAssignment, FoldBalance, PatientStrata,
};
pub use outlier::{classify_outlier, classify_outlier_with, OutlierMode, OutlierRule};
pub use report::{parse_report, render_report, ReportFormat};
