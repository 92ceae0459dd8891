//! Cohort-level agreement statistics and paired significance testing.

pub mod agreement;
pub mod wilcoxon;

pub use agreement::{
    agreement, bland_altman, mean, pearson, population_std, AgreementStats, BlandAltman,
    LOA_MULTIPLIER,
};
pub use wilcoxon::{
    wilcoxon_signed_rank, wilcoxon_signed_rank_with, MethodChoice, WilcoxonMethod, WilcoxonResult,
    EXACT_MAX_N,
};
