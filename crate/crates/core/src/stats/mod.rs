//! Rank and linear correlation, and the grouped/ungrouped analyses built on them.

mod analysis;
mod correlation;
mod rank;
mod report;

pub use analysis::{
    corr_group_by_src, corr_no_grouping, correlate, hq_source_set, subsample_corr, subsample_sources, AnalysisSpec,
    CorrType, CorrelationResult, Grouping, Subsample, Subset, DEFAULT_REPEATS,
};
pub use correlation::{pearson, spearman};
pub use rank::rank_average_ties;
pub use report::{run_analysis, to_csv, to_json, to_markdown, AnalysisRow, Undefined, CSV_HEADER};
