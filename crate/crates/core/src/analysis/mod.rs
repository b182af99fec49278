//! Classification metrics and feature-distribution analysis.

mod distribution;
mod export;
mod metrics;

pub use distribution::{
    feature_values, histogram, jsd, jsd_matrix, jsd_matrix_with_ranges, shared_ranges,
    FeatureHistogram, JsdMatrix, DEFAULT_BINS,
};
pub use export::{histogram_csv, jsd_matrix_csv, parse_jsd_matrix_csv};
pub use metrics::{confusion, f1_score, precision, tpr, ConfusionCounts, DEFAULT_THRESHOLD};
