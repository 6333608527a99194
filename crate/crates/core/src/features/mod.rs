//! The 138-value feature vector and yearly trend lines.

pub mod stats;
pub mod trend;
pub mod vector;

pub use stats::{descriptive_stats, DescriptiveStats, STAT_SUFFIXES};
pub use trend::{yearly_trend, TrendLine};
pub use vector::{beatdiff_series, feature_names, feature_vector, FeatureVector, BASIC_FEATURES, FEATURE_COUNT};
