//! Training-fold standardization and correlation-based feature selection.

pub mod cfs;
pub mod genetic;
pub mod standardize;

pub use cfs::{cfs_merit, feature_class_correlation, pearson, CorrelationTables};
pub use genetic::{genetic_search, genetic_select, FeatureSubset, GaConfig, GaTrace};
pub use standardize::Standardizer;
