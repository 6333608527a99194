//! Metrics, repeated cross-validation and paired model comparison.

pub mod compare;
pub mod cv;
pub mod metrics;
pub mod wilcoxon;

pub use compare::{compare_models, compare_results, Comparison, ComparisonRow, Flag, MetricSummary};
pub use cv::{evaluate_prepared, prepare_cv, repeated_cv, CvConfig, CvResult, FoldResult, FsScope, PreparedCv, PreparedFold};
pub use metrics::{auc, confusion_and_accuracy, roc_auc, ConfusionMatrix, RocCurve};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
