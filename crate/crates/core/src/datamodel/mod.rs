//! Chart listings, song analyses, gap-labeled datasets and dataset splits.

pub mod analysis;
pub mod chart;
pub mod dataset;
pub mod labels;
pub mod split;

pub use analysis::{load_analyses_dir, SongAnalysis, TIMBRE_DIMS};
pub use chart::{compute_peaks, parse_chart_csv, parse_date, write_chart_csv, ChartListing, ChartParse, PeakRecord, SongKey};
pub use dataset::{assemble_dataset, AssemblyReport, Dataset};
pub use labels::{label_with_gap, GapLabel, GapScheme, Label, SchemeName};
pub use split::{complement, out_of_time_split, stratified_folds};
