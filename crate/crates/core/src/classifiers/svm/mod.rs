//! Soft-margin SVM trained by SMO, plus the grid search over C and kernel parameters.

pub mod grid;
pub mod kernel;
pub mod smo;

pub use grid::{cv_auc, cv_score, grid_search_svm, hill_climb, CvScore, GridConfig, GridResult, KernelKind, Neighborhood};
pub use kernel::{KernelSpec, PairTables};
pub use smo::{dual_objective, smo_fit, smo_solve, smo_solve_from, GramView, SmoSolution, SvmModel, DEFAULT_TOL};
