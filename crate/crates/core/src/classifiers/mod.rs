//! The five classifier families behind one train/score interface.

pub mod c45;
pub mod linalg;
pub mod logistic;
pub mod naive_bayes;
pub mod ripper;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use c45::{c45_fit, C45Params, DecisionTree, TreeNode};
pub use logistic::{logistic_fit, sigmoid, LogisticModel, LogisticObjective, LogisticParams};
pub use naive_bayes::{nb_fit, GaussianNb, DEFAULT_VARIANCE_FLOOR};
pub use ripper::{ripper_fit, Condition, Op, Rule, RuleSet, RipperParams};
pub use svm::{grid_search_svm, smo_fit, GridConfig, KernelKind, KernelSpec, SvmModel};

use crate::datamodel::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "c45")]
    C45,
    #[serde(rename = "ripper")]
    Ripper,
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "logistic")]
    Logistic,
    #[serde(rename = "svm-poly")]
    SvmPoly,
    #[serde(rename = "svm-rbf")]
    SvmRbf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::C45,
        ModelKind::Ripper,
        ModelKind::NaiveBayes,
        ModelKind::Logistic,
        ModelKind::SvmPoly,
        ModelKind::SvmRbf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::C45 => "c45",
            ModelKind::Ripper => "ripper",
            ModelKind::NaiveBayes => "nb",
            ModelKind::Logistic => "logistic",
            ModelKind::SvmPoly => "svm-poly",
            ModelKind::SvmRbf => "svm-rbf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = ModelKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::InvalidArgument(format!("unknown model `{s}`; expected one of {}", valid.join(", ")))
            })
    }
}

/// Hyperparameters for every model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub c45: C45Params,
    pub ripper: RipperParams,
    pub nb_variance_floor: f64,
    pub logistic: LogisticParams,
    pub svm_grid: GridConfig,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            c45: C45Params::default(),
            ripper: RipperParams::default(),
            nb_variance_floor: DEFAULT_VARIANCE_FLOOR,
            logistic: LogisticParams::default(),
            svm_grid: GridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    C45(DecisionTree),
    Ripper(RuleSet),
    NaiveBayes(GaussianNb),
    Logistic(LogisticModel),
    Svm(SvmModel),
}

impl Model {
    /// Hit probability for probabilistic kinds, the margin for SVMs.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::C45(m) => m.score(x),
            Model::Ripper(m) => m.score(x),
            Model::NaiveBayes(m) => m.score(x),
            Model::Logistic(m) => m.score(x),
            Model::Svm(m) => m.margin(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match self {
            Model::C45(m) => m.predict(x),
            Model::Ripper(m) => m.predict(x),
            Model::Svm(m) => m.predict(x),
            Model::NaiveBayes(_) | Model::Logistic(_) => {
                if self.score(x) >= 0.5 {
                    Label::Hit
                } else {
                    Label::NonHit
                }
            }
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        !matches!(self, Model::Svm(_))
    }
}

/// Trains one model of `kind`. `seed` drives every random choice the
/// training makes (RIPPER splits, SVM grid-search folds).
pub fn train_model(kind: ModelKind, train: &Dataset, settings: &ModelSettings, seed: u64) -> Result<Model> {
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    Ok(match kind {
        ModelKind::C45 => Model::C45(c45_fit(train, &settings.c45)?),
        ModelKind::Ripper => {
            let params = RipperParams {
                seed,
                ..settings.ripper.clone()
            };
            Model::Ripper(ripper_fit(train, &params)?)
        }
        ModelKind::NaiveBayes => Model::NaiveBayes(nb_fit(train, settings.nb_variance_floor)?),
        ModelKind::Logistic => Model::Logistic(logistic_fit(train, &settings.logistic)?),
        ModelKind::SvmPoly | ModelKind::SvmRbf => {
            let kernel_kind = if kind == ModelKind::SvmPoly {
                KernelKind::Polynomial
            } else {
                KernelKind::Rbf
            };
            let grid = GridConfig {
                seed,
                ..settings.svm_grid.clone()
            };
            let best = grid_search_svm(train, kernel_kind, &grid)?;
            log::debug!("{kind}: grid search picked {:?} C={} (cv auc {:.4})", best.kernel, best.c, best.cv_auc);
            Model::Svm(smo_fit(train, best.kernel, best.c, grid.tol)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn zero_logistic_scores_half() {
        let m = Model::Logistic(LogisticModel {
            bias: 0.0,
            coefficients: vec![0.0; 3],
            lambda: 1e-4,
            converged: true,
            iterations: 0,
        });
        assert_eq!(m.score(&[1.0, -4.0, 9.0]), 0.5);
        assert_eq!(m.predict(&[1.0, -4.0, 9.0]), Label::Hit);
        let back: Model = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
