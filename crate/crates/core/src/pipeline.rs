//! A trained model bundled with the preprocessing it was fitted with.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train_model, Model, ModelKind, ModelSettings};
use crate::datamodel::{Dataset, Label, SongAnalysis};
use crate::error::{Error, Result};
use crate::features::feature_vector;
use crate::preprocess::{genetic_select, GaConfig, Standardizer};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format_version: u32,
    pub model_kind: ModelKind,
    /// Schema the standardizer was fitted on.
    pub input_features: Vec<String>,
    pub standardizer: Standardizer,
    /// Features the model consumes, a subset of `input_features`.
    pub selected_features: Vec<String>,
    pub model: Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Hit probability, or the SVM margin.
    pub score: f64,
    pub label: Label,
}

impl TrainedPipeline {
    /// Standardizes `train`, optionally selects features, and fits `kind`.
    pub fn fit(
        train: &Dataset,
        kind: ModelKind,
        settings: &ModelSettings,
        feature_selection: Option<&GaConfig>,
        seed: u64,
    ) -> Result<TrainedPipeline> {
        let standardizer = Standardizer::fit(train.rows())?;
        let standardized = train.with_rows(standardizer.apply(train.rows()))?;
        let selected: Vec<usize> = match feature_selection {
            Some(ga) => genetic_select(&standardized, ga)?.indices(),
            None => (0..train.n_features()).collect(),
        };
        let reduced = standardized.select_features(&selected);
        let model = train_model(kind, &reduced, settings, seed)?;
        Ok(TrainedPipeline {
            format_version: FORMAT_VERSION,
            model_kind: kind,
            input_features: train.feature_names().to_vec(),
            standardizer,
            selected_features: reduced.feature_names().to_vec(),
            model,
        })
    }

    /// Fails with the missing and extra names if `names` differs from the
    /// training schema (order included).
    pub fn check_schema(&self, names: &[String]) -> Result<()> {
        if names == self.input_features.as_slice() {
            return Ok(());
        }
        let have: HashSet<&String> = names.iter().collect();
        let want: HashSet<&String> = self.input_features.iter().collect();
        let missing: Vec<String> = self.input_features.iter().filter(|n| !have.contains(n)).cloned().collect();
        let extra: Vec<String> = names.iter().filter(|n| !want.contains(n)).cloned().collect();
        if missing.is_empty() && extra.is_empty() {
            return Err(Error::InvalidArgument("feature columns are in a different order than at training".into()));
        }
        Err(Error::SchemaMismatch { missing, extra })
    }

    fn model_input(&self, row: &[f64]) -> Vec<f64> {
        let z = self.standardizer.transform_row(row);
        self.selected_features
            .iter()
            .map(|name| {
                let j = self
                    .input_features
                    .iter()
                    .position(|n| n == name)
                    .expect("selected features come from the input schema");
                z[j]
            })
            .collect()
    }

    /// Scores a raw (unstandardized) row laid out in the training schema.
    pub fn predict_row(&self, row: &[f64]) -> Prediction {
        let x = self.model_input(row);
        Prediction {
            score: self.model.score(&x),
            label: self.model.predict(&x),
        }
    }

    pub fn predict_named(&self, names: &[String], row: &[f64]) -> Result<Prediction> {
        self.check_schema(names)?;
        if row.len() != names.len() {
            return Err(Error::LengthMismatch(names.len(), row.len()));
        }
        Ok(self.predict_row(row))
    }

    pub fn predict_analysis(&self, analysis: &SongAnalysis) -> Result<Prediction> {
        let fv = feature_vector(analysis)?;
        self.predict_named(&fv.names, &fv.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedPipeline> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0);
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::UnsupportedVersion(version as u32));
        }
        let p: TrainedPipeline = serde_json::from_value(value)?;
        if p.standardizer.means.len() != p.input_features.len() {
            return Err(Error::InvalidArgument("standardizer width differs from the input schema".into()));
        }
        if let Some(name) = p.selected_features.iter().find(|n| !p.input_features.contains(n)) {
            return Err(Error::UnknownFeature {
                name: name.clone(),
                valid: p.input_features.clone(),
            });
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedPipeline> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let rows = (0..30).map(|i| vec![i as f64, 100.0 + (i % 4) as f64, 5.0]).collect();
        let labels = (0..30).map(|i| if i >= 15 { Label::Hit } else { Label::NonHit }).collect();
        Dataset::undated(vec!["a".into(), "b".into(), "c".into()], rows, labels).unwrap()
    }

    #[test]
    fn round_trip_predicts_identically() {
        let ds = toy();
        for kind in [ModelKind::C45, ModelKind::NaiveBayes, ModelKind::Logistic, ModelKind::Ripper] {
            let p = TrainedPipeline::fit(&ds, kind, &ModelSettings::default(), None, 3).unwrap();
            let back = TrainedPipeline::from_json(&p.to_json().unwrap()).unwrap();
            for r in ds.rows() {
                assert_eq!(p.predict_row(r), back.predict_row(r));
            }
        }
    }

    #[test]
    fn schema_errors_name_the_difference() {
        let p = TrainedPipeline::fit(&toy(), ModelKind::Logistic, &ModelSettings::default(), None, 1).unwrap();
        let names: Vec<String> = vec!["a".into(), "b".into(), "zz".into()];
        match p.check_schema(&names) {
            Err(Error::SchemaMismatch { missing, extra }) => {
                assert_eq!(missing, vec!["c".to_string()]);
                assert_eq!(extra, vec!["zz".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(p.check_schema(&["a".into(), "b".into(), "c".into()]).is_ok());
        let short = p.predict_named(&p.input_features, &[0.0, 1.0]);
        assert!(matches!(short, Err(Error::LengthMismatch(3, 2))));
    }

    #[test]
    fn selection_restricts_model_input() {
        let p = TrainedPipeline::fit(&toy(), ModelKind::NaiveBayes, &ModelSettings::default(), Some(&GaConfig::with_seed(2)), 1).unwrap();
        assert!(p.selected_features.contains(&"a".to_string()));
        assert!(p.selected_features.len() < 3);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let p = TrainedPipeline::fit(&toy(), ModelKind::C45, &ModelSettings::default(), None, 1).unwrap();
        let text = p.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(TrainedPipeline::from_json(&text), Err(Error::UnsupportedVersion(9))));
    }
}
