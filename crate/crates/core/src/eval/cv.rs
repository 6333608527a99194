use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train_model, ModelKind, ModelSettings};
use crate::datamodel::{complement, stratified_folds, Dataset, Label};
use crate::error::{Error, Result};
use crate::eval::metrics::{auc, ConfusionMatrix};
use crate::preprocess::{genetic_select, GaConfig, Standardizer};
use crate::seed::derive_seed;

/// Where feature selection is fitted during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FsScope {
    /// Inside each training fold only.
    PerFold,
    /// Once on the whole standardized dataset before splitting. Leaks test
    /// information into the selection; kept for comparison runs.
    WholeDataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    pub fs_scope: FsScope,
    /// GA parameters; the seed field is replaced by a per-fold sub-seed.
    pub ga: GaConfig,
    pub settings: ModelSettings,
}

impl CvConfig {
    pub fn new(runs: usize, folds: usize, seed: u64) -> Self {
        CvConfig {
            runs,
            folds,
            seed,
            fs_scope: FsScope::PerFold,
            ga: GaConfig::with_seed(seed),
            settings: ModelSettings::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidArgument("runs must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// One train/test split after standardization and optional feature
/// selection, both fitted on the training part.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub run: usize,
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub standardizer: Standardizer,
    /// Indices into the original feature schema.
    pub selected: Vec<usize>,
    pub train: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone)]
pub struct PreparedCv {
    pub runs: usize,
    pub folds: usize,
    pub feature_selection: bool,
    pub partition_hash: u64,
    pub n_instances: usize,
    pub labels: Vec<Label>,
    pub prepared: Vec<PreparedFold>,
}

fn hash_partitions(partitions: &[Vec<Vec<usize>>]) -> u64 {
    let mut h = DefaultHasher::new();
    partitions.hash(&mut h);
    h.finish()
}

/// Fold partitions for every run, each drawn from a run-derived seed.
pub fn partitions(labels: &[Label], runs: usize, folds: usize, seed: u64) -> Result<Vec<Vec<Vec<usize>>>> {
    (0..runs)
        .map(|r| stratified_folds(labels, folds, derive_seed(seed, "folds", &[r as u64])))
        .collect()
}

fn select(ds: &Dataset, ga: &GaConfig, seed: u64) -> Result<Vec<usize>> {
    let config = GaConfig { seed, ..ga.clone() };
    Ok(genetic_select(ds, &config)?.indices())
}

pub fn prepare_cv(dataset: &Dataset, config: &CvConfig, feature_selection: bool) -> Result<PreparedCv> {
    config.validate()?;
    let parts = partitions(dataset.labels(), config.runs, config.folds, config.seed)?;
    let whole_selection = if feature_selection && config.fs_scope == FsScope::WholeDataset {
        let st = Standardizer::fit(dataset.rows())?;
        let std_ds = dataset.with_rows(st.apply(dataset.rows()))?;
        Some(select(&std_ds, &config.ga, derive_seed(config.seed, "ga-whole", &[]))?)
    } else {
        None
    };
    let jobs: Vec<(usize, usize)> = (0..config.runs)
        .flat_map(|r| (0..config.folds).map(move |f| (r, f)))
        .collect();
    let prepared = jobs
        .par_iter()
        .map(|&(run, fold)| {
            let test_indices = parts[run][fold].clone();
            let train_indices = complement(dataset.len(), &test_indices);
            let raw_train = dataset.subset(&train_indices);
            let raw_test = dataset.subset(&test_indices);
            let standardizer = Standardizer::fit(raw_train.rows())?;
            let train = raw_train.with_rows(standardizer.apply(raw_train.rows()))?;
            let test = raw_test.with_rows(standardizer.apply(raw_test.rows()))?;
            let selected = match (&whole_selection, feature_selection) {
                (Some(s), _) => s.clone(),
                (None, true) => select(&train, &config.ga, derive_seed(config.seed, "ga", &[run as u64, fold as u64]))?,
                (None, false) => (0..dataset.n_features()).collect(),
            };
            let (train, test) = if feature_selection {
                (train.select_features(&selected), test.select_features(&selected))
            } else {
                (train, test)
            };
            Ok(PreparedFold {
                run,
                fold,
                test_indices,
                standardizer,
                selected,
                train,
                test,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedCv {
        runs: config.runs,
        folds: config.folds,
        feature_selection,
        partition_hash: hash_partitions(&parts),
        n_instances: dataset.len(),
        labels: dataset.labels().to_vec(),
        prepared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub run: usize,
    pub fold: usize,
    pub auc: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub n_selected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub model: ModelKind,
    pub feature_selection: bool,
    pub runs: usize,
    pub folds: usize,
    pub partition_hash: u64,
    /// Ordered by run, then fold.
    pub entries: Vec<FoldResult>,
    /// Out-of-fold scores per run, indexed like the dataset.
    pub oof_scores: Vec<Vec<f64>>,
    pub oof_predictions: Vec<Vec<Label>>,
    pub labels: Vec<Label>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

impl CvResult {
    pub fn aucs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.auc).collect()
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.accuracy).collect()
    }

    pub fn mean_auc(&self) -> f64 {
        mean(&self.aucs())
    }

    pub fn mean_accuracy(&self) -> f64 {
        mean(&self.accuracies())
    }

    /// Confusion counts of one run, where every instance is tested once.
    pub fn run_confusion(&self, run: usize) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::default();
        for e in self.entries.iter().filter(|e| e.run == run) {
            m.merge(&e.confusion);
        }
        m
    }
}

pub fn evaluate_prepared(cv: &PreparedCv, kind: ModelKind, settings: &ModelSettings, seed: u64) -> Result<CvResult> {
    let outcomes = cv
        .prepared
        .par_iter()
        .map(|p| {
            let model_seed = derive_seed(seed, "model", &[p.run as u64, p.fold as u64]);
            let model = train_model(kind, &p.train, settings, model_seed)?;
            let scores: Vec<f64> = p.test.rows().iter().map(|x| model.score(x)).collect();
            let predictions: Vec<Label> = p.test.rows().iter().map(|x| model.predict(x)).collect();
            let mut confusion = ConfusionMatrix::default();
            for (a, pr) in p.test.labels().iter().zip(&predictions) {
                confusion.add(*a, *pr);
            }
            let result = FoldResult {
                run: p.run,
                fold: p.fold,
                auc: auc(p.test.labels(), &scores)?,
                accuracy: confusion.accuracy(),
                confusion,
                n_selected: p.selected.len(),
            };
            Ok((result, scores, predictions))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut oof_scores = vec![vec![f64::NAN; cv.n_instances]; cv.runs];
    let mut oof_predictions = vec![vec![Label::NonHit; cv.n_instances]; cv.runs];
    let mut entries = Vec::with_capacity(outcomes.len());
    for (p, (result, scores, predictions)) in cv.prepared.iter().zip(outcomes) {
        for ((&i, s), pr) in p.test_indices.iter().zip(scores).zip(predictions) {
            oof_scores[p.run][i] = s;
            oof_predictions[p.run][i] = pr;
        }
        entries.push(result);
    }
    entries.sort_by_key(|e| (e.run, e.fold));
    Ok(CvResult {
        model: kind,
        feature_selection: cv.feature_selection,
        runs: cv.runs,
        folds: cv.folds,
        partition_hash: cv.partition_hash,
        entries,
        oof_scores,
        oof_predictions,
        labels: cv.labels.clone(),
    })
}

/// Repeated stratified cross-validation of one model kind.
pub fn repeated_cv(dataset: &Dataset, kind: ModelKind, config: &CvConfig, feature_selection: bool) -> Result<CvResult> {
    let cv = prepare_cv(dataset, config, feature_selection)?;
    evaluate_prepared(&cv, kind, &config.settings, config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(n: usize, signal: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let hit = i % 3 == 0;
            let shift = if hit { signal } else { 0.0 };
            rows.push(vec![rng.random_range(-1.0..1.0) + shift, rng.random_range(10.0..20.0)]);
            labels.push(if hit { Label::Hit } else { Label::NonHit });
        }
        Dataset::undated(vec!["a".into(), "b".into()], rows, labels).unwrap()
    }

    #[test]
    fn bookkeeping_counts() {
        let ds = toy(60, 3.0, 1);
        let r = repeated_cv(&ds, ModelKind::Logistic, &CvConfig::new(3, 5, 7), false).unwrap();
        assert_eq!(r.entries.len(), 15);
        assert!(r.mean_auc() > 0.95);
        assert_eq!(r.run_confusion(0).total(), 60);
        assert!(r.oof_scores.iter().all(|run| run.iter().all(|s| s.is_finite())));
    }

    #[test]
    fn folds_are_standardized_on_training_rows_only() {
        let ds = toy(40, 1.0, 2);
        let cv = prepare_cv(&ds, &CvConfig::new(2, 4, 3), false).unwrap();
        for p in &cv.prepared {
            let train_idx = complement(ds.len(), &p.test_indices);
            let refit = Standardizer::fit(ds.subset(&train_idx).rows()).unwrap();
            assert_eq!(refit, p.standardizer);
            assert!(p.test_indices.iter().all(|i| !train_idx.contains(i)));
        }
    }

    #[test]
    fn partitions_depend_only_on_seed() {
        let ds = toy(30, 1.0, 4);
        let a = prepare_cv(&ds, &CvConfig::new(2, 3, 11), false).unwrap();
        let b = prepare_cv(&ds, &CvConfig::new(2, 3, 11), true).unwrap();
        let c = prepare_cv(&ds, &CvConfig::new(2, 3, 12), false).unwrap();
        assert_eq!(a.partition_hash, b.partition_hash);
        assert_ne!(a.partition_hash, c.partition_hash);
    }

    #[test]
    fn selection_happens_per_fold() {
        let ds = toy(60, 3.0, 5);
        let cv = prepare_cv(&ds, &CvConfig::new(1, 3, 1), true).unwrap();
        for p in &cv.prepared {
            assert_eq!(p.train.n_features(), p.selected.len());
            assert!(p.selected.contains(&0));
        }
    }

    #[test]
    fn std_helpers() {
        assert_eq!(sample_std(&[1.0]), 0.0);
        assert!((sample_std(&[1.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
