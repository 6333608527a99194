//! Experiment configuration: a flat TOML file merged under command-line
//! values (which already include `HITPREDICT_*` environment overrides).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::classifiers::{ModelKind, ModelSettings};
use crate::classifiers::svm::Neighborhood;
use crate::datamodel::GapScheme;
use crate::error::{Error, Result};
use crate::eval::{CvConfig, FsScope};
use crate::preprocess::GaConfig;

/// Every key is optional; unset keys fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub charts: Option<PathBuf>,
    pub analyses: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub scheme: Option<String>,
    pub runs: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    /// `on`, `off` or `both`.
    pub fs: Option<String>,
    /// `per-fold` or `whole-dataset`.
    pub fs_scope: Option<String>,
    pub models: Option<Vec<String>>,
    pub oot_fraction: Option<f64>,
    pub features: Option<Vec<String>>,
    pub top: Option<u32>,
    pub ga_population: Option<usize>,
    pub ga_generations: Option<usize>,
    pub ga_crossover: Option<f64>,
    pub ga_mutation: Option<f64>,
    pub svm_c: Option<Vec<f64>>,
    pub svm_gamma: Option<Vec<f64>>,
    pub svm_degree: Option<Vec<u32>>,
    pub svm_neighborhood: Option<u32>,
    pub svm_tol: Option<f64>,
    pub svm_initial_folds: Option<usize>,
    pub svm_climb_folds: Option<usize>,
    pub c45_min_leaf: Option<usize>,
    pub c45_confidence: Option<f64>,
    pub c45_max_depth: Option<usize>,
    pub ripper_folds: Option<usize>,
    pub ripper_min_weight: Option<usize>,
    pub ripper_optimize_runs: Option<usize>,
    pub logistic_lambda: Option<f64>,
    pub logistic_tol: Option<f64>,
    pub logistic_max_iter: Option<usize>,
    pub nb_variance_floor: Option<f64>,
}

macro_rules! layer {
    ($hi:ident, $lo:ident, $($f:ident),*) => {
        Settings { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Settings> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Settings> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Values in `self` win; gaps are filled from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        let hi = self;
        let lo = lower;
        layer!(
            hi, lo, charts, analyses, dataset, out, scheme, runs, folds, seed, fs, fs_scope, models, oot_fraction,
            features, top, ga_population, ga_generations, ga_crossover, ga_mutation, svm_c, svm_gamma, svm_degree,
            svm_neighborhood, svm_tol, svm_initial_folds, svm_climb_folds, c45_min_leaf, c45_confidence,
            c45_max_depth, ripper_folds, ripper_min_weight, ripper_optimize_runs, logistic_lambda, logistic_tol,
            logistic_max_iter, nb_variance_floor
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub charts: Option<PathBuf>,
    pub analyses: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
    pub scheme: GapScheme,
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    /// Feature-selection settings to run, in order.
    pub fs: Vec<bool>,
    pub fs_scope: FsScope,
    pub models: Vec<ModelKind>,
    pub oot_fraction: f64,
    pub features: Vec<String>,
    pub top: Option<u32>,
    pub ga: GaConfig,
    pub settings: ModelSettings,
}

fn parse_fs(s: &str) -> Result<Vec<bool>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => Ok(vec![true]),
        "off" | "false" | "no" => Ok(vec![false]),
        "both" => Ok(vec![false, true]),
        other => Err(Error::Config(format!("fs must be on, off or both, got `{other}`"))),
    }
}

impl PipelineConfig {
    pub fn resolve(s: Settings) -> Result<PipelineConfig> {
        let seed = s.seed.unwrap_or(1);
        let scheme: GapScheme = s.scheme.as_deref().unwrap_or("D1").parse()?;
        let models = match &s.models {
            Some(list) => list.iter().map(|m| m.parse()).collect::<Result<Vec<ModelKind>>>()?,
            None => ModelKind::ALL.to_vec(),
        };
        if models.is_empty() {
            return Err(Error::Config("model list is empty".into()));
        }
        let fs = parse_fs(s.fs.as_deref().unwrap_or("both"))?;
        let fs_scope = match s.fs_scope.as_deref().unwrap_or("per-fold") {
            "per-fold" => FsScope::PerFold,
            "whole-dataset" => FsScope::WholeDataset,
            other => return Err(Error::Config(format!("fs_scope must be per-fold or whole-dataset, got `{other}`"))),
        };

        let mut ga = GaConfig::with_seed(seed);
        ga.population_size = s.ga_population.unwrap_or(ga.population_size);
        ga.generations = s.ga_generations.unwrap_or(ga.generations);
        ga.crossover_prob = s.ga_crossover.unwrap_or(ga.crossover_prob);
        ga.mutation_prob = s.ga_mutation.unwrap_or(ga.mutation_prob);
        ga.validate()?;

        let mut settings = ModelSettings::default();
        let grid = &mut settings.svm_grid;
        grid.c_values = s.svm_c.clone().unwrap_or(grid.c_values.clone());
        grid.gammas = s.svm_gamma.clone().unwrap_or(grid.gammas.clone());
        grid.degrees = s.svm_degree.clone().unwrap_or(grid.degrees.clone());
        if let Some(n) = s.svm_neighborhood {
            grid.neighborhood = n.to_string().parse::<Neighborhood>()?;
        }
        grid.tol = s.svm_tol.unwrap_or(grid.tol);
        grid.initial_folds = s.svm_initial_folds.unwrap_or(grid.initial_folds);
        grid.climb_folds = s.svm_climb_folds.unwrap_or(grid.climb_folds);
        settings.c45.min_leaf = s.c45_min_leaf.unwrap_or(settings.c45.min_leaf);
        settings.c45.prune_confidence = s.c45_confidence.unwrap_or(settings.c45.prune_confidence);
        settings.c45.max_depth = s.c45_max_depth.or(settings.c45.max_depth);
        settings.ripper.folds = s.ripper_folds.unwrap_or(settings.ripper.folds);
        settings.ripper.min_weight = s.ripper_min_weight.unwrap_or(settings.ripper.min_weight);
        settings.ripper.optimize_runs = s.ripper_optimize_runs.unwrap_or(settings.ripper.optimize_runs);
        settings.logistic.lambda = s.logistic_lambda.unwrap_or(settings.logistic.lambda);
        settings.logistic.tol = s.logistic_tol.unwrap_or(settings.logistic.tol);
        settings.logistic.max_iter = s.logistic_max_iter.unwrap_or(settings.logistic.max_iter);
        settings.nb_variance_floor = s.nb_variance_floor.unwrap_or(settings.nb_variance_floor);

        let oot_fraction = s.oot_fraction.unwrap_or(0.9);
        if !(oot_fraction > 0.0 && oot_fraction < 1.0) {
            return Err(Error::Config(format!("oot_fraction must be in (0, 1), got {oot_fraction}")));
        }
        Ok(PipelineConfig {
            charts: s.charts,
            analyses: s.analyses,
            dataset: s.dataset,
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            scheme,
            runs: s.runs.unwrap_or(10),
            folds: s.folds.unwrap_or(10),
            seed,
            fs,
            fs_scope,
            models,
            oot_fraction,
            features: s.features.unwrap_or_default(),
            top: s.top,
            ga,
            settings,
        })
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            runs: self.runs,
            folds: self.folds,
            seed: self.seed,
            fs_scope: self.fs_scope,
            ga: self.ga.clone(),
            settings: self.settings.clone(),
        }
    }
}
