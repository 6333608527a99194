//! The work behind each CLI subcommand. Inputs are validated before any
//! output is written, and every output lands under the configured directory.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Datelike;
use serde::Serialize;

use crate::classifiers::ModelKind;
use crate::config::PipelineConfig;
use crate::datamodel::{
    assemble_dataset, compute_peaks, load_analyses_dir, out_of_time_split, parse_chart_csv, AssemblyReport, Dataset,
    SongAnalysis,
};
use crate::error::{Error, Result};
use crate::eval::{compare_models, roc_auc, Comparison, ConfusionMatrix};
use crate::features::{feature_names, feature_vector, yearly_trend, TrendLine};
use crate::pipeline::{Prediction, TrainedPipeline};
use crate::preprocess::GaConfig;
use crate::seed::derive_seed;
use crate::synthetic::{generate, write_corpus, Scenario, SyntheticConfig};

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create_file(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn require_dir(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| Error::Config(format!("{what} directory not configured")))?;
    if !p.is_dir() {
        return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} directory not found"))));
    }
    Ok(p)
}

fn require_file(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let p = path.clone().ok_or_else(|| Error::Config(format!("{what} file not configured")))?;
    if !p.is_file() {
        return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} file not found"))));
    }
    Ok(p)
}

/// Charts and analyses from the configured inputs.
fn load_inputs(cfg: &PipelineConfig) -> Result<(Vec<crate::datamodel::PeakRecord>, Vec<SongAnalysis>)> {
    let charts = require_file(&cfg.charts, "charts")?;
    let analyses_dir = require_dir(&cfg.analyses, "analyses")?;
    let parsed = parse_chart_csv(&charts)?;
    if parsed.skipped > 0 {
        log::warn!("skipped {} unparseable chart rows", parsed.skipped);
    }
    let analyses = load_analyses_dir(&analyses_dir)?;
    Ok((compute_peaks(&parsed.listings), analyses))
}

pub fn assemble(cfg: &PipelineConfig) -> Result<(Dataset, AssemblyReport)> {
    let (peaks, analyses) = load_inputs(cfg)?;
    assemble_dataset(&peaks, &analyses, &cfg.scheme, feature_vector)
}

/// The configured dataset CSV if set, otherwise one assembled from charts
/// and analyses.
pub fn load_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    match &cfg.dataset {
        Some(_) => Dataset::load(require_file(&cfg.dataset, "dataset")?),
        None => Ok(assemble(cfg)?.0),
    }
}

pub fn build_dataset(cfg: &PipelineConfig) -> Result<AssemblyReport> {
    let (dataset, report) = assemble(cfg)?;
    create_dir(&cfg.out)?;
    dataset.save(cfg.out.join("dataset.csv"))?;
    write_text(&cfg.out.join("build_report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

fn fs_tag(fs: bool) -> &'static str {
    if fs {
        "fs"
    } else {
        "nofs"
    }
}

fn opt(p: Option<f64>) -> String {
    p.map_or_else(String::new, |v| v.to_string())
}

pub fn write_results_csv<W: Write>(cmp: &Comparison, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model", "fs", "auc_mean", "auc_std", "auc_p", "auc_flag", "acc_mean", "acc_std", "acc_p", "acc_flag",
    ])?;
    for r in &cmp.rows {
        w.write_record([
            r.model.to_string(),
            fs_tag(r.feature_selection).to_string(),
            r.auc.mean.to_string(),
            r.auc.std.to_string(),
            opt(r.auc.p_value),
            r.auc.flag.to_string(),
            r.accuracy.mean.to_string(),
            r.accuracy.std.to_string(),
            opt(r.accuracy.p_value),
            r.accuracy.flag.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn results_text(cmp: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<5} {:>8} {:>8} {:>9} {:<8} {:>8} {:>8} {:>9} {:<8}",
        "model", "fs", "auc", "auc_sd", "auc_p", "flag", "acc", "acc_sd", "acc_p", "flag"
    );
    let p = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for r in &cmp.rows {
        let _ = writeln!(
            s,
            "{:<10} {:<5} {:>8.4} {:>8.4} {:>9} {:<8} {:>8.4} {:>8.4} {:>9} {:<8}",
            r.model.as_str(),
            fs_tag(r.feature_selection),
            r.auc.mean,
            r.auc.std,
            p(r.auc.p_value),
            r.auc.flag.as_str(),
            r.accuracy.mean,
            r.accuracy.std,
            p(r.accuracy.p_value),
            r.accuracy.flag.as_str()
        );
    }
    s
}

fn write_cv_folds<W: Write>(cmp: &Comparison, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "fs", "run", "fold", "auc", "accuracy", "tp", "fn", "fp", "tn", "n_selected"])?;
    for res in &cmp.results {
        for e in &res.entries {
            w.write_record([
                res.model.to_string(),
                fs_tag(res.feature_selection).to_string(),
                e.run.to_string(),
                e.fold.to_string(),
                e.auc.to_string(),
                e.accuracy.to_string(),
                e.confusion.tp.to_string(),
                e.confusion.fn_.to_string(),
                e.confusion.fp.to_string(),
                e.confusion.tn.to_string(),
                e.n_selected.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Runs the configured model comparison and writes `results.csv`,
/// `results.txt`, `cv_folds.csv`, plus per-model ROC and confusion CSVs
/// from the first run's out-of-fold predictions.
pub fn evaluate(cfg: &PipelineConfig) -> Result<Comparison> {
    let dataset = load_dataset(cfg)?;
    let cmp = compare_models(&dataset, &cfg.models, &cfg.cv_config(), &cfg.fs)?;
    create_dir(&cfg.out)?;
    write_results_csv(&cmp, create_file(&cfg.out.join("results.csv"))?)?;
    write_text(&cfg.out.join("results.txt"), &results_text(&cmp))?;
    write_cv_folds(&cmp, create_file(&cfg.out.join("cv_folds.csv"))?)?;
    for res in &cmp.results {
        let tag = format!("{}_{}", res.model, fs_tag(res.feature_selection));
        let (roc, _) = roc_auc(&res.labels, &res.oof_scores[0])?;
        roc.write_csv(create_file(&cfg.out.join("roc").join(format!("{tag}.csv")))?)?;
        res.run_confusion(0)
            .write_csv(create_file(&cfg.out.join("confusion").join(format!("{tag}.csv")))?)?;
    }
    Ok(cmp)
}

fn ga_for(cfg: &PipelineConfig, fs: bool, label: &str) -> Option<GaConfig> {
    fs.then(|| GaConfig {
        seed: derive_seed(cfg.seed, label, &[]),
        ..cfg.ga.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OotRow {
    pub model: ModelKind,
    pub feature_selection: bool,
    pub split_auc: f64,
    pub split_accuracy: f64,
    pub cv_auc: f64,
    pub cv_accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub test_hits: usize,
    pub test_nonhits: usize,
}

/// Trains on the earliest `oot_fraction` of rows by date, tests on the
/// rest, and reports the split next to cross-validation on all rows.
pub fn out_of_time(cfg: &PipelineConfig) -> Result<Vec<OotRow>> {
    let dataset = load_dataset(cfg)?;
    let (train, test) = out_of_time_split(&dataset, cfg.oot_fraction)?;
    if !train.has_both_classes() || !test.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let cmp = compare_models(&dataset, &cfg.models, &cfg.cv_config(), &cfg.fs)?;
    let (test_hits, test_nonhits) = test.class_counts();
    let mut rows = Vec::new();
    for &fs in &cfg.fs {
        let ga = ga_for(cfg, fs, "ga-oot");
        for &kind in &cfg.models {
            let pipeline = TrainedPipeline::fit(&train, kind, &cfg.settings, ga.as_ref(), derive_seed(cfg.seed, "oot-model", &[]))?;
            let preds: Vec<Prediction> = test.rows().iter().map(|r| pipeline.predict_row(r)).collect();
            let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
            let mut confusion = ConfusionMatrix::default();
            for (l, p) in test.labels().iter().zip(&preds) {
                confusion.add(*l, p.label);
            }
            let (roc, split_auc) = roc_auc(test.labels(), &scores)?;
            roc.write_csv(create_file(&cfg.out.join("roc_oot").join(format!("{kind}_{}.csv", fs_tag(fs))))?)?;
            let cv = cmp
                .rows
                .iter()
                .find(|r| r.model == kind && r.feature_selection == fs)
                .expect("comparison covers every configured model");
            rows.push(OotRow {
                model: kind,
                feature_selection: fs,
                split_auc,
                split_accuracy: confusion.accuracy(),
                cv_auc: cv.auc.mean,
                cv_accuracy: cv.accuracy.mean,
                n_train: train.len(),
                n_test: test.len(),
                test_hits,
                test_nonhits,
            });
        }
    }
    create_dir(&cfg.out)?;
    let mut w = csv::Writer::from_writer(create_file(&cfg.out.join("oot.csv"))?);
    w.write_record([
        "model", "fs", "split_auc", "split_accuracy", "cv_auc", "cv_accuracy", "n_train", "n_test", "test_hits",
        "test_nonhits",
    ])?;
    for r in &rows {
        w.write_record([
            r.model.to_string(),
            fs_tag(r.feature_selection).to_string(),
            r.split_auc.to_string(),
            r.split_accuracy.to_string(),
            r.cv_auc.to_string(),
            r.cv_accuracy.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            r.test_hits.to_string(),
            r.test_nonhits.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(rows)
}

/// Fits one pipeline on the whole dataset and saves it as `model.json`.
pub fn train(cfg: &PipelineConfig, kind: ModelKind, feature_selection: bool) -> Result<PathBuf> {
    let dataset = load_dataset(cfg)?;
    let ga = ga_for(cfg, feature_selection, "ga-train");
    let pipeline = TrainedPipeline::fit(&dataset, kind, &cfg.settings, ga.as_ref(), derive_seed(cfg.seed, "train-model", &[]))?;
    create_dir(&cfg.out)?;
    let path = cfg.out.join("model.json");
    pipeline.save(&path)?;
    Ok(path)
}

pub fn predict(model: &Path, analysis: &Path) -> Result<Prediction> {
    let pipeline = TrainedPipeline::load(model)?;
    let analysis = SongAnalysis::load(analysis)?;
    pipeline.predict_analysis(&analysis)
}

/// Yearly means and OLS trend lines for the requested features, written as
/// `trend_<feature>.csv` files and a `trends.csv` summary.
pub fn trends(cfg: &PipelineConfig) -> Result<Vec<(String, TrendLine)>> {
    let names = feature_names();
    if cfg.features.is_empty() {
        return Err(Error::Config("no features requested for trends".into()));
    }
    let mut columns = Vec::new();
    for f in &cfg.features {
        let j = names.iter().position(|n| n == f).ok_or_else(|| Error::UnknownFeature {
            name: f.clone(),
            valid: names.to_vec(),
        })?;
        columns.push((f.clone(), j));
    }
    let (peaks, analyses) = load_inputs(cfg)?;
    let by_key: std::collections::HashMap<_, _> = analyses.iter().map(|a| (a.song_key(), a)).collect();
    let mut rows: Vec<(chrono::NaiveDate, Vec<f64>)> = Vec::new();
    for p in &peaks {
        if cfg.top.is_some_and(|t| p.peak_position > t) {
            continue;
        }
        let Some(a) = by_key.get(&p.song_key) else { continue };
        match feature_vector(a) {
            Ok(fv) => rows.push((p.first_date, fv.values)),
            Err(e) => log::warn!("{}: {e}", p.song_key),
        }
    }

    let mut out = Vec::new();
    let mut series = Vec::new();
    for (name, j) in &columns {
        let points: Vec<_> = rows.iter().map(|(d, v)| (*d, v[*j])).collect();
        let (means, line) = yearly_trend(&points)?;
        series.push((name.clone(), means));
        out.push((name.clone(), line));
    }
    create_dir(&cfg.out)?;
    for (name, means) in &series {
        let mut w = csv::Writer::from_writer(create_file(&cfg.out.join(format!("trend_{name}.csv")))?);
        w.write_record(["year", "mean"])?;
        for (y, m) in means {
            w.write_record([y.to_string(), m.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
    }
    let mut w = csv::Writer::from_writer(create_file(&cfg.out.join("trends.csv"))?);
    w.write_record(["feature", "slope", "intercept", "n_years"])?;
    for (name, l) in &out {
        w.write_record([name.clone(), l.slope.to_string(), l.intercept.to_string(), l.n_years.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(out)
}

pub fn gen_synthetic(out: &Path, seed: u64, n_songs: usize, scenario: Scenario) -> Result<()> {
    let corpus = generate(&SyntheticConfig::new(seed, n_songs, scenario))?;
    write_corpus(&corpus, out)?;
    let years: Vec<i32> = corpus.listings.iter().map(|l| l.date.year()).collect();
    log::info!(
        "wrote {} songs, {} chart rows, years {}..={}",
        corpus.analyses.len(),
        corpus.listings.len(),
        years.iter().min().copied().unwrap_or_default(),
        years.iter().max().copied().unwrap_or_default()
    );
    Ok(())
}
