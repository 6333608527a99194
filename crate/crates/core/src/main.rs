use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hitpredict::classifiers::ModelKind;
use hitpredict::commands;
use hitpredict::config::{PipelineConfig, Settings};
use hitpredict::synthetic::{Scenario, DEFAULT_SONGS};

#[derive(Parser)]
#[command(name = "hitpredict", version, about = "Dance-hit prediction from audio analysis features")]
struct Cli {
    /// Flat TOML file with default settings; flags and HITPREDICT_* variables override it.
    #[arg(long, global = true, env = "HITPREDICT_CONFIG")]
    config: Option<PathBuf>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Inputs {
    /// Chart listings CSV (title,artist,position,date).
    #[arg(long, env = "HITPREDICT_CHARTS")]
    charts: Option<PathBuf>,
    /// Directory of per-song analysis JSON files.
    #[arg(long, env = "HITPREDICT_ANALYSES")]
    analyses: Option<PathBuf>,
    /// Gap scheme: D1, D2 or D3.
    #[arg(long, env = "HITPREDICT_SCHEME")]
    scheme: Option<String>,
    #[arg(long, env = "HITPREDICT_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "HITPREDICT_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct Experiment {
    /// Prebuilt dataset CSV; replaces --charts/--analyses.
    #[arg(long, env = "HITPREDICT_DATASET")]
    dataset: Option<PathBuf>,
    #[arg(long, env = "HITPREDICT_RUNS")]
    runs: Option<usize>,
    #[arg(long, env = "HITPREDICT_FOLDS")]
    folds: Option<usize>,
    /// Run with feature selection (combine with --no-fs for both).
    #[arg(long, env = "HITPREDICT_FS")]
    fs: bool,
    /// Run without feature selection.
    #[arg(long, env = "HITPREDICT_NO_FS")]
    no_fs: bool,
    /// Comma-separated: c45, ripper, nb, logistic, svm-poly, svm-rbf.
    #[arg(long, env = "HITPREDICT_MODELS", value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Where feature selection is fitted: per-fold or whole-dataset.
    #[arg(long, env = "HITPREDICT_FS_SCOPE")]
    fs_scope: Option<String>,
    /// SVM grid hill-climb neighborhood: 4 or 8.
    #[arg(long, env = "HITPREDICT_SVM_NEIGHBORHOOD")]
    svm_neighborhood: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the gap-labeled feature dataset.
    BuildDataset {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Repeated cross-validation of every model, with significance flags.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        experiment: Experiment,
    },
    /// Train on the earliest rows by date, test on the latest.
    Oot {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        experiment: Experiment,
        /// Fraction of rows used for training.
        #[arg(long, env = "HITPREDICT_OOT_FRACTION")]
        fraction: Option<f64>,
    },
    /// Fit one model on the whole dataset and save it as model.json.
    Train {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, env = "HITPREDICT_DATASET")]
        dataset: Option<PathBuf>,
        #[arg(long, env = "HITPREDICT_MODEL", default_value = "logistic")]
        model: ModelKind,
        /// Apply feature selection before fitting.
        #[arg(long, env = "HITPREDICT_FS")]
        fs: bool,
    },
    /// Score one song analysis with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        analysis: PathBuf,
    },
    /// Yearly means and linear trends of selected features.
    Trends {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated feature names.
        #[arg(long, env = "HITPREDICT_FEATURES", value_delimiter = ',')]
        features: Option<Vec<String>>,
        /// Only songs peaking at or above this position.
        #[arg(long, env = "HITPREDICT_TOP")]
        top: Option<u32>,
    },
    /// Write a synthetic chart CSV and analyses directory.
    GenSynthetic {
        #[arg(long, env = "HITPREDICT_SCENARIO", default_value = "separable")]
        scenario: Scenario,
        #[arg(long, env = "HITPREDICT_N_SONGS", default_value_t = DEFAULT_SONGS)]
        n_songs: usize,
        #[arg(long, env = "HITPREDICT_OUT")]
        out: Option<PathBuf>,
        #[arg(long, env = "HITPREDICT_SEED")]
        seed: Option<u64>,
    },
}

impl Inputs {
    fn settings(self) -> Settings {
        Settings {
            charts: self.charts,
            analyses: self.analyses,
            scheme: self.scheme,
            out: self.out,
            seed: self.seed,
            ..Default::default()
        }
    }
}

impl Experiment {
    fn apply(self, s: Settings) -> Settings {
        let fs = match (self.fs, self.no_fs) {
            (true, true) => Some("both".to_string()),
            (true, false) => Some("on".to_string()),
            (false, true) => Some("off".to_string()),
            (false, false) => None,
        };
        Settings {
            dataset: self.dataset,
            runs: self.runs,
            folds: self.folds,
            fs,
            models: self.models,
            fs_scope: self.fs_scope,
            svm_neighborhood: self.svm_neighborhood,
            ..s
        }
    }
}

fn resolve(config: &Option<PathBuf>, cli: Settings) -> anyhow::Result<PipelineConfig> {
    let file = match config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    Ok(PipelineConfig::resolve(cli.over(file))?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::BuildDataset { inputs } => {
            let cfg = resolve(&cli.config, inputs.settings())?;
            let report = commands::build_dataset(&cfg).context("build-dataset failed")?;
            println!(
                "{} rows ({} hits, {} non-hits); {} excluded by gap, {} without analysis, {} unusable",
                report.hits + report.nonhits,
                report.hits,
                report.nonhits,
                report.excluded_by_gap,
                report.missing_analysis,
                report.unusable_analysis
            );
        }
        Command::Evaluate { inputs, experiment } => {
            let cfg = resolve(&cli.config, experiment.apply(inputs.settings()))?;
            let cmp = commands::evaluate(&cfg).context("evaluate failed")?;
            print!("{}", commands::results_text(&cmp));
        }
        Command::Oot {
            inputs,
            experiment,
            fraction,
        } => {
            let mut s = experiment.apply(inputs.settings());
            s.oot_fraction = fraction;
            let cfg = resolve(&cli.config, s)?;
            let rows = commands::out_of_time(&cfg).context("oot failed")?;
            if let Some(r) = rows.first() {
                println!(
                    "train {} / test {} ({} hits, {} non-hits)",
                    r.n_train, r.n_test, r.test_hits, r.test_nonhits
                );
            }
            for r in &rows {
                println!(
                    "{:<10} {:<5} split auc {:.4} acc {:.4} | cv auc {:.4} acc {:.4}",
                    r.model.as_str(),
                    if r.feature_selection { "fs" } else { "nofs" },
                    r.split_auc,
                    r.split_accuracy,
                    r.cv_auc,
                    r.cv_accuracy
                );
            }
        }
        Command::Train {
            inputs,
            dataset,
            model,
            fs,
        } => {
            let mut s = inputs.settings();
            s.dataset = dataset;
            let cfg = resolve(&cli.config, s)?;
            let path = commands::train(&cfg, model, fs).context("train failed")?;
            println!("{}", path.display());
        }
        Command::Predict { model, analysis } => {
            let p = commands::predict(&model, &analysis).context("predict failed")?;
            println!("score\tclass");
            println!("{}\t{}", p.score, p.label);
        }
        Command::Trends { inputs, features, top } => {
            let mut s = inputs.settings();
            s.features = features;
            s.top = top;
            let cfg = resolve(&cli.config, s)?;
            for (name, line) in commands::trends(&cfg).context("trends failed")? {
                println!("{name}: slope {} intercept {} over {} years", line.slope, line.intercept, line.n_years);
            }
        }
        Command::GenSynthetic {
            scenario,
            n_songs,
            out,
            seed,
        } => {
            let cfg = resolve(
                &cli.config,
                Settings {
                    out,
                    seed,
                    ..Default::default()
                },
            )?;
            commands::gen_synthetic(&cfg.out, cfg.seed, n_songs, scenario).context("gen-synthetic failed")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already embed their source text; skip repeats.
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
