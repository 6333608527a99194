use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::ModelKind;
use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::eval::cv::{evaluate_prepared, mean, prepare_cv, sample_std, CvConfig, CvResult};
use crate::eval::wilcoxon::wilcoxon_signed_rank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "best")]
    Best,
    #[serde(rename = "p<0.01")]
    Below01,
    #[serde(rename = "p<=0.05")]
    Below05,
    #[serde(rename = "ns")]
    NotSignificant,
}

impl Flag {
    pub fn from_p(p: f64) -> Flag {
        if p < 0.01 {
            Flag::Below01
        } else if p <= 0.05 {
            Flag::Below05
        } else {
            Flag::NotSignificant
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Best => "best",
            Flag::Below01 => "p<0.01",
            Flag::Below05 => "p<=0.05",
            Flag::NotSignificant => "ns",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    /// Wilcoxon p-value against the best model; `None` for the best itself.
    pub p_value: Option<f64>,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub feature_selection: bool,
    pub auc: MetricSummary,
    pub accuracy: MetricSummary,
}

fn summarize(samples: &[Vec<f64>]) -> Result<Vec<MetricSummary>> {
    let means: Vec<f64> = samples.iter().map(|s| mean(s)).collect();
    let mut best = 0;
    for (i, m) in means.iter().enumerate() {
        if *m > means[best] {
            best = i;
        }
    }
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (p_value, flag) = if i == best {
                (None, Flag::Best)
            } else {
                let p = wilcoxon_signed_rank(s, &samples[best])?.p_value;
                (Some(p), Flag::from_p(p))
            };
            Ok(MetricSummary {
                mean: means[i],
                std: sample_std(s),
                p_value,
                flag,
            })
        })
        .collect()
}

/// Flags every result against the best of its group. Results sharing a
/// feature-selection setting form one group and must share fold partitions.
pub fn compare_results(results: &[CvResult]) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(results.len());
    for fs in [false, true] {
        let group: Vec<&CvResult> = results.iter().filter(|r| r.feature_selection == fs).collect();
        if group.is_empty() {
            continue;
        }
        if group.iter().any(|r| r.partition_hash != group[0].partition_hash) {
            return Err(Error::InvalidArgument("compared models were run on different fold partitions".into()));
        }
        let aucs: Vec<Vec<f64>> = group.iter().map(|r| r.aucs()).collect();
        let accs: Vec<Vec<f64>> = group.iter().map(|r| r.accuracies()).collect();
        let auc_summary = summarize(&aucs)?;
        let acc_summary = summarize(&accs)?;
        for ((r, a), c) in group.iter().zip(auc_summary).zip(acc_summary) {
            rows.push(ComparisonRow {
                model: r.model,
                feature_selection: fs,
                auc: a,
                accuracy: c,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub results: Vec<CvResult>,
}

/// Evaluates every model on shared fold partitions for each requested
/// feature-selection setting and tests each against the best.
pub fn compare_models(dataset: &Dataset, models: &[ModelKind], config: &CvConfig, fs_settings: &[bool]) -> Result<Comparison> {
    if models.is_empty() || fs_settings.is_empty() {
        return Err(Error::InvalidArgument("need at least one model and one feature-selection setting".into()));
    }
    let mut results = Vec::new();
    for &fs in fs_settings {
        let cv = prepare_cv(dataset, config, fs)?;
        for &kind in models {
            log::info!("evaluating {kind} (fs={fs})");
            results.push(evaluate_prepared(&cv, kind, &config.settings, config.seed)?);
        }
    }
    let rows = compare_results(&results)?;
    Ok(Comparison { rows, results })
}
