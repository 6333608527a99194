use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelSpec, PairTables};
use super::smo::{default_max_iter, smo_solve_from, GramView, DEFAULT_TOL};
use crate::datamodel::{complement, stratified_folds, Dataset, Label};
use crate::error::{Error, Result};
use crate::eval::metrics::auc;

type FoldAlphas = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Polynomial,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    Four,
    Eight,
}

impl Neighborhood {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Neighborhood::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Neighborhood::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
        }
    }
}

impl FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "4" | "four" => Ok(Neighborhood::Four),
            "8" | "eight" => Ok(Neighborhood::Eight),
            other => Err(Error::InvalidArgument(format!("neighborhood must be 4 or 8, got `{other}`"))),
        }
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Neighborhood::Four => "4",
            Neighborhood::Eight => "8",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub c_values: Vec<f64>,
    pub degrees: Vec<u32>,
    /// Values of `1 / sigma^2`.
    pub gammas: Vec<f64>,
    pub initial_folds: usize,
    pub climb_folds: usize,
    pub neighborhood: Neighborhood,
    pub tol: f64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            c_values: (0..11).map(|i| 1.0 + 2.0 * i as f64).collect(),
            degrees: vec![1, 2],
            gammas: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
            initial_folds: 2,
            climb_folds: 10,
            neighborhood: Neighborhood::Eight,
            tol: DEFAULT_TOL,
            seed: 1,
        }
    }
}

impl GridConfig {
    /// Kernel for grid row `r`.
    pub fn kernel(&self, kind: KernelKind, r: usize) -> KernelSpec {
        match kind {
            KernelKind::Polynomial => KernelSpec::polynomial(self.degrees[r]),
            KernelKind::Rbf => KernelSpec::rbf_gamma(self.gammas[r]),
        }
    }

    fn rows(&self, kind: KernelKind) -> usize {
        match kind {
            KernelKind::Polynomial => self.degrees.len(),
            KernelKind::Rbf => self.gammas.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub kernel: KernelSpec,
    pub c: f64,
    /// `(kernel parameter index, C index)`.
    pub point: (usize, usize),
    pub cv_auc: f64,
}

/// Starts from the best of the row-major `initial` scores and climbs using
/// `climb`, moving to the best strictly improving neighbor until none
/// improves. Ties go to the earlier point in row-major order. `climb` also
/// receives the point being climbed from, if any, so it can reuse its work.
pub fn hill_climb<S, C>(
    shape: (usize, usize),
    neighborhood: Neighborhood,
    initial: &[S],
    climb: C,
) -> ((usize, usize), S)
where
    S: PartialOrd + Copy + Send,
    C: Fn((usize, usize), Option<(usize, usize)>) -> S + Sync,
{
    assert_eq!(initial.len(), shape.0 * shape.1, "one initial score per grid point");
    let mut start = 0;
    for (k, s) in initial.iter().enumerate() {
        if *s > initial[start] {
            start = k;
        }
    }
    let mut memo: HashMap<(usize, usize), S> = HashMap::new();
    let mut current = (start / shape.1, start % shape.1);
    let mut current_score = climb(current, None);
    memo.insert(current, current_score);
    loop {
        let neighbors: Vec<(usize, usize)> = neighborhood
            .offsets()
            .iter()
            .filter_map(|&(dr, dc)| {
                let r = current.0.checked_add_signed(dr)?;
                let c = current.1.checked_add_signed(dc)?;
                (r < shape.0 && c < shape.1).then_some((r, c))
            })
            .collect();
        let fresh: Vec<(usize, usize)> = neighbors.iter().copied().filter(|p| !memo.contains_key(p)).collect();
        let scored: Vec<S> = fresh.par_iter().map(|&p| climb(p, Some(current))).collect();
        memo.extend(fresh.into_iter().zip(scored));
        let mut next: Option<((usize, usize), S)> = None;
        for p in neighbors {
            let s = memo[&p];
            if s > next.map_or(current_score, |(_, b)| b) {
                next = Some((p, s));
            }
        }
        match next {
            Some((p, s)) => {
                current = p;
                current_score = s;
            }
            None => return (current, current_score),
        }
    }
}

/// Grid-point score. Compared on AUC first; accuracy only separates ties,
/// which matter when a nearly flat kernel ranks well but thresholds badly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CvScore {
    pub auc: f64,
    pub accuracy: f64,
}

/// Per-fold multipliers from an earlier solve, used as SMO starting points.
pub struct WarmStart<'a> {
    pub c: f64,
    pub alphas: &'a [Vec<f64>],
}

/// Cross-validated AUC and accuracy of an SVM with kernel matrix `gram`
/// over all rows, with out-of-fold margins pooled before ranking. Also
/// returns the multipliers of every fold.
pub fn cv_score(
    gram: &[f64],
    labels: &[Label],
    folds: &[Vec<usize>],
    c: f64,
    tol: f64,
    warm: Option<WarmStart<'_>>,
) -> (CvScore, Vec<Vec<f64>>) {
    let n = labels.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let mut scores = vec![0.0; n];
    let mut alphas = Vec::with_capacity(folds.len());
    for (k, fold) in folds.iter().enumerate() {
        let train = complement(n, fold);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let view = GramView {
            matrix: gram,
            stride: n,
            idx: &train,
        };
        // Scaling keeps sum(alpha y) = 0 and maps [0, c0] onto [0, c].
        let init: Option<Vec<f64>> = warm
            .as_ref()
            .map(|w| w.alphas[k].iter().map(|a| a * c / w.c).collect());
        let sol = smo_solve_from(view, &y_train, c, tol, default_max_iter(train.len()), init.as_deref());
        for &t in fold {
            scores[t] = train
                .iter()
                .zip(&sol.alpha)
                .filter(|(_, a)| **a > 0.0)
                .map(|(&i, a)| a * y[i] * gram[i * n + t])
                .sum::<f64>()
                + sol.b;
        }
        alphas.push(sol.alpha);
    }
    let correct = labels
        .iter()
        .zip(&scores)
        .filter(|(l, s)| l.is_hit() == (**s >= 0.0))
        .count();
    let score = CvScore {
        auc: auc(labels, &scores).unwrap_or(0.5),
        accuracy: correct as f64 / n as f64,
    };
    (score, alphas)
}

/// [`cv_score`] from scratch over precomputed pair tables.
pub fn cv_auc(tables: &PairTables, labels: &[Label], folds: &[Vec<usize>], kernel: &KernelSpec, c: f64, tol: f64) -> CvScore {
    cv_score(&tables.gram(kernel), labels, folds, c, tol, None).0
}

fn folds_for(labels: &[Label], wanted: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let hits = labels.iter().filter(|l| l.is_hit()).count();
    let minority = hits.min(labels.len() - hits);
    let k = wanted.min(minority);
    if k < 2 {
        return Err(Error::ClassTooSmall {
            class: if hits <= labels.len() - hits { "Hit".into() } else { "NonHit".into() },
            count: minority,
            folds: 2,
        });
    }
    stratified_folds(labels, k, seed)
}

/// Picks kernel parameter and C by CV AUC: a coarse pass over the whole grid,
/// then a hill climb with finer CV.
pub fn grid_search_svm(train: &Dataset, kind: KernelKind, config: &GridConfig) -> Result<GridResult> {
    if config.c_values.is_empty() || config.rows(kind) == 0 {
        return Err(Error::InvalidArgument("empty SVM grid".into()));
    }
    let labels = train.labels();
    let tables = PairTables::new(train.rows());
    let coarse = folds_for(labels, config.initial_folds, config.seed)?;
    let fine = folds_for(labels, config.climb_folds, config.seed)?;
    let shape = (config.rows(kind), config.c_values.len());

    // Coarse pass: one kernel matrix per row, C ascending, each solve
    // warm-started from the previous C of the same fold.
    let initial: Vec<CvScore> = (0..shape.0)
        .into_par_iter()
        .flat_map_iter(|r| {
            let gram = tables.gram(&config.kernel(kind, r));
            let mut prev: Option<(f64, Vec<Vec<f64>>)> = None;
            let mut row = Vec::with_capacity(shape.1);
            for &c in &config.c_values {
                let warm = prev.as_ref().map(|(pc, a)| WarmStart { c: *pc, alphas: a });
                let (score, alphas) = cv_score(&gram, labels, &coarse, c, config.tol, warm);
                row.push(score);
                prev = Some((c, alphas));
            }
            row
        })
        .collect();

    // Per-fold alphas keyed by grid point, reused to warm-start neighbors.
    let solved: Mutex<HashMap<(usize, usize), FoldAlphas>> = Mutex::new(HashMap::new());
    let (point, score) = hill_climb(shape, config.neighborhood, &initial, |p, from| {
        let seed = from.and_then(|f| solved.lock().expect("solution cache").get(&f).cloned());
        let c = config.c_values[p.1];
        let warm = from
            .zip(seed.as_ref())
            .map(|(f, a)| WarmStart { c: config.c_values[f.1], alphas: a });
        let gram = tables.gram(&config.kernel(kind, p.0));
        let (score, alphas) = cv_score(&gram, labels, &fine, c, config.tol, warm);
        solved.lock().expect("solution cache").insert(p, alphas);
        score
    });
    Ok(GridResult {
        kernel: config.kernel(kind, point.0),
        c: config.c_values[point.1],
        point,
        cv_auc: score.auc,
    })
}
