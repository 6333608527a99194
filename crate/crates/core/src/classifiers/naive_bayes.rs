use serde::{Deserialize, Serialize};

use crate::datamodel::{Dataset, Label};
use crate::error::{Error, Result};

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-9;

/// Per-class priors and per-feature Gaussian class-conditionals.
/// Index 0 holds the hit class, index 1 the non-hit class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub variance_floor: f64,
}

fn class_slot(l: Label) -> usize {
    if l.is_hit() {
        0
    } else {
        1
    }
}

pub fn nb_fit(train: &Dataset, variance_floor: f64) -> Result<GaussianNb> {
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let p = train.n_features();
    let mut counts = [0usize; 2];
    let mut sums = [vec![0.0; p], vec![0.0; p]];
    for (row, &l) in train.rows().iter().zip(train.labels()) {
        let c = class_slot(l);
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(row) {
            *s += x;
        }
    }
    let means = [0, 1].map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect::<Vec<_>>());
    let mut ss = [vec![0.0; p], vec![0.0; p]];
    for (row, &l) in train.rows().iter().zip(train.labels()) {
        let c = class_slot(l);
        for j in 0..p {
            let d = row[j] - means[c][j];
            ss[c][j] += d * d;
        }
    }
    let variances = [0, 1].map(|c| {
        ss[c]
            .iter()
            .map(|s| (s / counts[c] as f64).max(variance_floor))
            .collect::<Vec<_>>()
    });
    let n = train.len() as f64;
    Ok(GaussianNb {
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
        variance_floor,
    })
}

impl GaussianNb {
    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let mut lp = self.priors[c].ln();
        for ((xj, m), v) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            let d = xj - m;
            lp += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - d * d / (2.0 * v);
        }
        lp
    }

    /// `(P(Hit | x), P(NonHit | x))`, normalized over the two classes.
    pub fn posteriors(&self, x: &[f64]) -> (f64, f64) {
        let a = self.log_joint(0, x);
        let b = self.log_joint(1, x);
        let m = a.max(b);
        let (ea, eb) = ((a - m).exp(), (b - m).exp());
        let z = ea + eb;
        (ea / z, eb / z)
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.posteriors(x).0
    }
}
