use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature z-scoring fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; zero marks a constant column.
    pub stdevs: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "standardization needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        let width = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        let mut stdevs = vec![0.0; width];
        for j in 0..width {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let mut sum = 0.0;
            for r in rows {
                lo = lo.min(r[j]);
                hi = hi.max(r[j]);
                sum += r[j];
            }
            let mean = sum / n;
            means[j] = mean;
            if lo < hi {
                let ss: f64 = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum();
                stdevs[j] = (ss / n).sqrt();
            }
        }
        Ok(Standardizer { means, stdevs })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stdevs))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}
