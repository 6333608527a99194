//! Correlation-based subset merit: reward feature-class correlation,
//! penalize feature-feature redundancy.

use crate::datamodel::{Dataset, Label};

/// Pearson correlation; zero when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Point-biserial correlation of a column with the hit indicator.
pub fn feature_class_correlation(column: &[f64], labels: &[Label]) -> f64 {
    let y: Vec<f64> = labels.iter().map(|l| l.indicator()).collect();
    pearson(column, &y)
}

/// Absolute correlation tables consumed by [`cfs_merit`].
#[derive(Debug, Clone)]
pub struct CorrelationTables {
    /// |r| of each feature with the class.
    pub class: Vec<f64>,
    /// Symmetric |r| between features, row-major `n x n`.
    pub features: Vec<f64>,
    pub n: usize,
}

impl CorrelationTables {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let n = ds.n_features();
        let columns: Vec<Vec<f64>> = (0..n).map(|j| ds.column(j)).collect();
        let class = columns
            .iter()
            .map(|c| feature_class_correlation(c, ds.labels()).abs())
            .collect();
        let mut features = vec![0.0; n * n];
        for i in 0..n {
            features[i * n + i] = 1.0;
            for j in i + 1..n {
                let r = pearson(&columns[i], &columns[j]).abs();
                features[i * n + j] = r;
                features[j * n + i] = r;
            }
        }
        CorrelationTables { class, features, n }
    }

    pub fn ff(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n + j]
    }

    pub fn merit(&self, subset: &[usize]) -> f64 {
        cfs_merit(subset, &self.class, |i, j| self.ff(i, j))
    }
}

/// `k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)` over the subset.
/// Empty subsets score zero.
pub fn cfs_merit(subset: &[usize], class_corr: &[f64], feature_corr: impl Fn(usize, usize) -> f64) -> f64 {
    let k = subset.len();
    if k == 0 {
        return 0.0;
    }
    let sum_cf: f64 = subset.iter().map(|&i| class_corr[i].abs()).sum();
    let mut sum_ff = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            sum_ff += feature_corr(i, j).abs();
        }
    }
    // k(k-1) * mean|r_ff| over ordered pairs == 2 * sum over unordered pairs
    let denom = (k as f64 + 2.0 * sum_ff).sqrt();
    sum_cf / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_feature_is_its_class_correlation() {
        assert!((cfs_merit(&[0], &[0.7], |_, _| 1.0) - 0.7).abs() < 1e-12);
        assert!((cfs_merit(&[0], &[-0.7], |_, _| 1.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn two_feature_cases() {
        let m = cfs_merit(&[0, 1], &[0.5, 0.5], |_, _| 1.0);
        assert!((m - 0.5).abs() < 1e-12);
        let m = cfs_merit(&[0, 1], &[0.5, 0.5], |_, _| 0.0);
        assert!((m - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn point_biserial() {
        use Label::*;
        let labels = [Hit, Hit, NonHit, NonHit];
        assert!((feature_class_correlation(&[1.0, 1.0, 0.0, 0.0], &labels) - 1.0).abs() < 1e-15);
        assert_eq!(feature_class_correlation(&[1.0, -1.0, 1.0, -1.0], &labels), 0.0);
        assert_eq!(feature_class_correlation(&[3.0; 4], &labels), 0.0);
    }

    proptest! {
        #[test]
        fn merit_is_permutation_invariant(cf in prop::collection::vec(0.0f64..1.0, 2..8), ff in 0.0f64..1.0) {
            let idx: Vec<usize> = (0..cf.len()).collect();
            let mut rev = idx.clone();
            rev.reverse();
            let a = cfs_merit(&idx, &cf, |_, _| ff);
            let b = cfs_merit(&rev, &cf, |_, _| ff);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn merit_decreases_with_redundancy(cf in prop::collection::vec(0.01f64..1.0, 2..8), lo in 0.0f64..0.5, step in 0.01f64..0.5) {
            let idx: Vec<usize> = (0..cf.len()).collect();
            let a = cfs_merit(&idx, &cf, |_, _| lo);
            let b = cfs_merit(&idx, &cf, |_, _| lo + step);
            prop_assert!(b < a);
        }
    }
}
