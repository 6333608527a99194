use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of a per-song series. Moments are population moments and the
/// kurtosis is the plain fourth standardized moment (normal = 3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub stdev: f64,
    pub p80: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub median: f64,
}

/// Name suffixes in feature-vector order.
pub const STAT_SUFFIXES: [&str; 10] = [
    "mean", "var", "skewness", "kurtosis", "stdev", "80perc", "min", "max", "range", "median",
];

impl DescriptiveStats {
    /// Values in the same order as [`STAT_SUFFIXES`].
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.mean,
            self.variance,
            self.skewness,
            self.kurtosis,
            self.stdev,
            self.p80,
            self.min,
            self.max,
            self.range,
            self.median,
        ]
    }
}

/// Linear interpolation between closest ranks at zero-based position
/// `q * (n - 1)` of an ascending slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn descriptive_stats(series: &[f64]) -> Result<DescriptiveStats> {
    if series.is_empty() || series.iter().any(|v| !v.is_finite()) {
        return Err(Error::EmptySeries);
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let p80 = percentile_sorted(&sorted, 0.8);
    let median = percentile_sorted(&sorted, 0.5);

    // A constant series gets exact zeros; otherwise rounding in the mean
    // would leave tiny spurious deviations and garbage higher moments.
    if min == max {
        return Ok(DescriptiveStats {
            mean: min,
            variance: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
            stdev: 0.0,
            p80,
            min,
            max,
            range: 0.0,
            median,
        });
    }

    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in series {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };

    Ok(DescriptiveStats {
        mean,
        variance: m2,
        skewness,
        kurtosis,
        stdev: m2.sqrt(),
        p80,
        min,
        max,
        range: max - min,
        median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Straightforward textbook formulas kept apart from the implementation.
    fn oracle(xs: &[f64]) -> (f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let skew = xs.iter().map(|x| ((x - mean) / var.sqrt()).powi(3)).sum::<f64>() / n;
        let kurt = xs.iter().map(|x| ((x - mean) / var.sqrt()).powi(4)).sum::<f64>() / n;
        (mean, var, skew, kurt)
    }

    #[test]
    fn one_to_five() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.variance, 2.0);
        assert_eq!(s.stdev, 2f64.sqrt());
        assert_eq!(s.skewness, 0.0);
        assert_eq!(s.kurtosis, 1.7);
        assert_eq!((s.min, s.max, s.range, s.median), (1.0, 5.0, 4.0, 3.0));
        assert_eq!(s.p80, 4.2);
        let (m, v, sk, k) = oracle(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!((m, v, sk), (3.0, 2.0, 0.0));
        assert_relative_eq!(k, s.kurtosis, max_relative = 1e-15);
    }

    #[test]
    fn constant_series() {
        let s = descriptive_stats(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!((s.variance, s.skewness, s.kurtosis, s.range), (0.0, 0.0, 0.0, 0.0));
        let s = descriptive_stats(&[0.1; 3]).unwrap();
        assert_eq!((s.mean, s.variance), (0.1, 0.0));
    }

    #[test]
    fn symmetric_series_has_zero_skew() {
        assert_eq!(descriptive_stats(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap().skewness, 0.0);
    }

    #[test]
    fn single_value_and_errors() {
        let s = descriptive_stats(&[4.5]).unwrap();
        assert_eq!((s.mean, s.median, s.p80), (4.5, 4.5, 4.5));
        assert!(descriptive_stats(&[]).is_err());
        assert!(descriptive_stats(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn even_length_median_interpolates() {
        let s = descriptive_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        // position 0.8 * 3 = 2.4 -> 3 + 0.4
        assert_relative_eq!(s.p80, 3.4, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn matches_textbook_moments(xs in prop::collection::vec(-100.0f64..100.0, 2..60)) {
            let s = descriptive_stats(&xs).unwrap();
            prop_assume!(s.range > 1e-6);
            let (m, v, sk, k) = oracle(&xs);
            prop_assert!((s.mean - m).abs() <= 1e-9 * (1.0 + m.abs()));
            prop_assert!((s.variance - v).abs() <= 1e-9 * (1.0 + v));
            prop_assert!((s.skewness - sk).abs() <= 1e-8 * (1.0 + sk.abs()));
            prop_assert!((s.kurtosis - k).abs() <= 1e-8 * (1.0 + k));
        }

        #[test]
        fn invariants_hold(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let s = descriptive_stats(&xs).unwrap();
            prop_assert_eq!(s.range, s.max - s.min);
            prop_assert_eq!(s.stdev, s.variance.sqrt());
            prop_assert!(s.min <= s.median && s.median <= s.max);
            prop_assert!(s.min <= s.p80 && s.p80 <= s.max);
            prop_assert!(s.variance >= 0.0);
        }

        #[test]
        fn permutation_invariant(xs in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let mut rev = xs.clone();
            rev.reverse();
            let a = descriptive_stats(&xs).unwrap();
            let b = descriptive_stats(&rev).unwrap();
            prop_assert_eq!((a.min, a.max, a.median, a.p80), (b.min, b.max, b.median, b.p80));
            prop_assert!((a.mean - b.mean).abs() <= 1e-9 * (1.0 + a.mean.abs()));
            prop_assert!((a.variance - b.variance).abs() <= 1e-9 * (1.0 + a.variance));
        }
    }
}
