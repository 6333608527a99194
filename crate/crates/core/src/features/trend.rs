use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through yearly means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendLine {
    /// Feature units per year.
    pub slope: f64,
    pub intercept: f64,
    pub n_years: usize,
}

impl TrendLine {
    pub fn at(&self, year: f64) -> f64 {
        self.intercept + self.slope * year
    }
}

/// Ordinary least squares of `ys` on `xs`, computed on centered data.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Averages values per calendar year and fits a line through the means.
pub fn yearly_trend(points: &[(NaiveDate, f64)]) -> Result<(Vec<(i32, f64)>, TrendLine)> {
    let mut by_year: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for (d, v) in points {
        let e = by_year.entry(d.year()).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    if by_year.len() < 2 {
        return Err(Error::InsufficientYears(by_year.len()));
    }
    let means: Vec<(i32, f64)> = by_year
        .into_iter()
        .map(|(y, (s, c))| (y, s / c as f64))
        .collect();
    let xs: Vec<f64> = means.iter().map(|(y, _)| f64::from(*y)).collect();
    let ys: Vec<f64> = means.iter().map(|(_, m)| *m).collect();
    let (slope, intercept) = ols(&xs, &ys);
    Ok((
        means,
        TrendLine {
            slope,
            intercept,
            n_years: xs.len(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jan(y: i32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, 1, 15).unwrap()
    }

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (1990..2010).map(|y| (jan(y), 2.0 * y as f64 - 3950.0)).collect();
        let (_, t) = yearly_trend(&pts).unwrap();
        assert!((t.slope - 2.0).abs() < 1e-9);
        assert!((t.intercept + 3950.0).abs() < 1e-6);
        assert_eq!(t.n_years, 20);
    }

    #[test]
    fn two_years_and_averaging() {
        let pts = vec![(jan(2010), 9.0), (jan(2010), 11.0), (jan(2012), 14.0)];
        let (means, t) = yearly_trend(&pts).unwrap();
        assert_eq!(means, vec![(2010, 10.0), (2012, 14.0)]);
        assert_eq!(t.slope, 2.0);
    }

    #[test]
    fn constant_means_and_errors() {
        let pts: Vec<_> = (2000..2005).map(|y| (jan(y), 3.3)).collect();
        assert_eq!(yearly_trend(&pts).unwrap().1.slope, 0.0);
        assert!(matches!(
            yearly_trend(&[(jan(2000), 1.0), (jan(2000), 2.0)]),
            Err(Error::InsufficientYears(1))
        ));
    }

    proptest! {
        #[test]
        fn two_year_slope_is_finite_difference(y0 in 1950i32..2030, gap in 1i32..30, a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let (_, t) = yearly_trend(&[(jan(y0), a), (jan(y0 + gap), b)]).unwrap();
            let fd = (b - a) / gap as f64;
            prop_assert!((t.slope - fd).abs() <= 1e-9 * (1.0 + fd.abs()));
        }
    }
}
