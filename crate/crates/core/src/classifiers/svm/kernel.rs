use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `(1 + x.z / scale)^degree`
    Polynomial { degree: u32, scale: f64 },
    /// `exp(-|x - z|^2 / sigma^2)`
    Rbf { sigma: f64 },
}

impl KernelSpec {
    pub fn polynomial(degree: u32) -> KernelSpec {
        KernelSpec::Polynomial { degree, scale: 1.0 }
    }

    /// RBF kernel from `gamma = 1 / sigma^2`.
    pub fn rbf_gamma(gamma: f64) -> KernelSpec {
        KernelSpec::Rbf {
            sigma: (1.0 / gamma).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial { degree, scale } => {
                if degree < 1 || !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "polynomial kernel needs degree >= 1 and scale > 0, got d={degree} c={scale}"
                    )));
                }
            }
            KernelSpec::Rbf { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidArgument(format!("rbf kernel needs sigma > 0, got {sigma}")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Polynomial { .. } => self.from_parts(dot(x, z), 0.0),
            KernelSpec::Rbf { .. } => self.from_parts(0.0, sq_dist(x, z)),
        }
    }

    /// Kernel value from a precomputed dot product or squared distance;
    /// each kernel reads only the quantity it depends on.
    pub fn from_parts(&self, dot: f64, sq_dist: f64) -> f64 {
        match *self {
            KernelSpec::Polynomial { degree, scale } => (1.0 + dot / scale).powi(degree as i32),
            KernelSpec::Rbf { sigma } => (-sq_dist / (sigma * sigma)).exp(),
        }
    }
}

pub fn dot(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| a * b).sum()
}

pub fn sq_dist(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Pairwise dot products and squared distances of a row set, from which
/// any kernel matrix over those rows can be derived.
#[derive(Debug, Clone)]
pub struct PairTables {
    n: usize,
    dots: Vec<f64>,
    sq_dists: Vec<f64>,
}

impl PairTables {
    pub fn new(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut dots = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let d = dot(&rows[i], &rows[j]);
                dots[i * n + j] = d;
                dots[j * n + i] = d;
            }
        }
        let mut sq_dists = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = sq_dist(&rows[i], &rows[j]);
                sq_dists[i * n + j] = d;
                sq_dists[j * n + i] = d;
            }
        }
        PairTables { n, dots, sq_dists }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Full `n x n` kernel matrix, row-major.
    pub fn gram(&self, kernel: &KernelSpec) -> Vec<f64> {
        self.dots
            .iter()
            .zip(&self.sq_dists)
            .map(|(&d, &s)| kernel.from_parts(d, s))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let lin = KernelSpec::polynomial(1);
        assert_eq!(lin.eval(&[1.0, 0.5], &[1.0, 2.0]), 3.0);
        let quad = KernelSpec::Polynomial { degree: 2, scale: 2.0 };
        assert_eq!(quad.eval(&[2.0], &[1.0]), 4.0);
        let rbf = KernelSpec::Rbf { sigma: 1.0 };
        assert_eq!(rbf.eval(&[0.3, -2.0], &[0.3, -2.0]), 1.0);
        assert!((rbf.eval(&[0.0], &[1.0]) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((KernelSpec::rbf_gamma(4.0).eval(&[0.0], &[1.0]) - (-4.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::Polynomial { degree: 0, scale: 1.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 1, scale: 0.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { sigma: -1.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { sigma: 0.5 }.validate().is_ok());
    }

    #[test]
    fn tables_match_direct_evaluation() {
        let rows = vec![vec![1.0, 2.0], vec![-0.5, 0.0], vec![3.0, -1.0]];
        let t = PairTables::new(&rows);
        for k in [KernelSpec::polynomial(2), KernelSpec::Rbf { sigma: 1.3 }] {
            let g = t.gram(&k);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((g[i * 3 + j] - k.eval(&rows[i], &rows[j])).abs() < 1e-12);
                }
            }
        }
    }
}
