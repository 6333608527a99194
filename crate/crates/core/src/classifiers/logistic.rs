use serde::{Deserialize, Serialize};

use crate::classifiers::linalg::cholesky_solve;
use crate::datamodel::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty on the coefficients (the bias is unpenalized).
    pub lambda: f64,
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-4,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub bias: f64,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// Penalized negative log-likelihood over parameters `[bias, a_1, .., a_M]`:
/// `sum_i [ln(1 + e^{s_i}) - y_i s_i] + lambda/2 * sum_j a_j^2`.
pub struct LogisticObjective<'a> {
    rows: &'a [Vec<f64>],
    targets: Vec<f64>,
    lambda: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(rows: &'a [Vec<f64>], targets: Vec<f64>, lambda: f64) -> Self {
        LogisticObjective { rows, targets, lambda }
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len) + 1
    }

    fn linear(params: &[f64], x: &[f64]) -> f64 {
        params[0] + params[1..].iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let nll: f64 = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(x, y)| {
                let s = Self::linear(params, x);
                softplus(s) - y * s
            })
            .sum();
        let penalty: f64 = params[1..].iter().map(|a| a * a).sum();
        nll + 0.5 * self.lambda * penalty
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; params.len()];
        for (x, y) in self.rows.iter().zip(&self.targets) {
            let r = sigmoid(Self::linear(params, x)) - y;
            g[0] += r;
            for (gj, xj) in g[1..].iter_mut().zip(x) {
                *gj += r * xj;
            }
        }
        for (gj, a) in g[1..].iter_mut().zip(&params[1..]) {
            *gj += self.lambda * a;
        }
        g
    }

    /// Dense row-major Hessian.
    pub fn hessian(&self, params: &[f64]) -> Vec<f64> {
        let d = params.len();
        let mut h = vec![0.0; d * d];
        let mut z = vec![0.0; d];
        for x in self.rows {
            let p = sigmoid(Self::linear(params, x));
            let w = p * (1.0 - p);
            z[0] = 1.0;
            z[1..].copy_from_slice(x);
            for i in 0..d {
                let wi = w * z[i];
                if wi == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    h[i * d + j] += wi * z[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                h[j * d + i] = h[i * d + j];
            }
        }
        for i in 1..d {
            h[i * d + i] += self.lambda;
        }
        h
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton with backtracking. If `max_iter` runs out the best iterate
/// is returned with `converged = false`.
pub fn logistic_fit(train: &Dataset, params: &LogisticParams) -> Result<LogisticModel> {
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if params.lambda < 0.0 || params.tol <= 0.0 {
        return Err(Error::InvalidArgument("lambda must be >= 0 and tol > 0".into()));
    }
    let targets = train.labels().iter().map(|l| l.indicator()).collect();
    let obj = LogisticObjective::new(train.rows(), targets, params.lambda);
    let d = obj.dim();

    let mut w = vec![0.0; d];
    let mut f = obj.value(&w);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let g = obj.gradient(&w);
        if max_norm(&g) < params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut h = obj.hessian(&w);
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut jitter = 1e-10;
        let step = loop {
            if let Some(s) = cholesky_solve(&h, &neg_g) {
                break s;
            }
            for i in 0..d {
                h[i * d + i] += jitter;
            }
            jitter *= 10.0;
            if jitter > 1e6 {
                break neg_g.clone();
            }
        };
        let mut slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let step = if slope < 0.0 {
            step
        } else {
            slope = -g.iter().map(|x| x * x).sum::<f64>();
            neg_g
        };

        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-14 {
            let cand: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let fc = obj.value(&cand);
            if fc <= f + 1e-4 * t * slope {
                w = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No further decrease representable; check once more and stop.
            converged = max_norm(&obj.gradient(&w)) < params.tol;
            break;
        }
    }
    if !converged {
        log::warn!("logistic fit stopped after {iterations} iterations without reaching tol");
    }
    Ok(LogisticModel {
        bias: w[0],
        coefficients: w[1..].to_vec(),
        lambda: params.lambda,
        converged,
        iterations,
    })
}

impl LogisticModel {
    pub fn linear_score(&self, x: &[f64]) -> f64 {
        self.bias + self.coefficients.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }

    /// Probability of a hit.
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_score(x))
    }
}
