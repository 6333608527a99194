use serde::{Deserialize, Serialize};

use super::kernel::{KernelSpec, PairTables};
use crate::datamodel::{Dataset, Label};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;

/// Read-only view of a kernel matrix restricted to a subset of its rows.
#[derive(Clone, Copy)]
pub struct GramView<'a> {
    pub matrix: &'a [f64],
    pub stride: usize,
    pub idx: &'a [usize],
}

impl GramView<'_> {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[self.idx[i] * self.stride + self.idx[j]]
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Bias of the decision function `sum alpha_i y_i K(x_i, x) + b`.
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`, the quantity the
/// dual problem maximizes.
pub fn dual_objective(alpha: &[f64], y: &[f64], k: impl Fn(usize, usize) -> f64) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Solves the soft-margin dual by sequential minimal optimization until the
/// KKT gap drops below `tol`. `y` holds +1/-1 for the rows of `gram`.
pub fn smo_solve(gram: GramView<'_>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    smo_solve_from(gram, y, c, tol, max_iter, None)
}

/// [`smo_solve`] started from a feasible `init` (bounded by `c`, with
/// `sum init_i y_i = 0`) instead of zero.
pub fn smo_solve_from(
    gram: GramView<'_>,
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&[f64]>,
) -> SmoSolution {
    let n = gram.len();
    // Local copy of Q_ij = y_i y_j K_ij so the hot loops read contiguous rows.
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        let row = &gram.matrix[gram.idx[i] * gram.stride..];
        for j in 0..n {
            q[i * n + j] = y[i] * y[j] * row[gram.idx[j]];
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
    let mut alpha = match init {
        Some(a) => a.iter().map(|v| v.clamp(0.0, c)).collect(),
        None => vec![0.0; n],
    };
    // Gradient of 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0; n];
    for i in 0..n {
        if alpha[i] != 0.0 {
            let row = &q[i * n..(i + 1) * n];
            for (g, qv) in grad.iter_mut().zip(row) {
                *g += alpha[i] * qv;
            }
        }
    }
    let mut iterations = 0;
    let mut converged = false;
    let in_up = |t: usize, a: &[f64]| if y[t] > 0.0 { a[t] < c } else { a[t] > 0.0 };
    let in_low = |t: usize, a: &[f64]| if y[t] > 0.0 { a[t] > 0.0 } else { a[t] < c };

    // Shrinking: variables that sit at a bound and look settled leave the
    // active set; their gradient is rebuilt before optimality is declared.
    let mut active: Vec<usize> = (0..n).collect();
    let mut unshrunk = false;
    let mut counter = n.min(1000) + 1;
    let reconstruct = |active: &[usize], alpha: &[f64], grad: &mut [f64]| {
        if active.len() == n {
            return;
        }
        let mut is_active = vec![false; n];
        for &t in active {
            is_active[t] = true;
        }
        for t in (0..n).filter(|&t| !is_active[t]) {
            let row = &q[t * n..(t + 1) * n];
            grad[t] = -1.0 + alpha.iter().zip(row).filter(|(a, _)| **a != 0.0).map(|(a, qv)| a * qv).sum::<f64>();
        }
    };

    while iterations < max_iter {
        counter -= 1;
        if counter == 0 {
            counter = n.min(1000);
            let (mut up_max, mut low_max) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &t in &active {
                if in_up(t, &alpha) {
                    up_max = up_max.max(-y[t] * grad[t]);
                }
                if in_low(t, &alpha) {
                    low_max = low_max.max(y[t] * grad[t]);
                }
            }
            if !unshrunk && up_max + low_max <= 10.0 * tol {
                unshrunk = true;
                reconstruct(&active, &alpha, &mut grad);
                active = (0..n).collect();
            }
            active.retain(|&t| {
                let g = grad[t];
                let shrink = if alpha[t] >= c {
                    if y[t] > 0.0 { -g > up_max } else { -g > low_max }
                } else if alpha[t] <= 0.0 {
                    if y[t] > 0.0 { g > low_max } else { g > up_max }
                } else {
                    false
                };
                !shrink
            });
        }

        let mut sel = select_pair(&active, &alpha, &grad, &q, &diag, y, n, tol, &in_up, &in_low);
        if sel.is_none() {
            if active.len() == n {
                converged = true;
                break;
            }
            reconstruct(&active, &alpha, &mut grad);
            active = (0..n).collect();
            counter = 1;
            sel = select_pair(&active, &alpha, &grad, &q, &diag, y, n, tol, &in_up, &in_low);
            if sel.is_none() {
                converged = true;
                break;
            }
        }
        let (i, j) = sel.expect("checked above");
        iterations += 1;
        let q_ij = q[i * n + j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (qi, qj) = (&q[i * n..(i + 1) * n], &q[j * n..(j + 1) * n]);
        for &t in &active {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }
    reconstruct(&active, &alpha, &mut grad);
    log::trace!("SMO n={n} C={c}: {iterations} iterations");
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without reaching tol {tol}");
    }

    let mut free = 0usize;
    let mut free_sum = 0.0;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    SmoSolution {
        alpha,
        b: -rho,
        iterations,
        converged,
    }
}

/// Second-order working set selection over `active`: i is the maximal
/// violator in I_up, j the partner in I_low with the largest guaranteed
/// decrease. None once the KKT gap is below `tol`.
#[allow(clippy::too_many_arguments)]
fn select_pair(
    active: &[usize],
    alpha: &[f64],
    grad: &[f64],
    q: &[f64],
    diag: &[f64],
    y: &[f64],
    n: usize,
    tol: f64,
    in_up: &impl Fn(usize, &[f64]) -> bool,
    in_low: &impl Fn(usize, &[f64]) -> bool,
) -> Option<(usize, usize)> {
    let mut g_max = f64::NEG_INFINITY;
    let mut i_sel = usize::MAX;
    for &t in active {
        if in_up(t, alpha) && -y[t] * grad[t] > g_max {
            g_max = -y[t] * grad[t];
            i_sel = t;
        }
    }
    if i_sel == usize::MAX {
        return None;
    }
    let qi = &q[i_sel * n..(i_sel + 1) * n];
    let mut g_min = f64::INFINITY;
    let mut j_sel = usize::MAX;
    let mut best = f64::INFINITY;
    for &t in active {
        if !in_low(t, alpha) {
            continue;
        }
        let v = -y[t] * grad[t];
        g_min = g_min.min(v);
        let b = g_max - v;
        if b > 0.0 {
            let mut a = diag[i_sel] + diag[t] - 2.0 * y[i_sel] * y[t] * qi[t];
            if a <= 0.0 {
                a = TAU;
            }
            let gain = -(b * b) / a;
            if gain < best {
                best = gain;
                j_sel = t;
            }
        }
    }
    if j_sel == usize::MAX || g_max - g_min < tol {
        return None;
    }
    Some((i_sel, j_sel))
}

pub fn default_max_iter(n: usize) -> usize {
    (100 * n).max(10_000_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub feature_names: Vec<String>,
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    pub b: f64,
    /// Only instances with a positive multiplier are kept.
    pub support_vectors: Vec<Vec<f64>>,
    /// +1 for hits, -1 for non-hits.
    pub labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub converged: bool,
}

impl SvmModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.labels)
            .zip(&self.alphas)
            .map(|((sv, y), a)| a * y * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.b
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if self.margin(x) >= 0.0 {
            Label::Hit
        } else {
            Label::NonHit
        }
    }
}

pub fn smo_fit(train: &Dataset, kernel: KernelSpec, c: f64, tol: f64) -> Result<SvmModel> {
    kernel.validate()?;
    if !(c > 0.0 && c.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("SVM needs C > 0 and tol > 0, got C={c} tol={tol}")));
    }
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let n = train.len();
    let gram = PairTables::new(train.rows()).gram(&kernel);
    let idx: Vec<usize> = (0..n).collect();
    let y: Vec<f64> = train.labels().iter().map(|l| l.sign()).collect();
    let view = GramView {
        matrix: &gram,
        stride: n,
        idx: &idx,
    };
    let sol = smo_solve(view, &y, c, tol, default_max_iter(n));
    let keep: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        feature_names: train.feature_names().to_vec(),
        kernel,
        c,
        tol,
        b: sol.b,
        support_vectors: keep.iter().map(|&i| train.row(i).to_vec()).collect(),
        labels: keep.iter().map(|&i| y[i]).collect(),
        alphas: keep.iter().map(|&i| sol.alpha[i]).collect(),
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        let p = rows[0].len();
        Dataset::undated((0..p).map(|j| format!("x{j}")).collect(), rows, labels).unwrap()
    }

    #[test]
    fn two_point_instance() {
        let m = smo_fit(
            &ds(vec![vec![-1.0], vec![1.0]], vec![Label::NonHit, Label::Hit]),
            KernelSpec::polynomial(1),
            1.0,
            1e-9,
        )
        .unwrap();
        assert_eq!(m.alphas.len(), 2);
        for a in &m.alphas {
            assert!((a - 0.5).abs() < 1e-9);
        }
        assert!(m.b.abs() < 1e-9);
        for x in [-2.0, -0.3, 0.7, 5.0] {
            assert!((m.margin(&[x]) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn rbf_separates_xor() {
        let rows = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
        let labels = vec![Label::Hit, Label::Hit, Label::NonHit, Label::NonHit];
        let d = ds(rows, labels);
        let m = smo_fit(&d, KernelSpec::Rbf { sigma: 1.0 }, 10.0, 1e-6).unwrap();
        for (x, l) in d.rows().iter().zip(d.labels()) {
            assert_eq!(m.predict(x), *l);
        }
    }

    #[test]
    fn feasibility_and_margins_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..10 {
            let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let labels: Vec<Label> = rows
                .iter()
                .map(|r| if r[0] + r[1] * r[1] + rng.random_range(-0.3..0.3) > 0.3 { Label::Hit } else { Label::NonHit })
                .collect();
            let d = ds(rows, labels);
            let kernel = if trial % 2 == 0 { KernelSpec::polynomial(2) } else { KernelSpec::Rbf { sigma: 0.8 } };
            let tol = 1e-4;
            let c = 3.0;
            let m = smo_fit(&d, kernel, c, tol).unwrap();
            let s: f64 = m.alphas.iter().zip(&m.labels).map(|(a, y)| a * y).sum();
            assert!(s.abs() < 1e-8);
            for ((sv, y), a) in m.support_vectors.iter().zip(&m.labels).zip(&m.alphas) {
                assert!(*a > 0.0 && *a <= c);
                if *a < c {
                    assert!((m.margin(sv) - y).abs() < 10.0 * tol);
                }
            }
        }
    }

    #[test]
    fn dual_objective_of_two_point_optimum() {
        let k = |i: usize, j: usize| if i == j { 2.0 } else { 0.0 };
        assert!((dual_objective(&[0.5, 0.5], &[-1.0, 1.0], k) - 0.5).abs() < 1e-15);
    }
}
