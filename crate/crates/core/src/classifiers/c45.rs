use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::datamodel::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C45Params {
    pub min_leaf: usize,
    pub prune_confidence: f64,
    pub max_depth: Option<usize>,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            prune_confidence: 0.25,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class: Label,
        /// Training instances reaching the leaf, `[hits, non-hits]`.
        counts: [usize; 2],
        /// Hit proportion used as ranking score.
        score: f64,
    },
    /// Instances with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if x[*feature] <= *threshold { left } else { right };
        }
        node
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub feature_names: Vec<String>,
    pub root: TreeNode,
    pub max_depth: Option<usize>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> Label {
        match self.root.leaf_for(x) {
            TreeNode::Leaf { class, .. } => *class,
            TreeNode::Split { .. } => unreachable!("leaf_for returns a leaf"),
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        match self.root.leaf_for(x) {
            TreeNode::Leaf { score, .. } => *score,
            TreeNode::Split { .. } => unreachable!("leaf_for returns a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Indented text rendering, one line per node.
    pub fn render(&self) -> String {
        fn walk(node: &TreeNode, names: &[String], indent: usize, out: &mut String) {
            let pad = "|   ".repeat(indent);
            match node {
                TreeNode::Leaf { class, counts, .. } => {
                    out.push_str(&format!("{pad}{class} ({}/{})\n", counts[0], counts[1]));
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let name = &names[*feature];
                    out.push_str(&format!("{pad}{name} <= {threshold}\n"));
                    walk(left, names, indent + 1, out);
                    out.push_str(&format!("{pad}{name} > {threshold}\n"));
                    walk(right, names, indent + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, &self.feature_names, 0, &mut out);
        out
    }
}

fn entropy(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(idx: &[usize], labels: &[Label]) -> [usize; 2] {
    let hits = idx.iter().filter(|&&i| labels[i].is_hit()).count();
    [hits, idx.len() - hits]
}

struct Candidate {
    feature: usize,
    threshold: f64,
    info_gain: f64,
    gain_ratio: f64,
}

/// Best binary split on one feature: the boundary maximizing information
/// gain, MDL-corrected for the number of admissible boundaries.
fn best_split_on(ds: &Dataset, idx: &[usize], feature: usize, min_split: f64) -> Option<Candidate> {
    let labels = ds.labels();
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| ds.row(a)[feature].total_cmp(&ds.row(b)[feature]));
    let n = order.len();
    let total = class_counts(idx, labels);
    let base = entropy(total);

    let mut left = [0usize; 2];
    let mut best: Option<(f64, usize)> = None;
    let mut admissible = 0usize;
    for k in 0..n - 1 {
        if labels[order[k]].is_hit() {
            left[0] += 1;
        } else {
            left[1] += 1;
        }
        let here = ds.row(order[k])[feature];
        let next = ds.row(order[k + 1])[feature];
        if here >= next {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        if (nl as f64) < min_split || (nr as f64) < min_split {
            continue;
        }
        admissible += 1;
        let right = [total[0] - left[0], total[1] - left[1]];
        let cond = (nl as f64 * entropy(left) + nr as f64 * entropy(right)) / n as f64;
        let gain = base - cond;
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, k));
        }
    }
    let (gain, k) = best?;
    let gain = gain - (admissible as f64).log2() / n as f64;
    if gain <= 0.0 {
        return None;
    }
    let nl = k + 1;
    let split_info = entropy([nl, n - nl]);
    let gain_ratio = if split_info > 0.0 { gain / split_info } else { 0.0 };
    Some(Candidate {
        feature,
        threshold: ds.row(order[k])[feature],
        info_gain: gain,
        gain_ratio,
    })
}

/// Working tree that keeps the training indices reaching each node.
enum Build {
    Leaf {
        idx: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        idx: Vec<usize>,
        left: Box<Build>,
        right: Box<Build>,
    },
}

impl Build {
    fn idx(&self) -> &[usize] {
        match self {
            Build::Leaf { idx } | Build::Split { idx, .. } => idx,
        }
    }
}

struct Grower<'a> {
    ds: &'a Dataset,
    params: &'a C45Params,
}

impl Grower<'_> {
    fn grow(&self, idx: Vec<usize>, depth: usize) -> Build {
        let counts = class_counts(&idx, self.ds.labels());
        let n = idx.len();
        let at_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if counts[0] == 0 || counts[1] == 0 || n < 2 * self.params.min_leaf || at_limit {
            return Build::Leaf { idx };
        }
        let min_leaf = self.params.min_leaf as f64;
        let min_split = (0.1 * n as f64 / 2.0).clamp(min_leaf, 25f64.max(min_leaf));
        if (n as f64) < 2.0 * min_split {
            return Build::Leaf { idx };
        }
        let candidates: Vec<Candidate> = (0..self.ds.n_features())
            .filter_map(|j| best_split_on(self.ds, &idx, j, min_split))
            .collect();
        if candidates.is_empty() {
            return Build::Leaf { idx };
        }
        let avg_gain = candidates.iter().map(|c| c.info_gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<&Candidate> = None;
        for c in &candidates {
            if c.info_gain >= avg_gain - 1e-3 && best.is_none_or(|b| c.gain_ratio > b.gain_ratio) {
                best = Some(c);
            }
        }
        let Some(best) = best.filter(|b| b.gain_ratio > 0.0) else {
            return Build::Leaf { idx };
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.ds.row(i)[best.feature] <= best.threshold);
        Build::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(l, depth + 1)),
            right: Box::new(self.grow(r, depth + 1)),
            idx,
        }
    }
}

/// Upper confidence bound on extra errors for `e` observed errors out of `n`.
fn add_errs(n: f64, e: f64, cf: f64, z: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf, z) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let f = (e + 0.5) / n;
    let z2 = z * z;
    let r = (f + z2 / (2.0 * n) + z * (f / n - f * f / n + z2 / (4.0 * n * n)).sqrt()) / (1.0 + z2 / n);
    r * n - e
}

struct Pruner<'a> {
    ds: &'a Dataset,
    cf: f64,
    z: f64,
}

impl Pruner<'_> {
    fn leaf_errors(&self, idx: &[usize]) -> f64 {
        let c = class_counts(idx, self.ds.labels());
        let n = idx.len() as f64;
        let wrong = c[0].min(c[1]) as f64;
        wrong + add_errs(n, wrong, self.cf, self.z)
    }

    fn tree_errors(&self, node: &Build) -> f64 {
        match node {
            Build::Leaf { idx } => self.leaf_errors(idx),
            Build::Split { left, right, .. } => self.tree_errors(left) + self.tree_errors(right),
        }
    }

    fn training_errors(&self, node: &Build) -> usize {
        match node {
            Build::Leaf { idx } => {
                let c = class_counts(idx, self.ds.labels());
                c[0].min(c[1])
            }
            Build::Split { left, right, .. } => self.training_errors(left) + self.training_errors(right),
        }
    }

    /// Estimated errors if `idx` were routed through `node`.
    fn branch_errors(&self, node: &Build, idx: &[usize]) -> f64 {
        match node {
            Build::Leaf { .. } => self.leaf_errors(idx),
            Build::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.ds.row(i)[*feature] <= *threshold);
                self.branch_errors(left, &l) + self.branch_errors(right, &r)
            }
        }
    }

    fn redistribute(&self, node: &mut Build, new_idx: Vec<usize>) {
        match node {
            Build::Leaf { idx } => *idx = new_idx,
            Build::Split {
                feature,
                threshold,
                left,
                right,
                idx,
            } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    new_idx.iter().partition(|&&i| self.ds.row(i)[*feature] <= *threshold);
                self.redistribute(left, l);
                self.redistribute(right, r);
                *idx = new_idx;
            }
        }
    }

    /// Replaces subtrees that do not reduce training error by a leaf.
    fn collapse(&self, node: &mut Build) {
        if let Build::Split { left, right, idx, .. } = node {
            let c = class_counts(idx, self.ds.labels());
            let as_leaf = c[0].min(c[1]);
            let subtree = self.training_errors(left) + self.training_errors(right);
            if subtree >= as_leaf {
                *node = Build::Leaf { idx: std::mem::take(idx) };
            } else {
                self.collapse(left);
                self.collapse(right);
            }
        }
    }

    /// Pessimistic-error pruning with subtree raising.
    fn prune(&self, node: &mut Build) {
        let Build::Split { left, right, idx, .. } = node else {
            return;
        };
        self.prune(left);
        self.prune(right);
        let left_is_largest = left.idx().len() >= right.idx().len();
        let largest: &Build = if left_is_largest { left } else { right };
        let errors_largest = self.branch_errors(largest, idx);
        let errors_leaf = self.leaf_errors(idx);
        let errors_tree = self.tree_errors(left) + self.tree_errors(right);
        if errors_leaf <= errors_tree + 0.1 && errors_leaf <= errors_largest + 0.1 {
            *node = Build::Leaf { idx: std::mem::take(idx) };
        } else if errors_largest <= errors_tree + 0.1 {
            let all = std::mem::take(idx);
            let mut raised = if left_is_largest {
                std::mem::replace(left.as_mut(), Build::Leaf { idx: Vec::new() })
            } else {
                std::mem::replace(right.as_mut(), Build::Leaf { idx: Vec::new() })
            };
            self.redistribute(&mut raised, all);
            *node = raised;
            self.prune(node);
        }
    }
}

fn majority(counts: [usize; 2], fallback: Label) -> Label {
    match counts[0].cmp(&counts[1]) {
        std::cmp::Ordering::Greater => Label::Hit,
        std::cmp::Ordering::Less => Label::NonHit,
        std::cmp::Ordering::Equal => fallback,
    }
}

fn finish(node: Build, labels: &[Label], parent: (Label, f64)) -> TreeNode {
    let counts = class_counts(node.idx(), labels);
    let n = counts[0] + counts[1];
    let class = majority(counts, parent.0);
    let score = if n == 0 { parent.1 } else { counts[0] as f64 / n as f64 };
    match node {
        Build::Leaf { .. } => TreeNode::Leaf { class, counts, score },
        Build::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => TreeNode::Split {
            feature,
            threshold,
            left: Box::new(finish(*left, labels, (class, score))),
            right: Box::new(finish(*right, labels, (class, score))),
        },
    }
}

pub fn c45_fit(train: &Dataset, params: &C45Params) -> Result<DecisionTree> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(params.prune_confidence > 0.0 && params.prune_confidence <= 0.5) {
        return Err(Error::InvalidArgument("prune_confidence must be in (0, 0.5]".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    let grower = Grower { ds: train, params };
    let mut root = grower.grow((0..train.len()).collect(), 0);
    let z = Normal::standard().inverse_cdf(1.0 - params.prune_confidence);
    let pruner = Pruner {
        ds: train,
        cf: params.prune_confidence,
        z,
    };
    pruner.collapse(&mut root);
    pruner.prune(&mut root);
    Ok(DecisionTree {
        feature_names: train.feature_names().to_vec(),
        root: finish(root, train.labels(), (Label::NonHit, 0.0)),
        max_depth: params.max_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        let p = rows[0].len();
        Dataset::undated((0..p).map(|j| format!("f{j}")).collect(), rows, labels).unwrap()
    }

    fn noisy(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let labels = rows
            .iter()
            .map(|r| {
                let band = (5.0 * (r[0] + 1.0)).floor() as usize;
                if band.is_multiple_of(2) ^ rng.random_bool(0.05) { Label::Hit } else { Label::NonHit }
            })
            .collect();
        dataset(rows, labels)
    }

    #[test]
    fn separable_axis_gives_one_split() {
        let xs = [-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0];
        let rows = xs.iter().map(|x| vec![*x]).collect();
        let labels = xs.iter().map(|x| if *x < 0.0 { Label::Hit } else { Label::NonHit }).collect();
        let t = c45_fit(&dataset(rows, labels), &C45Params::default()).unwrap();
        let TreeNode::Split { threshold, left, right, .. } = &t.root else {
            panic!("expected a split, got {:?}", t.root);
        };
        assert!((-1.0..1.0).contains(threshold));
        assert!(matches!(**left, TreeNode::Leaf { class: Label::Hit, counts: [4, 0], .. }));
        assert!(matches!(**right, TreeNode::Leaf { class: Label::NonHit, counts: [0, 4], .. }));
    }

    #[test]
    fn pure_set_is_single_leaf() {
        let t = c45_fit(&dataset(vec![vec![1.0], vec![2.0], vec![3.0]], vec![Label::Hit; 3]), &C45Params::default()).unwrap();
        assert!(matches!(t.root, TreeNode::Leaf { class: Label::Hit, .. }));
        assert_eq!(t.predict(&[100.0]), Label::Hit);
    }

    #[test]
    fn depth_limit_is_honoured() {
        let ds = noisy(11, 1000);
        let free = c45_fit(&ds, &C45Params::default()).unwrap();
        assert!(free.depth() > 4, "fixture should grow deeper than the limit:\n{}", free.render());
        for d in 0..=4 {
            let p = C45Params {
                max_depth: Some(d),
                ..Default::default()
            };
            assert!(c45_fit(&ds, &p).unwrap().depth() <= d);
        }
    }

    #[test]
    fn add_errs_reference_values() {
        let z = Normal::standard().inverse_cdf(0.75);
        // Zero observed errors: N (1 - CF^(1/N)).
        assert!((add_errs(6.0, 0.0, 0.25, z) - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        assert_eq!(add_errs(4.0, 4.0, 0.25, z), 0.0);
        let v = add_errs(20.0, 5.0, 0.25, z);
        assert!(v > 0.0 && v < 5.0);
    }

    #[test]
    fn pruning_shrinks_noise_fits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(0.0..1.0)]).collect();
        let labels = (0..200).map(|_| if rng.random_bool(0.5) { Label::Hit } else { Label::NonHit }).collect();
        let t = c45_fit(&dataset(rows, labels), &C45Params::default()).unwrap();
        assert!(t.root.n_leaves() <= 6, "{}", t.render());
    }

    #[test]
    fn serde_round_trip() {
        let ds = noisy(3, 150);
        let t = c45_fit(&ds, &C45Params::default()).unwrap();
        let back: DecisionTree = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        for r in ds.rows() {
            assert_eq!(t.score(r), back.score(r));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn monotone_transform_invariance(seed in 0u64..1000) {
            let ds = noisy(seed, 120);
            let warped: Vec<Vec<f64>> = ds.rows().iter().map(|r| {
                let mut r = r.clone();
                r[0] = (3.0 * r[0]).exp();
                r[1] = r[1].powi(3) + 2.0 * r[1];
                r
            }).collect();
            let ds2 = ds.with_rows(warped.clone()).unwrap();
            let t1 = c45_fit(&ds, &C45Params::default()).unwrap();
            let t2 = c45_fit(&ds2, &C45Params::default()).unwrap();
            for (a, b) in ds.rows().iter().zip(&warped) {
                prop_assert_eq!(t1.predict(a), t2.predict(b));
            }
        }
    }
}
