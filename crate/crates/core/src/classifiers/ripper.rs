use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipperParams {
    pub folds: usize,
    /// Minimum number of training instances a condition must cover.
    pub min_weight: usize,
    pub optimize_runs: usize,
    pub seed: u64,
}

impl Default for RipperParams {
    fn default() -> Self {
        RipperParams {
            folds: 3,
            min_weight: 2,
            optimize_runs: 2,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Condition {
    /// Builds a condition by feature name against a schema.
    pub fn named(schema: &[String], name: &str, op: Op, threshold: f64) -> Result<Condition> {
        let feature = schema.iter().position(|n| n == name).ok_or_else(|| Error::UnknownFeature {
            name: name.to_string(),
            valid: schema.to_vec(),
        })?;
        Ok(Condition { feature, op, threshold })
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        match self.op {
            Op::Le => x[self.feature] <= self.threshold,
            Op::Ge => x[self.feature] >= self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: Label,
    /// Training instances this rule fires on first, `[hits, non-hits]`.
    pub counts: [usize; 2],
}

impl Rule {
    pub fn covers(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }

    /// Laplace-smoothed hit proportion among covered training instances.
    pub fn score(&self) -> f64 {
        (self.counts[0] as f64 + 1.0) / ((self.counts[0] + self.counts[1]) as f64 + 2.0)
    }
}

/// Ordered rules; the first matching rule decides. The last rule has no
/// conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub feature_names: Vec<String>,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    /// `rules` are the conditional rules; a default rule predicting `default` is appended.
    pub fn new(feature_names: Vec<String>, rules: Vec<Rule>, default: Label) -> Result<RuleSet> {
        if let Some(c) = rules.iter().flat_map(|r| &r.conditions).find(|c| c.feature >= feature_names.len() || !c.threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad condition on feature {}", c.feature)));
        }
        let mut rules = rules;
        rules.push(Rule {
            conditions: Vec::new(),
            class: default,
            counts: [0, 0],
        });
        Ok(RuleSet { feature_names, rules })
    }

    fn firing(&self, x: &[f64]) -> &Rule {
        self.rules
            .iter()
            .find(|r| r.covers(x))
            .unwrap_or_else(|| self.rules.last().expect("rule set has a default rule"))
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        self.firing(x).class
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.firing(x).score()
    }

    pub fn default_class(&self) -> Label {
        self.rules.last().expect("rule set has a default rule").class
    }

    fn tally(&mut self, ds: &Dataset) {
        for r in &mut self.rules {
            r.counts = [0, 0];
        }
        for (x, l) in ds.rows().iter().zip(ds.labels()) {
            let k = self.rules.iter().position(|r| r.covers(x)).unwrap_or(self.rules.len() - 1);
            self.rules[k].counts[if l.is_hit() { 0 } else { 1 }] += 1;
        }
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let conds: Vec<String> = r
                .conditions
                .iter()
                .map(|c| {
                    let op = match c.op {
                        Op::Le => "<=",
                        Op::Ge => ">=",
                    };
                    format!("({} {op} {})", self.feature_names[c.feature], c.threshold)
                })
                .collect();
            writeln!(f, "{} => {} ({}/{})", conds.join(" and "), r.class, r.counts[0], r.counts[1])?;
        }
        Ok(())
    }
}

fn log2(x: f64) -> f64 {
    x.log2()
}

/// Bits to pick `k` of `t` items when each is picked with probability `p`.
fn subset_dl(t: f64, k: f64, p: f64) -> f64 {
    let mut bits = if p > 0.0 { -k * log2(p) } else { 0.0 };
    if t > k {
        bits -= (t - k) * log2(1.0 - p);
    }
    bits
}

fn data_dl(exp_fp_over_err: f64, cover: f64, uncover: f64, fp: f64, fn_: f64) -> f64 {
    let total = log2(cover + uncover + 1.0);
    let (cover_bits, uncover_bits) = if cover > uncover {
        let exp_err = exp_fp_over_err * (fp + fn_);
        let c = subset_dl(cover, fp, exp_err / cover);
        let u = if uncover > 0.0 { subset_dl(uncover, fn_, fn_ / uncover) } else { 0.0 };
        (c, u)
    } else {
        let exp_err = (1.0 - exp_fp_over_err) * (fp + fn_);
        let c = if cover > 0.0 { subset_dl(cover, fp, fp / cover) } else { 0.0 };
        let u = subset_dl(uncover, fn_, exp_err / uncover);
        (c, u)
    };
    total + cover_bits + uncover_bits
}

type Conds = Vec<Condition>;

fn covers(conds: &[Condition], x: &[f64]) -> bool {
    conds.iter().all(|c| c.holds(x))
}

struct Learner<'a> {
    ds: &'a Dataset,
    positive: Label,
    params: &'a RipperParams,
    num_all_conds: f64,
    exp_fp_rate: f64,
}

impl Learner<'_> {
    fn is_pos(&self, i: usize) -> bool {
        self.ds.labels()[i] == self.positive
    }

    fn x(&self, i: usize) -> &[f64] {
        self.ds.row(i)
    }

    fn pos_count(&self, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| self.is_pos(i)).count()
    }

    /// `(positives, negatives)` covered by `conds` within `idx`.
    fn coverage(&self, conds: &[Condition], idx: &[usize]) -> (usize, usize) {
        let mut p = 0;
        let mut n = 0;
        for &i in idx {
            if covers(conds, self.x(i)) {
                if self.is_pos(i) {
                    p += 1;
                } else {
                    n += 1;
                }
            }
        }
        (p, n)
    }

    fn uncovered(&self, rules: &[Conds], idx: &[usize]) -> Vec<usize> {
        idx.iter()
            .copied()
            .filter(|&i| !rules.iter().any(|r| covers(r, self.x(i))))
            .collect()
    }

    fn theory_dl(&self, conds: &[Condition]) -> f64 {
        let k = conds.len() as f64;
        if k == 0.0 {
            return 0.0;
        }
        let mut bits = log2(k);
        if k > 1.0 {
            bits += 2.0 * log2(bits);
        }
        bits += subset_dl(self.num_all_conds, k, k / self.num_all_conds);
        0.5 * bits
    }

    /// Theory plus exception bits of `rules` over `idx`.
    fn ruleset_dl(&self, rules: &[Conds], idx: &[usize]) -> f64 {
        let mut cover = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        for &i in idx {
            let hit = rules.iter().any(|r| covers(r, self.x(i)));
            let pos = self.is_pos(i);
            if hit {
                cover += 1.0;
                if !pos {
                    fp += 1.0;
                }
            } else if pos {
                fn_ += 1.0;
            }
        }
        let uncover = idx.len() as f64 - cover;
        let theory: f64 = rules.iter().map(|r| self.theory_dl(r)).sum();
        theory + data_dl(self.exp_fp_rate, cover, uncover, fp, fn_)
    }

    /// Stratified random split into growing and pruning sets.
    fn split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
        let folds = self.params.folds;
        if idx.len() < folds {
            return (idx.to_vec(), Vec::new());
        }
        let mut grow = Vec::new();
        let mut prune = Vec::new();
        for want_pos in [true, false] {
            let mut class: Vec<usize> = idx.iter().copied().filter(|&i| self.is_pos(i) == want_pos).collect();
            class.shuffle(rng);
            let n_prune = class.len() / folds;
            prune.extend_from_slice(&class[..n_prune]);
            grow.extend_from_slice(&class[n_prune..]);
        }
        grow.sort_unstable();
        prune.sort_unstable();
        (grow, prune)
    }

    /// Greedily adds the condition with the largest information gain until
    /// no negatives are covered.
    fn grow(&self, grow: &[usize], start: Conds) -> Conds {
        let mut conds = start;
        let mut covered: Vec<usize> = grow.iter().copied().filter(|&i| covers(&conds, self.x(i))).collect();
        let min_cover = self.params.min_weight.max(1);
        loop {
            let t = covered.len();
            let p = self.pos_count(&covered);
            if t == 0 || p == t {
                break;
            }
            let base = log2((p as f64 + 1.0) / (t as f64 + 1.0));
            let gain_of = |p1: usize, t1: usize| p1 as f64 * (log2((p1 as f64 + 1.0) / (t1 as f64 + 1.0)) - base);
            let mut best: Option<(f64, Condition)> = None;
            let mut order = covered.clone();
            for j in 0..self.ds.n_features() {
                order.sort_by(|&a, &b| self.x(a)[j].total_cmp(&self.x(b)[j]));
                let mut p1 = 0;
                for k in 0..t - 1 {
                    if self.is_pos(order[k]) {
                        p1 += 1;
                    }
                    let here = self.x(order[k])[j];
                    let next = self.x(order[k + 1])[j];
                    if here >= next {
                        continue;
                    }
                    let t1 = k + 1;
                    let options = [
                        (p1, t1, Op::Le, here),
                        (p - p1, t - t1, Op::Ge, next),
                    ];
                    for (pp, tt, op, threshold) in options {
                        if tt < min_cover {
                            continue;
                        }
                        let g = gain_of(pp, tt);
                        if best.as_ref().is_none_or(|(bg, _)| g > *bg) {
                            best = Some((g, Condition { feature: j, op, threshold }));
                        }
                    }
                }
            }
            match best {
                Some((g, c)) if g > 0.0 => {
                    covered.retain(|&i| c.holds(self.x(i)));
                    conds.push(c);
                }
                _ => break,
            }
        }
        conds
    }

    /// Keeps the prefix maximizing `(p - n) / (p + n)` on the pruning set.
    fn prune_alone(&self, conds: Conds, prune: &[usize]) -> Conds {
        let mut best: Option<(f64, usize)> = None;
        for len in 1..=conds.len() {
            let (p, n) = self.coverage(&conds[..len], prune);
            if p + n == 0 {
                continue;
            }
            let worth = (p as f64 - n as f64) / (p + n) as f64;
            if best.is_none_or(|(w, _)| worth > w) {
                best = Some((worth, len));
            }
        }
        match best {
            Some((_, len)) => conds[..len].to_vec(),
            None => conds,
        }
    }

    /// Keeps the prefix maximizing accuracy of the rule followed by `later`
    /// rules on the pruning set.
    fn prune_in_context(&self, conds: Conds, prune: &[usize], later: &[Conds]) -> Conds {
        let mut best: Option<(usize, usize)> = None;
        for len in 1..=conds.len() {
            let prefix = &conds[..len];
            let correct = prune
                .iter()
                .filter(|&&i| {
                    let x = self.x(i);
                    let predicted_pos = covers(prefix, x) || later.iter().any(|r| covers(r, x));
                    predicted_pos == self.is_pos(i)
                })
                .count();
            if best.is_none_or(|(c, _)| correct > c) {
                best = Some((correct, len));
            }
        }
        match best {
            Some((_, len)) => conds[..len].to_vec(),
            None => conds,
        }
    }

    /// Sequential covering of the positives not yet covered by `rules`.
    fn cover(&self, rules: &mut Vec<Conds>, all: &[usize], rng: &mut ChaCha8Rng) {
        let mut remaining = self.uncovered(rules, all);
        let mut min_dl = self.ruleset_dl(rules, all);
        while self.pos_count(&remaining) > 0 {
            let (grow, prune) = self.split(&remaining, rng);
            let mut conds = self.grow(&grow, Vec::new());
            if conds.is_empty() {
                break;
            }
            if !prune.is_empty() {
                conds = self.prune_alone(conds, &prune);
            }
            let (p, n) = self.coverage(&conds, &remaining);
            if p == 0 || n as f64 / (p + n) as f64 >= 0.5 {
                break;
            }
            rules.push(conds);
            let dl = self.ruleset_dl(rules, all);
            if dl > min_dl + 64.0 {
                rules.pop();
                break;
            }
            min_dl = min_dl.min(dl);
            let last = rules.last().expect("just pushed");
            remaining.retain(|&i| !covers(last, self.x(i)));
        }
    }

    /// Revisits every rule, keeping the original, a regrown replacement, or
    /// an extended revision, whichever gives the smallest description length.
    fn optimize(&self, rules: &mut [Conds], all: &[usize], rng: &mut ChaCha8Rng) {
        for i in 0..rules.len() {
            let remaining = self.uncovered(&rules[..i], all);
            if self.pos_count(&remaining) == 0 {
                continue;
            }
            let (grow, prune) = self.split(&remaining, rng);
            let later: Vec<Conds> = rules[i + 1..].to_vec();
            let mut candidates = Vec::new();
            for start in [Vec::new(), rules[i].clone()] {
                let mut c = self.grow(&grow, start);
                if c.is_empty() {
                    continue;
                }
                if !prune.is_empty() {
                    c = self.prune_in_context(c, &prune, &later);
                }
                candidates.push(c);
            }
            let mut best_dl = self.ruleset_dl(rules, all);
            let original = rules[i].clone();
            let mut best = original.clone();
            for c in candidates {
                rules[i] = c.clone();
                let dl = self.ruleset_dl(rules, all);
                if dl < best_dl {
                    best_dl = dl;
                    best = c;
                }
            }
            rules[i] = best;
        }
    }

    /// Drops rules, last first, whose removal lowers the description length.
    fn reduce_dl(&self, rules: &mut Vec<Conds>, all: &[usize]) {
        let mut i = rules.len();
        while i > 0 {
            i -= 1;
            let with = self.ruleset_dl(rules, all);
            let removed = rules.remove(i);
            if self.ruleset_dl(rules, all) >= with {
                rules.insert(i, removed);
            }
        }
    }
}

fn count_distinct(ds: &Dataset, j: usize) -> usize {
    let mut col = ds.column(j);
    col.sort_by(f64::total_cmp);
    col.dedup();
    col.len()
}

/// Learns rules for the minority class; the majority class is the default.
pub fn ripper_fit(train: &Dataset, params: &RipperParams) -> Result<RuleSet> {
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if params.folds < 2 {
        return Err(Error::InvalidArgument("RIPPER needs at least 2 folds".into()));
    }
    let (hits, nonhits) = train.class_counts();
    let (positive, negative) = if hits <= nonhits {
        (Label::Hit, Label::NonHit)
    } else {
        (Label::NonHit, Label::Hit)
    };
    let num_all_conds: usize = (0..train.n_features()).map(|j| 2 * count_distinct(train, j)).sum();
    let learner = Learner {
        ds: train,
        positive,
        params,
        num_all_conds: num_all_conds.max(1) as f64,
        exp_fp_rate: hits.min(nonhits) as f64 / train.len() as f64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let all: Vec<usize> = (0..train.len()).collect();
    let mut rules: Vec<Conds> = Vec::new();
    learner.cover(&mut rules, &all, &mut rng);
    for _ in 0..params.optimize_runs {
        learner.optimize(&mut rules, &all, &mut rng);
        learner.cover(&mut rules, &all, &mut rng);
        learner.reduce_dl(&mut rules, &all);
    }
    let rules = rules
        .into_iter()
        .map(|conditions| Rule {
            conditions,
            class: positive,
            counts: [0, 0],
        })
        .collect();
    let mut set = RuleSet::new(train.feature_names().to_vec(), rules, negative)?;
    set.tally(train);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    fn conjunction(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let labels = rows
            .iter()
            .map(|r| if r[0] <= 0.0 && r[1] <= 0.0 { Label::NonHit } else { Label::Hit })
            .collect();
        Dataset::undated(names(3), rows, labels).unwrap()
    }

    #[test]
    fn hand_written_rules_apply_in_order() {
        let schema: Vec<String> = ["T1mean", "T2max", "T3min"].iter().map(|s| s.to_string()).collect();
        let rule = Rule {
            conditions: vec![
                Condition::named(&schema, "T1mean", Op::Le, -0.020016).unwrap(),
                Condition::named(&schema, "T3min", Op::Le, -0.534123).unwrap(),
                Condition::named(&schema, "T2max", Op::Ge, -0.250608).unwrap(),
            ],
            class: Label::NonHit,
            counts: [0, 0],
        };
        let set = RuleSet::new(schema, vec![rule], Label::Hit).unwrap();
        // Columns are T1mean, T2max, T3min.
        assert_eq!(set.predict(&[-0.1, 0.0, -0.6]), Label::NonHit);
        assert_eq!(set.predict(&[0.5, 0.0, -0.6]), Label::Hit);
        assert!(Condition::named(&["a".to_string()], "b", Op::Le, 0.0).is_err());
    }

    #[test]
    fn recovers_a_conjunction() {
        let ds = conjunction(4, 200);
        let set = ripper_fit(&ds, &RipperParams::default()).unwrap();
        let correct = ds
            .rows()
            .iter()
            .zip(ds.labels())
            .filter(|(x, l)| set.predict(x) == **l)
            .count();
        assert!(correct >= 198, "{correct}/200 correct with\n{set}");
        assert!(set.rules.last().unwrap().conditions.is_empty());
    }

    #[test]
    fn minority_class_gets_rules() {
        let ds = conjunction(9, 200);
        let (h, n) = ds.class_counts();
        let set = ripper_fit(&ds, &RipperParams::default()).unwrap();
        let minority = if h <= n { Label::Hit } else { Label::NonHit };
        assert!(set.rules[..set.rules.len() - 1].iter().all(|r| r.class == minority));
        assert_ne!(set.default_class(), minority);
    }

    #[test]
    fn description_length_pieces() {
        assert_eq!(subset_dl(10.0, 0.0, 0.0), 0.0);
        assert!((subset_dl(4.0, 2.0, 0.5) - 4.0).abs() < 1e-12);
        assert!(data_dl(0.5, 10.0, 10.0, 0.0, 0.0) >= log2(21.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let ds = conjunction(1, 150);
        let p = RipperParams::default();
        assert_eq!(ripper_fit(&ds, &p).unwrap(), ripper_fit(&ds, &p).unwrap());
    }

    #[test]
    fn serde_round_trip() {
        let ds = conjunction(2, 120);
        let set = ripper_fit(&ds, &RipperParams::default()).unwrap();
        let back: RuleSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(set, back);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn monotone_transform_invariance(seed in 0u64..1000) {
            let ds = conjunction(seed, 100);
            let warped: Vec<Vec<f64>> = ds.rows().iter().map(|r| vec![r[0].powi(3), (2.0 * r[1]).exp(), r[2] * 5.0 - 1.0]).collect();
            let ds2 = ds.with_rows(warped.clone()).unwrap();
            let p = RipperParams { seed, ..Default::default() };
            let a = ripper_fit(&ds, &p).unwrap();
            let b = ripper_fit(&ds2, &p).unwrap();
            for (x, y) in ds.rows().iter().zip(&warped) {
                prop_assert_eq!(a.predict(x), b.predict(y));
            }
        }
    }
}
