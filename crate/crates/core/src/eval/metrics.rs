use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::datamodel::Label;
use crate::error::{Error, Result};

/// Counts with Hit as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Fraction of actual hits predicted as hits.
    pub fn hit_recall(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_) as f64
    }

    pub fn add(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Hit, Label::Hit) => self.tp += 1,
            (Label::Hit, Label::NonHit) => self.fn_ += 1,
            (Label::NonHit, Label::Hit) => self.fp += 1,
            (Label::NonHit, Label::NonHit) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }

    /// Two-by-two CSV with actual classes as rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["actual", "predicted_hit", "predicted_nonhit"])?;
        w.write_record(["Hit", &self.tp.to_string(), &self.fn_.to_string()])?;
        w.write_record(["NonHit", &self.fp.to_string(), &self.tn.to_string()])?;
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

pub fn confusion_and_accuracy(labels: &[Label], predictions: &[Label]) -> Result<(ConfusionMatrix, f64)> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch(labels.len(), predictions.len()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut m = ConfusionMatrix::default();
    for (a, p) in labels.iter().zip(predictions) {
        m.add(*a, *p);
    }
    Ok((m, m.accuracy()))
}

/// Threshold-sweep ROC points from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fpr", "tpr"])?;
        for (f, t) in &self.points {
            w.write_record([f.to_string(), t.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn check_scores(labels: &[Label], scores: &[f64]) -> Result<(u64, u64)> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch(labels.len(), scores.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let p = labels.iter().filter(|l| l.is_hit()).count() as u64;
    let n = labels.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass);
    }
    Ok((p, n))
}

/// ROC curve and its area. Tied scores form one step, which gives a
/// diagonal segment and half credit for tied hit/non-hit pairs.
pub fn roc_auc(labels: &[Label], scores: &[f64]) -> Result<(RocCurve, f64)> {
    let (p, n) = check_scores(labels, scores)?;
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the area in units of one hit/non-hit pair.
    let mut doubled: u128 = 0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (mut dtp, mut dfp) = (0u64, 0u64);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]].is_hit() {
                dtp += 1;
            } else {
                dfp += 1;
            }
            k += 1;
        }
        doubled += dfp as u128 * (2 * tp + dtp) as u128;
        tp += dtp;
        fp += dfp;
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    let area = doubled as f64 / (2 * p as u128 * n as u128) as f64;
    Ok((RocCurve { points }, area))
}

pub fn auc(labels: &[Label], scores: &[f64]) -> Result<f64> {
    roc_auc(labels, scores).map(|(_, a)| a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Hit, NonHit};

    #[test]
    fn paper_confusion_counts() {
        let m = ConfusionMatrix::new(209, 44, 100, 47);
        assert_eq!(m.total(), 400);
        assert_eq!(m.accuracy(), 0.64);
        assert!((m.hit_recall() - 0.8261).abs() < 5e-4);
    }

    #[test]
    fn perfect_predictions() {
        let labels = [Hit, NonHit, Hit];
        let (m, acc) = confusion_and_accuracy(&labels, &labels).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!((m.fn_, m.fp), (0, 0));
        assert!(confusion_and_accuracy(&labels, &labels[..2]).is_err());
    }

    #[test]
    fn auc_reference_cases() {
        let labels = [Hit, Hit, NonHit, NonHit];
        assert_eq!(auc(&labels, &[0.8, 0.4, 0.6, 0.2]).unwrap(), 0.75);
        assert_eq!(auc(&labels, &[0.9, 0.8, 0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&labels, &[0.3; 4]).unwrap(), 0.5);
        assert!(matches!(auc(&[Hit, Hit], &[0.1, 0.2]), Err(Error::SingleClass)));
    }

    #[test]
    fn curve_shape() {
        let (c, _) = roc_auc(&[Hit, NonHit, Hit, NonHit], &[0.9, 0.7, 0.7, 0.1]).unwrap();
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(c.points[2], (0.5, 1.0));
    }

    fn arb_case() -> impl Strategy<Value = (Vec<Label>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(0u8..6, n),
            )
                .prop_filter("both classes", |(l, _)| l.iter().any(|b| *b) && l.iter().any(|b| !*b))
                .prop_map(|(l, s)| {
                    (
                        l.into_iter().map(|b| if b { Hit } else { NonHit }).collect(),
                        s.into_iter().map(f64::from).collect(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn monotone_score_transform_keeps_auc((labels, scores) in arb_case()) {
            let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() - 3.0).collect();
            prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &warped).unwrap());
        }

        #[test]
        fn complement_properties((labels, scores) in arb_case()) {
            let a = auc(&labels, &scores).unwrap();
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let flipped: Vec<Label> = labels.iter().map(|l| if l.is_hit() { NonHit } else { Hit }).collect();
            prop_assert!((auc(&flipped, &neg).unwrap() - a).abs() < 1e-12);
            prop_assert!((auc(&labels, &neg).unwrap() - (1.0 - a)).abs() < 1e-12);
        }

        #[test]
        fn curve_is_monotone((labels, scores) in arb_case()) {
            let (c, _) = roc_auc(&labels, &scores).unwrap();
            for w in c.points.windows(2) {
                prop_assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            }
        }
    }
}
