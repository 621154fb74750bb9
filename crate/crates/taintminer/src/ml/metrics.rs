//! Binary classification metrics with the vulnerable class as positive.

use serde::{Deserialize, Serialize};

/// Prediction outcome counts at a fixed threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    /// Tallies predictions against truth; `true` marks the positive class.
    pub fn tally(truth: &[bool], predicted: &[bool]) -> ConfusionMatrix {
        assert_eq!(truth.len(), predicted.len());
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => cm.tp += 1,
                (false, true) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (true, false) => cm.fn_ += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Harmonic mean of precision and recall; 0 when never reachable.
    pub fn f1(&self) -> f64 {
        let denom = self.tp as f64 + 0.5 * (self.fp + self.fn_) as f64;
        if denom == 0.0 {
            return 0.0;
        }
        self.tp as f64 / denom
    }

    /// Matthews correlation; 0 when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (
            self.tp as f64,
            self.fp as f64,
            self.tn as f64,
            self.fn_ as f64,
        );
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            return 0.0;
        }
        (tp * tn - fp * fn_) / denom.sqrt()
    }
}

/// Area under the ROC curve by trapezoid sweep over descending scores,
/// with tied scores grouped into one step. Returns 0.5 when either class
/// is absent.
pub fn auc(scores: &[f64], truth: &[bool]) -> f64 {
    assert_eq!(scores.len(), truth.len());
    let pos = truth.iter().filter(|&&t| t).count() as f64;
    let neg = truth.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return 0.5;
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut area = 0.0;
    let mut tp = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut tp_inc = 0.0;
        let mut fp_inc = 0.0;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if truth[order[j]] {
                tp_inc += 1.0;
            } else {
                fp_inc += 1.0;
            }
            j += 1;
        }
        area += (tp + tp_inc / 2.0) * fp_inc;
        tp += tp_inc;
        i = j;
    }
    area / (pos * neg)
}
