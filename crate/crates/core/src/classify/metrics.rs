use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Label;

/// Confusion counts with rumble as the positive class. A metric whose
/// denominator is zero is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let sensitivity = ratio(tp, tp + fn_);
        let specificity = ratio(tn, tn + fp);
        let precision = ratio(tp, tp + fp);
        let balanced_accuracy = sensitivity.zip(specificity).map(|(a, b)| (a + b) / 2.0);
        let f1 = precision
            .zip(sensitivity)
            .and_then(|(p, r)| (p + r > 0.0).then(|| 2.0 * p * r / (p + r)));
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            balanced_accuracy,
            f1,
            sensitivity,
            specificity,
            precision,
            recall: sensitivity,
        }
    }

    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Data("cannot evaluate on an empty test set".into()));
        }
        if truth.len() != predicted.len() {
            return Err(Error::Size("prediction count differs from test size".into()));
        }
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Rumble, Label::Rumble) => tp += 1,
                (Label::Background, Label::Rumble) => fp += 1,
                (Label::Background, Label::Background) => tn += 1,
                (Label::Rumble, Label::Background) => fn_ += 1,
            }
        }
        Ok(Self::from_counts(tp, fp, tn, fn_))
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Fixed-precision cell; absent metrics print as `n/a`.
pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}
