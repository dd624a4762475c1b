//! Train/test splits and stratified cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// 20% of each class trains, 80% tests.
    #[default]
    Paper,
    /// 80% trains, 20% tests.
    Conventional,
}

impl Split {
    pub fn train_fraction(self) -> f64 {
        match self {
            Split::Paper => 0.2,
            Split::Conventional => 0.8,
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Split::Paper),
            "conventional" => Ok(Split::Conventional),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

fn class_indices(data: &Dataset, seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [Vec::new(), Vec::new()];
    for (i, r) in data.rows().iter().enumerate() {
        out[usize::from(r.label == Label::Background)].push(i);
    }
    for v in &mut out {
        v.shuffle(&mut rng);
    }
    out
}

/// Per-class `ceil(fraction · n)` rows train, clamped so both sides keep at
/// least one row of each class. Returns `(train, test)`.
pub fn split_dataset(data: &Dataset, split: Split, seed: u64) -> Result<(Dataset, Dataset)> {
    let classes = class_indices(data, seed);
    if classes.iter().any(|c| c.len() < 2) {
        return Err(Error::Data(
            "each class needs at least two rows to split".into(),
        ));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in &classes {
        let k = ((split.train_fraction() * c.len() as f64).ceil() as usize).clamp(1, c.len() - 1);
        train.extend_from_slice(&c[..k]);
        test.extend_from_slice(&c[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train), data.subset(&test)))
}

/// Stratified folds: each class is shuffled and dealt round-robin, and the
/// deal continues across classes so fold sizes differ by at most one.
pub fn stratified_folds(data: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > data.len() {
        return Err(Error::Config(format!(
            "k = {k} folds is invalid for {} rows",
            data.len()
        )));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for c in class_indices(data, seed) {
        for i in c {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    /// Mean accuracy in percent.
    pub mean: f64,
    /// Population standard deviation in percentage points.
    pub std: f64,
}

impl CvReport {
    pub fn from_accuracies(acc: Vec<f64>) -> Self {
        let n = acc.len() as f64;
        let pct: Vec<f64> = acc.iter().map(|a| a * 100.0).collect();
        let mean = pct.iter().sum::<f64>() / n;
        let std = (pct.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self {
            fold_accuracies: acc,
            mean,
            std,
        }
    }
}

impl std::fmt::Display for CvReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.3} %", self.mean, self.std)
    }
}

/// Accuracy per held-out fold, training on the remaining folds.
pub fn cv_with_folds<F>(data: &Dataset, folds: &[Vec<usize>], mut fit_eval: F) -> Result<CvReport>
where
    F: FnMut(&Dataset, &Dataset) -> Result<f64>,
{
    let mut acc = Vec::with_capacity(folds.len());
    for (i, held) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        acc.push(fit_eval(&data.subset(&train), &data.subset(held))?);
    }
    Ok(CvReport::from_accuracies(acc))
}
