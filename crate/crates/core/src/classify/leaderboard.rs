//! Feature-kind by algorithm comparison table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cv::{split_dataset, Split};
use super::dataset::Dataset;
use super::metrics::{fmt_metric, EvalReport};
use super::{evaluate, train, Algorithm, TrainingConfig};
use crate::error::Result;
use crate::features::FeatureKind;

pub type Registry = BTreeMap<FeatureKind, Vec<Algorithm>>;

/// The algorithm lists compared per feature kind. The tree on SED stands in
/// for the ensemble entries, which are registered but not implemented.
pub fn default_registry() -> Registry {
    BTreeMap::from([
        (
            FeatureKind::Mfcc,
            vec![Algorithm::Ridge, Algorithm::SvmLinear, Algorithm::Logistic],
        ),
        (
            FeatureKind::Hjorth,
            vec![Algorithm::Tree, Algorithm::Adaboost, Algorithm::RandomForest],
        ),
        (
            FeatureKind::Sed,
            vec![
                Algorithm::Tree,
                Algorithm::Lgbm,
                Algorithm::GradientBoosting,
                Algorithm::Adaboost,
            ],
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub feature: FeatureKind,
    pub algorithm: Algorithm,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    /// Evaluated pairs, best accuracy first.
    pub rows: Vec<LeaderboardRow>,
    /// Registered pairs without a trainer.
    pub not_implemented: Vec<(FeatureKind, Algorithm)>,
    pub split: Split,
    pub seed: u64,
}

/// Splits every dataset with the same seed, trains each registered algorithm
/// and ranks the pairs by test accuracy.
pub fn leaderboard(
    data: &BTreeMap<FeatureKind, Dataset>,
    registry: &Registry,
    split: Split,
    cfg: &TrainingConfig,
) -> Result<Leaderboard> {
    let mut rows = Vec::new();
    let mut not_implemented = Vec::new();
    for (&kind, algorithms) in registry {
        let Some(ds) = data.get(&kind) else {
            continue;
        };
        let (train_set, test_set) = split_dataset(ds, split, cfg.seed)?;
        for &a in algorithms {
            if !a.is_implemented() {
                not_implemented.push((kind, a));
                continue;
            }
            let model = train(a, &train_set, cfg)?;
            rows.push(LeaderboardRow {
                feature: kind,
                algorithm: a,
                report: evaluate(&model, &test_set)?,
            });
        }
    }
    rows.sort_by(|a, b| {
        let key = |r: &LeaderboardRow| r.report.accuracy.unwrap_or(-1.0);
        key(b).total_cmp(&key(a))
    });
    Ok(Leaderboard {
        rows,
        not_implemented,
        split,
        seed: cfg.seed,
    })
}

impl Leaderboard {
    pub fn best_for(&self, kind: FeatureKind) -> Option<&LeaderboardRow> {
        self.rows.iter().find(|r| r.feature == kind)
    }

    pub fn get(&self, kind: FeatureKind, algorithm: Algorithm) -> Option<&LeaderboardRow> {
        self.rows
            .iter()
            .find(|r| r.feature == kind && r.algorithm == algorithm)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let cell = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["data", "feature", "algorithm", "accuracy", "balanced_accuracy", "f1", "status"])?;
        for r in &self.rows {
            w.write_record([
                "synthetic",
                r.feature.as_str(),
                r.algorithm.as_str(),
                &cell(r.report.accuracy),
                &cell(r.report.balanced_accuracy),
                &cell(r.report.f1),
                "ok",
            ])?;
        }
        for (f, a) in &self.not_implemented {
            w.write_record(["synthetic", f.as_str(), a.as_str(), "", "", "", "not implemented"])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned text table with Accuracy, BA and F1 score columns.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "Leaderboard on synthetic data (split {:?}, seed {})\n",
            self.split, self.seed
        );
        let _ = writeln!(
            s,
            "{:<8} {:<18} {:>9} {:>9} {:>9}",
            "Feature", "Algorithm", "Accuracy", "BA", "F1 score"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8} {:<18} {:>9} {:>9} {:>9}",
                r.feature.as_str(),
                r.algorithm.as_str(),
                fmt_metric(r.report.accuracy),
                fmt_metric(r.report.balanced_accuracy),
                fmt_metric(r.report.f1)
            );
        }
        for (f, a) in &self.not_implemented {
            let _ = writeln!(s, "{:<8} {:<18} not implemented", f.as_str(), a.as_str());
        }
        s
    }
}
