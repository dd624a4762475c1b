//! Classifiers and the evaluation harness.

pub mod cv;
pub mod dataset;
pub mod leaderboard;
pub mod linear;
pub mod metrics;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cv::{cv_with_folds, split_dataset, stratified_folds, CvReport, Split};
pub use dataset::Dataset;
pub use leaderboard::{default_registry, leaderboard, Leaderboard, LeaderboardRow, Registry};
pub use linear::{
    logistic_loss_and_grad, ridge_solve, train_logistic, train_ridge, train_svm_linear,
    train_svm_linear_traced, LinearKind, LinearModel, LogisticParams, Standardization, SvmParams,
};
pub use metrics::EvalReport;
pub use tree::{train_tree, TreeModel, TreeNode};

use crate::error::{Error, Result};
use crate::features::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ridge,
    SvmLinear,
    Logistic,
    Tree,
    Adaboost,
    RandomForest,
    Lgbm,
    GradientBoosting,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ridge => "ridge",
            Algorithm::SvmLinear => "svm_linear",
            Algorithm::Logistic => "logistic",
            Algorithm::Tree => "tree",
            Algorithm::Adaboost => "adaboost",
            Algorithm::RandomForest => "random_forest",
            Algorithm::Lgbm => "lgbm",
            Algorithm::GradientBoosting => "gradient_boosting",
        }
    }

    /// Ensemble entries are registered but have no trainer.
    pub fn is_implemented(self) -> bool {
        matches!(
            self,
            Algorithm::Ridge | Algorithm::SvmLinear | Algorithm::Logistic | Algorithm::Tree
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::Ridge,
            Algorithm::SvmLinear,
            Algorithm::Logistic,
            Algorithm::Tree,
            Algorithm::Adaboost,
            Algorithm::RandomForest,
            Algorithm::Lgbm,
            Algorithm::GradientBoosting,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub algorithm: Algorithm,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub svm_step: f64,
    pub svm_epochs: usize,
    pub logistic_step: f64,
    pub logistic_epochs: usize,
    pub max_depth: usize,
    pub split: Split,
    pub k: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ridge,
            alpha: 1.0,
            c: 1.0,
            svm_step: 0.01,
            svm_epochs: 200,
            logistic_step: 0.5,
            logistic_epochs: 2000,
            max_depth: 4,
            split: Split::Paper,
            k: 5,
            seed: 42,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.c > 0.0 && self.svm_step > 0.0 && self.logistic_step > 0.0)
        {
            return Err(Error::Config(
                "alpha must be >= 0; C and steps must be positive".into(),
            ));
        }
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        Ok(())
    }

    pub fn svm(&self) -> SvmParams {
        SvmParams {
            c: self.c,
            epochs: self.svm_epochs,
            step: self.svm_step,
            seed: self.seed,
        }
    }

    pub fn logistic(&self) -> LogisticParams {
        LogisticParams {
            step: self.logistic_step,
            epochs: self.logistic_epochs,
            ..Default::default()
        }
    }
}

/// A trained model as persisted to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Linear(LinearModel),
    Tree(TreeModel),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            Model::Linear(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Model::Linear(m) => match m.kind {
                LinearKind::Ridge => Algorithm::Ridge,
                LinearKind::SvmLinear => Algorithm::SvmLinear,
                LinearKind::Logistic => Algorithm::Logistic,
            },
            Model::Tree(_) => Algorithm::Tree,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn train(algorithm: Algorithm, data: &Dataset, cfg: &TrainingConfig) -> Result<Model> {
    match algorithm {
        Algorithm::Ridge => train_ridge(data, cfg.alpha).map(Model::Linear),
        Algorithm::SvmLinear => train_svm_linear(data, cfg.svm()).map(Model::Linear),
        Algorithm::Logistic => train_logistic(data, cfg.logistic()).map(Model::Linear),
        Algorithm::Tree => train_tree(data, cfg.max_depth).map(Model::Tree),
        other => Err(Error::Config(format!("{other} is not implemented"))),
    }
}

pub fn predict(model: &Model, x: &[f64]) -> Result<Label> {
    model.predict(x)
}

pub fn evaluate(model: &Model, test: &Dataset) -> Result<EvalReport> {
    let predicted = test
        .rows()
        .iter()
        .map(|r| model.predict(&r.values))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(&test.labels(), &predicted)
}

/// Stratified k-fold accuracy for one algorithm.
pub fn kfold_cv(
    data: &Dataset,
    k: usize,
    algorithm: Algorithm,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<CvReport> {
    let folds = stratified_folds(data, k, seed)?;
    cv_with_folds(data, &folds, |train_set, test_set| {
        let m = train(algorithm, train_set, cfg)?;
        Ok(evaluate(&m, test_set)?.accuracy.unwrap_or(0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 2 == 0 { Label::Rumble } else { Label::Background })
            .collect();
        let x = labels
            .iter()
            .map(|l| vec![l.sign() + noise.sample(&mut rng), noise.sample(&mut rng)])
            .collect();
        Dataset::from_parts(FeatureKind::Mfcc, x, labels).unwrap()
    }

    #[test]
    fn model_json_round_trip() {
        let d = blobs(20, 1);
        let cfg = TrainingConfig::default();
        for a in [Algorithm::Ridge, Algorithm::SvmLinear, Algorithm::Logistic, Algorithm::Tree] {
            let m = train(a, &d, &cfg).unwrap();
            let back: Model = serde_json::from_str(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.algorithm(), a);
        }
        let json = train(Algorithm::Ridge, &d, &cfg).unwrap().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["kind", "weights", "bias", "hyperparams", "standardization"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["standardization"].get("means").is_some());
    }

    #[test]
    fn trivial_models() {
        let lin = Model::Linear(LinearModel {
            kind: LinearKind::Ridge,
            weights: vec![0.0, 0.0],
            bias: 0.3,
            hyperparams: Default::default(),
            standardization: Standardization {
                means: vec![0.0; 2],
                stds: vec![1.0; 2],
            },
        });
        assert_eq!(predict(&lin, &[-100.0, 5.0]).unwrap(), Label::Rumble);
        let leaf = Model::Tree(TreeModel {
            kind: tree::TreeKind::Tree,
            nodes: vec![TreeNode::Leaf { class: Label::Background }],
            max_depth: 0,
            n_features: 2,
        });
        assert_eq!(predict(&leaf, &[9.0, 9.0]).unwrap(), Label::Background);
    }

    #[test]
    fn ridge_refit_signs() {
        let d = blobs(20, 11);
        let m = train(Algorithm::Ridge, &d, &TrainingConfig { alpha: 0.0, ..Default::default() })
            .unwrap();
        if let Model::Linear(lm) = &m {
            for r in d.rows() {
                assert_eq!(m.predict(&r.values).unwrap(), Label::from_sign(lm.decision(&r.values).unwrap()));
            }
        }
    }

    #[test]
    fn cv_is_deterministic() {
        let d = blobs(30, 2);
        let cfg = TrainingConfig::default();
        let first = kfold_cv(&d, 5, Algorithm::SvmLinear, &cfg, 7).unwrap();
        for _ in 0..4 {
            assert_eq!(kfold_cv(&d, 5, Algorithm::SvmLinear, &cfg, 7).unwrap(), first);
        }
    }

    #[test]
    fn duplicated_halves() {
        let d = blobs(12, 3);
        let doubled = Dataset::new([d.rows(), d.rows()].concat()).unwrap();
        let folds = vec![(0..12).collect(), (12..24).collect()];
        let cfg = TrainingConfig::default();
        let r = cv_with_folds(&doubled, &folds, |tr, te| {
            Ok(evaluate(&train(Algorithm::Ridge, tr, &cfg)?, te)?.accuracy.unwrap())
        })
        .unwrap();
        assert_eq!(r.fold_accuracies[0], r.fold_accuracies[1]);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn stubs_refuse_to_train() {
        assert!(train(Algorithm::Lgbm, &blobs(10, 0), &TrainingConfig::default()).is_err());
        assert_eq!("svm_linear".parse::<Algorithm>().unwrap(), Algorithm::SvmLinear);
    }
}
