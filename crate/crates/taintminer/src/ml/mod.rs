//! Native classifiers over feature matrices.
//!
//! Four models train side by side on a stratified split: logistic
//! regression, multinomial naive Bayes, k-nearest neighbors, and a decision
//! tree. A trained set serializes to one JSON file together with the
//! feature columns it expects, the split seed, and the train fraction, so a
//! later evaluation can rebuild exactly the same holdout.

pub mod knn;
pub mod logreg;
pub mod metrics;
pub mod naive_bayes;
pub mod split;
pub mod tree;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taintmodel::Label;
use crate::vectorizer::FeatureMatrix;
use metrics::{auc, ConfusionMatrix};

pub use knn::DEFAULT_K;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

/// A row scores as vulnerable when its score reaches this threshold.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("train fraction must sit strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("class {} has only {count} rows; need at least 2", if *.positive { "vulnerable" } else { "non-vulnerable" })]
    ClassTooSmall { positive: bool, count: usize },
    #[error("no rows to work with")]
    EmptyDataset,
    #[error("row for app {app:?} carries no label")]
    UnlabeledRow { app: String },
    #[error("feature columns do not match the model: {detail}")]
    ColumnMismatch { detail: String },
    #[error("row has {found} features, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown classifier {0:?}; choose one of logreg, naive_bayes, knn, decision_tree")]
    UnknownClassifier(String),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Labeled rows ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub apps: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl Dataset {
    /// Requires every row to be labeled.
    pub fn from_matrix(matrix: &FeatureMatrix) -> Result<Dataset, MlError> {
        if matrix.rows.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        let mut apps = Vec::with_capacity(matrix.rows.len());
        let mut x = Vec::with_capacity(matrix.rows.len());
        let mut y = Vec::with_capacity(matrix.rows.len());
        for row in &matrix.rows {
            let label = row.label.ok_or_else(|| MlError::UnlabeledRow {
                app: row.app.clone(),
            })?;
            apps.push(row.app.clone());
            x.push(row.values.clone());
            y.push(label == Label::Vulnerable);
        }
        Ok(Dataset { apps, x, y })
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            apps: idx.iter().map(|&i| self.apps[i].clone()).collect(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Per-column mean/deviation scaling shared by the distance and gradient
/// based models. Constant columns scale by 1 to stay finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        assert!(!rows.is_empty());
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, stds }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub seed: u64,
    pub train_fraction: f64,
    pub knn_k: usize,
    pub logreg: logreg::LogRegParams,
    pub tree: tree::TreeParams,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            seed: DEFAULT_SEED,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            knn_k: DEFAULT_K,
            logreg: logreg::LogRegParams::default(),
            tree: tree::TreeParams::default(),
        }
    }
}

pub const CLASSIFIER_NAMES: [&str; 4] = ["logreg", "naive_bayes", "knn", "decision_tree"];

/// All four trained models plus what they need to be reapplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub columns: Vec<String>,
    pub seed: u64,
    pub train_fraction: f64,
    pub models: Models,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Models {
    pub logreg: logreg::LogRegModel,
    pub naive_bayes: naive_bayes::NaiveBayesModel,
    pub knn: knn::KnnModel,
    pub decision_tree: tree::TreeModel,
}

/// Trains all four classifiers on the stratified train side.
pub fn train(matrix: &FeatureMatrix, params: &TrainParams) -> Result<ModelSet, MlError> {
    let data = Dataset::from_matrix(matrix)?;
    let (train_idx, _) = split::stratified_split(&data.y, params.train_fraction, params.seed)?;
    let tr = data.select(&train_idx);

    Ok(ModelSet {
        columns: matrix.columns.clone(),
        seed: params.seed,
        train_fraction: params.train_fraction,
        models: Models {
            logreg: logreg::fit(&tr.x, &tr.y, &params.logreg),
            naive_bayes: naive_bayes::fit(&tr.x, &tr.y),
            knn: knn::fit(&tr.x, &tr.y, params.knn_k),
            decision_tree: tree::fit(&tr.x, &tr.y, &params.tree),
        },
    })
}

impl ModelSet {
    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelSet, MlError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Scores one feature row with the named classifier.
    pub fn score(&self, classifier: &str, row: &[f64]) -> Result<f64, MlError> {
        if row.len() != self.columns.len() {
            return Err(MlError::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        match classifier {
            "logreg" => Ok(self.models.logreg.score(row)),
            "naive_bayes" => Ok(self.models.naive_bayes.score(row)),
            "knn" => Ok(self.models.knn.score(row)),
            "decision_tree" => Ok(self.models.decision_tree.score(row)),
            other => Err(MlError::UnknownClassifier(other.to_owned())),
        }
    }

    pub fn check_columns(&self, matrix: &FeatureMatrix) -> Result<(), MlError> {
        if matrix.columns == self.columns {
            return Ok(());
        }
        let detail = if matrix.columns.len() != self.columns.len() {
            format!(
                "expected {} columns, found {}",
                self.columns.len(),
                matrix.columns.len()
            )
        } else {
            let (i, (want, got)) = self
                .columns
                .iter()
                .zip(&matrix.columns)
                .enumerate()
                .find(|(_, (a, b))| a != b)
                .expect("lengths equal but contents differ");
            format!("column {i} is {got:?}, expected {want:?}")
        };
        Err(MlError::ColumnMismatch { detail })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub mcc: f64,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub train_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub models: BTreeMap<String, ModelMetrics>,
}

/// Rebuilds the holdout from the stored seed and fraction, then scores it
/// with each model. The matrix must be the same one used for training.
pub fn evaluate(models: &ModelSet, matrix: &FeatureMatrix) -> Result<EvalReport, MlError> {
    models.check_columns(matrix)?;
    let data = Dataset::from_matrix(matrix)?;
    let (train_idx, test_idx) =
        split::stratified_split(&data.y, models.train_fraction, models.seed)?;
    let test = data.select(&test_idx);

    let mut report = EvalReport {
        seed: models.seed,
        train_fraction: models.train_fraction,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        models: BTreeMap::new(),
    };
    for name in CLASSIFIER_NAMES {
        let scores: Vec<f64> = test
            .x
            .iter()
            .map(|row| models.score(name, row))
            .collect::<Result<_, _>>()?;
        let predicted: Vec<bool> = scores.iter().map(|&s| s >= DECISION_THRESHOLD).collect();
        let confusion = ConfusionMatrix::tally(&test.y, &predicted);
        report.models.insert(
            name.to_owned(),
            ModelMetrics {
                accuracy: confusion.accuracy(),
                f1: confusion.f1(),
                mcc: confusion.mcc(),
                auc: auc(&scores, &test.y),
                confusion,
            },
        );
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub app: String,
    pub score: f64,
    pub label: Label,
}

/// Scores every row of a matrix with one named classifier.
pub fn predict(
    models: &ModelSet,
    matrix: &FeatureMatrix,
    classifier: &str,
) -> Result<Vec<Prediction>, MlError> {
    models.check_columns(matrix)?;
    matrix
        .rows
        .iter()
        .map(|row| {
            let score = models.score(classifier, &row.values)?;
            Ok(Prediction {
                app: row.app.clone(),
                score,
                label: if score >= DECISION_THRESHOLD {
                    Label::Vulnerable
                } else {
                    Label::NonVulnerable
                },
            })
        })
        .collect()
}
