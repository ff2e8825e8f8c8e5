//! The shared classifier contract.
//!
//! Quantum, classical, and ensemble models all train on a [`Dataset`] of
//! feature rows with +-1 labels and predict +-1 labels, so they compose
//! freely inside stacks and bags. Fitted models serialize to tagged JSON
//! documents and round-trip through [`classifier_from_json`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Class label: +1 = phishing (positive class), -1 = non-phishing.
pub type Label = i8;

pub const POSITIVE: Label = 1;
pub const NEGATIVE: Label = -1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("predict called before train")]
    NotFitted,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("labels must be +1 or -1, found {0}")]
    BadLabel(i8),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error(transparent)]
    Encode(#[from] crate::encoders::EncodeError),
    #[error(transparent)]
    Sim(#[from] crate::qsim::SimError),
    #[error(transparent)]
    Ansatz(#[from] crate::ansatz::AnsatzError),
    #[error(transparent)]
    Optim(#[from] crate::optimize::OptimError),
}

/// Feature rows plus labels. Rows all share one width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self, ModelError> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(ModelError::EmptyDataset);
        }
        let width = features[0].len();
        for row in &features {
            if row.len() != width {
                return Err(ModelError::DimensionMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
        }
        for &l in &labels {
            if l != POSITIVE && l != NEGATIVE {
                return Err(ModelError::BadLabel(l));
            }
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> (&[f64], Label) {
        (&self.features[i], self.labels[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> {
        self.features
            .iter()
            .map(Vec::as_slice)
            .zip(self.labels.iter().copied())
    }

    /// Subset by row indices (duplicates allowed, for resampling).
    pub fn select(&self, indices: &[usize]) -> Result<Dataset, ModelError> {
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(features, labels)
    }

    /// Rows with the given label.
    pub fn indices_with_label(&self, label: Label) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// Flip every label (used by the label-symmetry tests).
    pub fn negated(&self) -> Dataset {
        Dataset {
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| -l).collect(),
        }
    }
}

/// Uniform train/predict contract shared by all models.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &'static str;

    fn is_fitted(&self) -> bool;

    /// Fit on the dataset. Fitting twice with the same data and seed must
    /// produce the same model.
    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError>;

    /// Predict the label of one feature row.
    fn predict(&self, x: &[f64]) -> Result<Label, ModelError>;

    fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Label>, ModelError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Probability of the +1 class, for learners that expose one. The
    /// default is None; stacking falls back to hard labels then.
    fn predict_probability(&self, _x: &[f64]) -> Result<Option<f64>, ModelError> {
        Ok(None)
    }

    /// Serialize the fitted model to a tagged JSON document.
    fn to_json(&self) -> Result<serde_json::Value, ModelError>;
}

pub(crate) fn tagged<T: Serialize>(kind: &str, model: &T) -> Result<serde_json::Value, ModelError> {
    let mut v =
        serde_json::to_value(model).map_err(|e| ModelError::Serialization(e.to_string()))?;
    match v.as_object_mut() {
        Some(map) => {
            if map.contains_key("model") {
                return Err(ModelError::Serialization(
                    "field name `model` collides with the type tag".into(),
                ));
            }
            map.insert(
                "model".to_string(),
                serde_json::Value::String(kind.to_string()),
            );
            Ok(v)
        }
        None => Err(ModelError::Serialization(
            "model did not serialize to an object".into(),
        )),
    }
}

pub(crate) fn untagged<T: for<'de> Deserialize<'de>>(
    value: &serde_json::Value,
) -> Result<T, ModelError> {
    serde_json::from_value(value.clone()).map_err(|e| ModelError::Serialization(e.to_string()))
}

/// Rebuild a classifier from its tagged JSON document.
pub fn classifier_from_json(value: &serde_json::Value) -> Result<Box<dyn Classifier>, ModelError> {
    let kind = value
        .get("model")
        .and_then(|v| v.as_str())
        .ok_or_else(|| ModelError::Serialization("missing `model` tag".into()))?;
    match kind {
        crate::classical::LOGISTIC_TAG => Ok(Box::new(
            crate::classical::LogisticRegression::from_json(value)?,
        )),
        crate::classical::GBT_TAG => Ok(Box::new(
            crate::classical::GradientBoostedTrees::from_json(value)?,
        )),
        crate::classical::SVM_TAG => {
            Ok(Box::new(crate::classical::ClassicalSvm::from_json(value)?))
        }
        crate::qsvm::KERNEL_QSVM_TAG => Ok(Box::new(crate::qsvm::KernelQsvm::from_json(value)?)),
        crate::qsvm::ANNEAL_QSVM_TAG => Ok(Box::new(crate::qsvm::AnnealQsvm::from_json(value)?)),
        crate::vqc::VQC_TAG => Ok(Box::new(crate::vqc::VqcClassifier::from_json(value)?)),
        crate::ensemble::STACK_TAG => Ok(Box::new(crate::ensemble::StackedClassifier::from_json(
            value,
        )?)),
        crate::ensemble::BAG_TAG => Ok(Box::new(crate::ensemble::BaggedClassifier::from_json(
            value,
        )?)),
        other => Err(ModelError::Serialization(format!(
            "unknown model tag `{other}`"
        ))),
    }
}
