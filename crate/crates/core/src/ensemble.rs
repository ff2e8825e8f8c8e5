//! Stacking and bagging over any classifier mix.
//!
//! Stacking appends each fitted model's +-1 predictions to the feature rows
//! level by level (two-level: base models + meta; three-level: an extra
//! middle tier), always in plan order, and trains the next tier on the
//! augmented rows. Bagging trains same-kind members that share the positive
//! rows and resample negatives, then combines by majority vote or by
//! phishing-F1-weighted average.

use crate::eval::classification_report;
use crate::model::{classifier_from_json, Classifier, Dataset, Label, ModelError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const STACK_TAG: &str = "stack";
pub const BAG_TAG: &str = "bag";

/// Append each fitted model's predictions to the feature rows, in order.
/// Output width = input width + number of models. Columns are hard +-1
/// labels; see [`StackedClassifier::with_probability_columns`] for the
/// probability variant.
pub fn augment_features(
    base_models: &[Box<dyn Classifier>],
    data: &Dataset,
) -> Result<Dataset, ModelError> {
    augment_features_with(base_models, data, false)
}

fn column_value(model: &dyn Classifier, x: &[f64], probability: bool) -> Result<f64, ModelError> {
    if probability {
        if let Some(p) = model.predict_probability(x)? {
            return Ok(p);
        }
    }
    Ok(f64::from(model.predict(x)?))
}

fn augment_features_with(
    base_models: &[Box<dyn Classifier>],
    data: &Dataset,
    probability: bool,
) -> Result<Dataset, ModelError> {
    for m in base_models {
        if !m.is_fitted() {
            return Err(ModelError::NotFitted);
        }
    }
    let mut rows: Vec<Vec<f64>> = data.features().to_vec();
    for model in base_models {
        for (row, x) in rows.iter_mut().zip(data.features()) {
            row.push(column_value(model.as_ref(), x, probability)?);
        }
    }
    Dataset::new(rows, data.labels().to_vec())
}

fn augment_row(
    models: &[Box<dyn Classifier>],
    row: &[f64],
    probability: bool,
) -> Result<Vec<f64>, ModelError> {
    let mut out = row.to_vec();
    for model in models {
        out.push(column_value(model.as_ref(), row, probability)?);
    }
    Ok(out)
}

/// Recorded at fit time; predictions verify against it so train and predict
/// paths cannot silently drift in column layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackSignature {
    pub base_dim: usize,
    pub level0: Vec<String>,
    pub level1: Vec<String>,
    pub meta: String,
    #[serde(default)]
    pub probability_columns: bool,
}

/// Two- or three-level stacking: level1 empty gives the two-level flow.
pub struct StackedClassifier {
    level0: Vec<Box<dyn Classifier>>,
    level1: Vec<Box<dyn Classifier>>,
    meta: Box<dyn Classifier>,
    probability_columns: bool,
    signature: Option<StackSignature>,
}

impl StackedClassifier {
    pub fn new(
        level0: Vec<Box<dyn Classifier>>,
        level1: Vec<Box<dyn Classifier>>,
        meta: Box<dyn Classifier>,
    ) -> Result<Self, ModelError> {
        if level0.is_empty() && !level1.is_empty() {
            return Err(ModelError::Config(
                "level-1 models require level-0 models".into(),
            ));
        }
        Ok(StackedClassifier {
            level0,
            level1,
            meta,
            probability_columns: false,
            signature: None,
        })
    }

    /// Append +1-class probabilities instead of hard labels for learners
    /// that expose them (others keep contributing +-1). Off by default.
    pub fn with_probability_columns(mut self) -> Self {
        self.probability_columns = true;
        self
    }

    /// Assemble a stack from already-fitted parts (reference flows in tests).
    #[cfg(test)]
    pub(crate) fn from_fitted(
        level0: Vec<Box<dyn Classifier>>,
        level1: Vec<Box<dyn Classifier>>,
        meta: Box<dyn Classifier>,
        base_dim: usize,
    ) -> Self {
        let signature = StackSignature {
            base_dim,
            level0: level0.iter().map(|m| m.name().to_string()).collect(),
            level1: level1.iter().map(|m| m.name().to_string()).collect(),
            meta: meta.name().to_string(),
            probability_columns: false,
        };
        StackedClassifier {
            level0,
            level1,
            meta,
            probability_columns: false,
            signature: Some(signature),
        }
    }

    pub fn signature(&self) -> Option<&StackSignature> {
        self.signature.as_ref()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        let arr = |key: &str| -> Result<Vec<Box<dyn Classifier>>, ModelError> {
            v.get(key)
                .and_then(|a| a.as_array())
                .ok_or_else(|| ModelError::Serialization(format!("stack: missing `{key}`")))?
                .iter()
                .map(classifier_from_json)
                .collect()
        };
        let meta = classifier_from_json(
            v.get("meta")
                .ok_or_else(|| ModelError::Serialization("stack: missing `meta`".into()))?,
        )?;
        let signature: Option<StackSignature> = match v.get("signature") {
            Some(serde_json::Value::Null) | None => None,
            Some(s) => Some(
                serde_json::from_value(s.clone())
                    .map_err(|e| ModelError::Serialization(e.to_string()))?,
            ),
        };
        let probability_columns = signature.as_ref().is_some_and(|s| s.probability_columns);
        Ok(StackedClassifier {
            level0: arr("level0")?,
            level1: arr("level1")?,
            meta,
            probability_columns,
            signature,
        })
    }
}

impl Classifier for StackedClassifier {
    fn name(&self) -> &'static str {
        "stack"
    }

    fn is_fitted(&self) -> bool {
        self.signature.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        for m in &mut self.level0 {
            m.fit(data)?;
        }
        let after_level0 = if self.level0.is_empty() {
            data.clone()
        } else {
            augment_features_with(&self.level0, data, self.probability_columns)?
        };
        for m in &mut self.level1 {
            m.fit(&after_level0)?;
        }
        let after_level1 = if self.level1.is_empty() {
            after_level0
        } else {
            augment_features_with(&self.level1, &after_level0, self.probability_columns)?
        };
        self.meta.fit(&after_level1)?;
        self.signature = Some(StackSignature {
            base_dim: data.n_features(),
            level0: self.level0.iter().map(|m| m.name().to_string()).collect(),
            level1: self.level1.iter().map(|m| m.name().to_string()).collect(),
            meta: self.meta.name().to_string(),
            probability_columns: self.probability_columns,
        });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        let sig = self.signature.as_ref().ok_or(ModelError::NotFitted)?;
        if x.len() != sig.base_dim {
            return Err(ModelError::DimensionMismatch {
                expected: sig.base_dim,
                got: x.len(),
            });
        }
        // the recorded signature keeps the train- and predict-time column
        // semantics in lockstep
        let prob = sig.probability_columns;
        let row0 = augment_row(&self.level0, x, prob)?;
        let row1 = if self.level1.is_empty() {
            row0
        } else {
            augment_row(&self.level1, &row0, prob)?
        };
        self.meta.predict(&row1)
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        let level0: Vec<_> = self
            .level0
            .iter()
            .map(|m| m.to_json())
            .collect::<Result<_, _>>()?;
        let level1: Vec<_> = self
            .level1
            .iter()
            .map(|m| m.to_json())
            .collect::<Result<_, _>>()?;
        Ok(serde_json::json!({
            "model": STACK_TAG,
            "level0": level0,
            "level1": level1,
            "meta": self.meta.to_json()?,
            "signature": self.signature,
        }))
    }
}

/// How bagged member predictions are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineRule {
    MaxVote,
    WeightedAverage,
}

/// Combine member predictions on one row. Max vote breaks ties toward +1
/// (phishing); weighted average takes sign(sum w_m pred_m) with sign(0) = +1.
pub fn bag_predict(
    members: &[Box<dyn Classifier>],
    weights: Option<&[f64]>,
    rule: CombineRule,
    x: &[f64],
) -> Result<Label, ModelError> {
    if members.is_empty() {
        return Err(ModelError::Config(
            "bagging requires at least one member".into(),
        ));
    }
    match rule {
        CombineRule::MaxVote => {
            let mut plus = 0usize;
            for m in members {
                if m.predict(x)? == 1 {
                    plus += 1;
                }
            }
            Ok(if 2 * plus >= members.len() { 1 } else { -1 })
        }
        CombineRule::WeightedAverage => {
            let w = weights.ok_or_else(|| {
                ModelError::Config("weighted-average bagging requires weights".into())
            })?;
            if w.len() != members.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: members.len(),
                    got: w.len(),
                });
            }
            if w.iter().any(|v| *v < 0.0) || w.iter().all(|v| *v == 0.0) {
                return Err(ModelError::Config(
                    "weights must be non-negative and not all zero".into(),
                ));
            }
            let mut acc = 0.0;
            for (m, wi) in members.iter().zip(w) {
                acc += wi * f64::from(m.predict(x)?);
            }
            Ok(if acc >= 0.0 { 1 } else { -1 })
        }
    }
}

/// Fraction of the training pool held out per class to score member weights
/// in weighted mode. Never the test set.
pub const WEIGHT_HOLDOUT_FRACTION: f64 = 0.2;

/// Bagging over same-kind members: every member trains on all pool
/// positives plus an equally sized, per-member resample of pool negatives.
pub struct BaggedClassifier {
    members: Vec<Box<dyn Classifier>>,
    rule: CombineRule,
    seed: u64,
    weights: Option<Vec<f64>>,
    fitted: bool,
}

impl BaggedClassifier {
    /// `members` are unfitted same-kind instances (commonly 5); each gets
    /// its own negative resample at fit time.
    pub fn new(
        members: Vec<Box<dyn Classifier>>,
        rule: CombineRule,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if members.is_empty() {
            return Err(ModelError::Config(
                "bagging requires at least one member".into(),
            ));
        }
        Ok(BaggedClassifier {
            members,
            rule,
            seed,
            weights: None,
            fitted: false,
        })
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        let members = v
            .get("members")
            .and_then(|a| a.as_array())
            .ok_or_else(|| ModelError::Serialization("bag: missing `members`".into()))?
            .iter()
            .map(classifier_from_json)
            .collect::<Result<Vec<_>, _>>()?;
        let rule =
            serde_json::from_value(v.get("rule").cloned().unwrap_or(serde_json::Value::Null))
                .map_err(|e| ModelError::Serialization(e.to_string()))?;
        let seed = v.get("seed").and_then(|s| s.as_u64()).unwrap_or(0);
        let weights = match v.get("weights") {
            Some(serde_json::Value::Null) | None => None,
            Some(w) => Some(
                serde_json::from_value(w.clone())
                    .map_err(|e| ModelError::Serialization(e.to_string()))?,
            ),
        };
        let fitted = v.get("fitted").and_then(|f| f.as_bool()).unwrap_or(false);
        Ok(BaggedClassifier {
            members,
            rule,
            seed,
            weights,
            fitted,
        })
    }
}

fn shuffled(mut indices: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    indices.shuffle(rng);
    indices
}

impl Classifier for BaggedClassifier {
    fn name(&self) -> &'static str {
        "bag"
    }

    fn is_fitted(&self) -> bool {
        self.fitted
    }

    fn fit(&mut self, pool: &Dataset) -> Result<(), ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pos = shuffled(pool.indices_with_label(1), &mut rng);
        let neg = shuffled(pool.indices_with_label(-1), &mut rng);
        if pos.is_empty() || neg.is_empty() {
            return Err(ModelError::Config("bagging pool needs both classes".into()));
        }

        // weighted mode holds out a slice of the pool (never the test set)
        // to score each member's phishing F1
        let (train_pos, train_neg, holdout) = if self.rule == CombineRule::WeightedAverage {
            let hp =
                ((pos.len() as f64 * WEIGHT_HOLDOUT_FRACTION) as usize).clamp(1, pos.len() - 1);
            let hn =
                ((neg.len() as f64 * WEIGHT_HOLDOUT_FRACTION) as usize).clamp(1, neg.len() - 1);
            let mut held: Vec<usize> = pos[..hp].to_vec();
            held.extend_from_slice(&neg[..hn]);
            (
                pos[hp..].to_vec(),
                neg[hn..].to_vec(),
                Some(pool.select(&held)?),
            )
        } else {
            (pos, neg, None)
        };

        for (m, member) in self.members.iter_mut().enumerate() {
            let mut member_rng =
                ChaCha8Rng::seed_from_u64(self.seed ^ (m as u64).wrapping_mul(0x9E37_79B9));
            let sample_size = train_pos.len();
            let negatives: Vec<usize> = if train_neg.len() >= sample_size {
                shuffled(train_neg.clone(), &mut member_rng)[..sample_size].to_vec()
            } else {
                (0..sample_size)
                    .map(|_| {
                        train_neg[rand::Rng::random_range(&mut member_rng, 0..train_neg.len())]
                    })
                    .collect()
            };
            let mut indices = train_pos.clone();
            indices.extend(negatives);
            member.fit(&pool.select(&indices)?)?;
        }

        self.weights = match &holdout {
            Some(h) => {
                let mut ws = Vec::with_capacity(self.members.len());
                for member in &self.members {
                    let preds = member.predict_batch(h.features())?;
                    let report = classification_report(h.labels(), &preds)
                        .map_err(|e| ModelError::Config(e.to_string()))?;
                    ws.push(report.phishing.f1);
                }
                // degenerate all-zero weights fall back to equal weighting
                if ws.iter().all(|w| *w == 0.0) {
                    ws = vec![1.0; self.members.len()];
                }
                Some(ws)
            }
            None => None,
        };
        self.fitted = true;
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        if !self.fitted {
            return Err(ModelError::NotFitted);
        }
        bag_predict(&self.members, self.weights.as_deref(), self.rule, x)
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        let members: Vec<_> = self
            .members
            .iter()
            .map(|m| m.to_json())
            .collect::<Result<_, _>>()?;
        Ok(serde_json::json!({
            "model": BAG_TAG,
            "members": members,
            "rule": self.rule,
            "seed": self.seed,
            "weights": self.weights,
            "fitted": self.fitted,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{train_gbt, train_logistic, LogisticRegression};
    use crate::model::POSITIVE;

    /// Test-only model that memorizes the training labels by feature row.
    #[derive(Clone, Default)]
    struct OracleClassifier {
        memory: std::collections::BTreeMap<String, Label>,
    }

    fn key(x: &[f64]) -> String {
        x.iter()
            .map(|v| format!("{v:.12e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    impl Classifier for OracleClassifier {
        fn name(&self) -> &'static str {
            "oracle"
        }
        fn is_fitted(&self) -> bool {
            !self.memory.is_empty()
        }
        fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
            self.memory = data.iter().map(|(x, y)| (key(x), y)).collect();
            Ok(())
        }
        fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
            if self.memory.is_empty() {
                return Err(ModelError::NotFitted);
            }
            Ok(self.memory.get(&key(x)).copied().unwrap_or(POSITIVE))
        }
        fn to_json(&self) -> Result<serde_json::Value, ModelError> {
            Err(ModelError::Serialization("oracle is test-only".into()))
        }
    }

    /// Constant-output model for combiner tests.
    struct ConstClassifier(Label);

    impl Classifier for ConstClassifier {
        fn name(&self) -> &'static str {
            "const"
        }
        fn is_fitted(&self) -> bool {
            true
        }
        fn fit(&mut self, _: &Dataset) -> Result<(), ModelError> {
            Ok(())
        }
        fn predict(&self, _: &[f64]) -> Result<Label, ModelError> {
            Ok(self.0)
        }
        fn to_json(&self) -> Result<serde_json::Value, ModelError> {
            Err(ModelError::Serialization("const is test-only".into()))
        }
    }

    fn seven_feature_data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| (0..7).map(|j| (i * 7 + j) as f64 * 0.1).collect())
            .collect();
        let labels = (0..10).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Dataset::new(rows, labels).unwrap()
    }

    #[test]
    fn augment_appends_one_column_per_model() {
        let data = seven_feature_data();
        let models: Vec<Box<dyn Classifier>> =
            vec![Box::new(ConstClassifier(1)), Box::new(ConstClassifier(-1))];
        let out = augment_features(&models, &data).unwrap();
        assert_eq!(out.n_features(), 9);
        for row in out.features() {
            assert_eq!(row[7], 1.0);
            assert_eq!(row[8], -1.0);
        }
        // zero models: identity transform
        let identity = augment_features(&[], &data).unwrap();
        assert_eq!(identity, data);
    }

    #[test]
    fn augment_rejects_unfitted_models() {
        let data = seven_feature_data();
        let models: Vec<Box<dyn Classifier>> = vec![Box::new(LogisticRegression::new(0.0, 5, 0))];
        assert!(matches!(
            augment_features(&models, &data),
            Err(ModelError::NotFitted)
        ));
    }

    #[test]
    fn perfect_oracle_stack_reaches_full_training_accuracy() {
        let data = seven_feature_data();
        let mut stack = StackedClassifier::new(
            vec![Box::new(OracleClassifier::default())],
            vec![],
            Box::new(LogisticRegression::new(1e-4, 400, 0)),
        )
        .unwrap();
        stack.fit(&data).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(stack.predict(x).unwrap(), y);
        }
        let sig = stack.signature().unwrap();
        assert_eq!(sig.base_dim, 7);
        assert_eq!(sig.level0, vec!["oracle"]);
        assert!(sig.level1.is_empty());
    }

    #[test]
    fn three_level_stack_trains_each_tier_on_augmented_rows() {
        let data = seven_feature_data();
        let stack = StackedClassifier::new(
            vec![Box::new(OracleClassifier::default())],
            vec![
                Box::new(train_gbt(&seven_feature_data(), 0, 0.1, 2, 0).unwrap()),
                Box::new(OracleClassifier::default()),
            ],
            Box::new(LogisticRegression::new(1e-4, 300, 0)),
        )
        .unwrap();
        // replace the pre-fitted gbt with a fresh one so fit() exercises all tiers
        let mut stack2 = StackedClassifier::new(
            vec![Box::new(OracleClassifier::default())],
            vec![
                Box::new(crate::classical::GradientBoostedTrees::new(5, 0.2, 2, 0)),
                Box::new(OracleClassifier::default()),
            ],
            Box::new(LogisticRegression::new(1e-4, 300, 0)),
        )
        .unwrap();
        stack2.fit(&data).unwrap();
        let sig = stack2.signature().unwrap();
        assert_eq!(sig.level0.len(), 1);
        assert_eq!(sig.level1.len(), 2);
        assert_eq!(sig.meta, "logistic");
        for (x, y) in data.iter() {
            assert_eq!(stack2.predict(x).unwrap(), y);
        }
        // dimension drift between train and predict is a contract violation
        assert!(matches!(
            stack2.predict(&[0.0; 9]),
            Err(ModelError::DimensionMismatch {
                expected: 7,
                got: 9
            })
        ));
        drop(stack);
    }

    /// A meta model whose appended-column weights are frozen at zero must
    /// reproduce the same model trained on raw features exactly.
    #[test]
    fn zero_weighted_appended_columns_reduce_to_raw_model() {
        let data = seven_feature_data();
        let raw_weights = vec![0.4, -0.2, 0.1, 0.05, -0.3, 0.2, -0.1];
        let reference = LogisticRegression::from_weights(raw_weights.clone(), 0.15);

        let mut meta_weights = raw_weights;
        meta_weights.extend([0.0, 0.0]); // two appended prediction columns
        let meta = LogisticRegression::from_weights(meta_weights, 0.15);

        let mut o1 = OracleClassifier::default();
        o1.fit(&data).unwrap();
        let mut o2 = OracleClassifier::default();
        o2.fit(&data.negated()).unwrap();
        let stack = StackedClassifier::from_fitted(
            vec![Box::new(o1), Box::new(o2)],
            vec![],
            Box::new(meta),
            7,
        );
        for (x, _) in data.iter() {
            assert_eq!(stack.predict(x).unwrap(), reference.predict(x).unwrap());
        }
    }

    #[test]
    fn bag_predict_combiner_examples() {
        let members: Vec<Box<dyn Classifier>> = vec![
            Box::new(ConstClassifier(1)),
            Box::new(ConstClassifier(1)),
            Box::new(ConstClassifier(1)),
            Box::new(ConstClassifier(-1)),
            Box::new(ConstClassifier(-1)),
        ];
        assert_eq!(
            bag_predict(&members, None, CombineRule::MaxVote, &[0.0]).unwrap(),
            1
        );

        let trio: Vec<Box<dyn Classifier>> = vec![
            Box::new(ConstClassifier(1)),
            Box::new(ConstClassifier(1)),
            Box::new(ConstClassifier(-1)),
        ];
        // sign(0.5 + 0.3 - 0.2) = +1
        let w = [0.5, 0.3, 0.2];
        assert_eq!(
            bag_predict(&trio, Some(&w), CombineRule::WeightedAverage, &[0.0]).unwrap(),
            1
        );
        // heavier negative flips it
        let w = [0.1, 0.2, 0.9];
        assert_eq!(
            bag_predict(&trio, Some(&w), CombineRule::WeightedAverage, &[0.0]).unwrap(),
            -1
        );

        let single: Vec<Box<dyn Classifier>> = vec![Box::new(ConstClassifier(-1))];
        assert_eq!(
            bag_predict(&single, None, CombineRule::MaxVote, &[0.0]).unwrap(),
            -1
        );

        // even split breaks toward +1
        let pair: Vec<Box<dyn Classifier>> =
            vec![Box::new(ConstClassifier(1)), Box::new(ConstClassifier(-1))];
        assert_eq!(
            bag_predict(&pair, None, CombineRule::MaxVote, &[0.0]).unwrap(),
            1
        );

        assert!(bag_predict(
            &trio,
            Some(&[0.0, 0.0, 0.0]),
            CombineRule::WeightedAverage,
            &[0.0]
        )
        .is_err());
        assert!(bag_predict(&trio, None, CombineRule::WeightedAverage, &[0.0]).is_err());
    }

    #[test]
    fn identical_members_match_single_member() {
        let data = seven_feature_data();
        let make = || {
            let mut o = OracleClassifier::default();
            o.fit(&data).unwrap();
            Box::new(o) as Box<dyn Classifier>
        };
        let five: Vec<Box<dyn Classifier>> = (0..5).map(|_| make()).collect();
        let one = make();
        let w = vec![0.5; 5];
        for (x, _) in data.iter() {
            let single = one.predict(x).unwrap();
            assert_eq!(
                bag_predict(&five, None, CombineRule::MaxVote, x).unwrap(),
                single
            );
            assert_eq!(
                bag_predict(&five, Some(&w), CombineRule::WeightedAverage, x).unwrap(),
                single
            );
        }
    }

    #[test]
    fn bagged_classifier_shares_positives_and_resamples_negatives() {
        // pool: 6 positives, 30 negatives
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..6 {
            rows.push(vec![3.0 + (i as f64) * 0.01, 3.0]);
            labels.push(1);
        }
        for i in 0..30 {
            rows.push(vec![(i as f64) * 0.01, 0.0]);
            labels.push(-1);
        }
        let pool = Dataset::new(rows, labels).unwrap();
        let members: Vec<Box<dyn Classifier>> = (0..5)
            .map(|i| Box::new(train_gbt_stub(i)) as Box<dyn Classifier>)
            .collect();
        let mut bag = BaggedClassifier::new(members, CombineRule::MaxVote, 3).unwrap();
        bag.fit(&pool).unwrap();
        assert!(bag.is_fitted());
        assert_eq!(bag.predict(&[3.0, 3.0]).unwrap(), 1);
        assert_eq!(bag.predict(&[0.05, 0.0]).unwrap(), -1);
    }

    fn train_gbt_stub(seed: u64) -> crate::classical::GradientBoostedTrees {
        crate::classical::GradientBoostedTrees::new(10, 0.3, 2, seed)
    }

    #[test]
    fn weighted_bag_computes_holdout_f1_weights() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            rows.push(vec![2.0 + (i as f64) * 0.01, 2.0]);
            labels.push(1);
        }
        for i in 0..40 {
            rows.push(vec![(i as f64) * 0.01, 0.0]);
            labels.push(-1);
        }
        let pool = Dataset::new(rows, labels).unwrap();
        let members: Vec<Box<dyn Classifier>> = (0..3)
            .map(|i| Box::new(train_gbt_stub(i)) as Box<dyn Classifier>)
            .collect();
        let mut bag = BaggedClassifier::new(members, CombineRule::WeightedAverage, 5).unwrap();
        bag.fit(&pool).unwrap();
        let weights = bag.weights().unwrap();
        assert_eq!(weights.len(), 3);
        assert!(weights.iter().all(|w| (0.0..=1.0).contains(w)));
        assert!(weights.iter().any(|w| *w > 0.0));
        assert_eq!(bag.predict(&[2.1, 2.0]).unwrap(), 1);
    }

    #[test]
    fn probability_columns_feed_the_meta_learner() {
        let data = seven_feature_data();
        let mut stack = StackedClassifier::new(
            vec![Box::new(train_logistic(&data, 1e-3, 200, 0).unwrap())],
            vec![],
            Box::new(crate::classical::GradientBoostedTrees::new(10, 0.2, 2, 0)),
        )
        .unwrap()
        .with_probability_columns();
        stack.fit(&data).unwrap();
        assert!(stack.signature().unwrap().probability_columns);
        // round-trips keep the column semantics
        let loaded = classifier_from_json(&stack.to_json().unwrap()).unwrap();
        for (x, _) in data.iter() {
            assert_eq!(loaded.predict(x).unwrap(), stack.predict(x).unwrap());
        }
    }

    #[test]
    fn stack_json_roundtrip() {
        let data = seven_feature_data();
        let mut stack = StackedClassifier::new(
            vec![Box::new(train_logistic(&data, 1e-3, 100, 0).unwrap())],
            vec![],
            Box::new(crate::classical::GradientBoostedTrees::new(5, 0.2, 2, 0)),
        )
        .unwrap();
        stack.fit(&data).unwrap();
        let json = stack.to_json().unwrap();
        let loaded = classifier_from_json(&json).unwrap();
        for (x, _) in data.iter() {
            assert_eq!(loaded.predict(x).unwrap(), stack.predict(x).unwrap());
        }
    }
}
