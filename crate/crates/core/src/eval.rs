//! Classification metrics and study reports.
//!
//! Phishing (+1) is the positive class everywhere. Zero denominators yield
//! metric 0 with a degenerate flag rather than NaN.

use crate::metrics::{correlate_metrics, MetricError};
use crate::model::Label;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and truth vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("labels must be +1 or -1, found {0}")]
    BadLabel(i8),
    #[error("empty input")]
    Empty,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any denominator was zero and the affected metric was
    /// reported as 0.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub phishing: ClassMetrics,
    pub non_phishing: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

fn check_labels(y_true: &[Label], y_pred: &[Label]) -> Result<(), EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    for &l in y_true.iter().chain(y_pred) {
        if l != 1 && l != -1 {
            return Err(EvalError::BadLabel(l));
        }
    }
    Ok(())
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let mut degenerate = false;
    let precision = if tp + fp == 0 {
        degenerate = true;
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        degenerate = true;
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        degenerate,
    }
}

/// Per-class and macro precision/recall/F1 plus the confusion matrix.
pub fn classification_report(
    y_true: &[Label],
    y_pred: &[Label],
) -> Result<ClassificationReport, EvalError> {
    check_labels(y_true, y_pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_positive += 1,
            (-1, 1) => cm.false_positive += 1,
            (-1, -1) => cm.true_negative += 1,
            (1, -1) => cm.false_negative += 1,
            _ => unreachable!("labels validated"),
        }
    }
    let phishing = class_metrics(cm.true_positive, cm.false_positive, cm.false_negative);
    // the negative class's "true positives" are the true negatives
    let non_phishing = class_metrics(cm.true_negative, cm.false_negative, cm.false_positive);
    Ok(ClassificationReport {
        phishing,
        non_phishing,
        macro_precision: (phishing.precision + non_phishing.precision) / 2.0,
        macro_recall: (phishing.recall + non_phishing.recall) / 2.0,
        macro_f1: (phishing.f1 + non_phishing.f1) / 2.0,
        accuracy: (cm.true_positive + cm.true_negative) as f64 / cm.total() as f64,
        confusion: cm,
    })
}

/// Count of non-phishing samples predicted phishing.
pub fn false_positive_count(y_true: &[Label], y_pred: &[Label]) -> Result<usize, EvalError> {
    check_labels(y_true, y_pred)?;
    Ok(y_true
        .iter()
        .zip(y_pred)
        .filter(|(&t, &p)| t == -1 && p == 1)
        .count())
}

/// One row of the ansatz study: quality metrics next to test scores.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyRow {
    pub circuit_id: u32,
    pub layers: usize,
    pub encoder: String,
    pub expressibility_kl: f64,
    pub meyer_wallach: f64,
    pub von_neumann: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Pearson r for one (encoder, metric, score) cell; `r` is None when a
/// column was constant (undefined correlation, flagged not failed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub encoder: String,
    pub metric: String,
    pub score: String,
    pub r: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationReport {
    pub fn get(&self, encoder: &str, metric: &str, score: &str) -> Option<&CorrelationEntry> {
        self.entries
            .iter()
            .find(|e| e.encoder == encoder && e.metric == metric && e.score == score)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("encoder,metric,score,r,n\n");
        for e in &self.entries {
            let r = e.r.map_or(String::from("undefined"), |v| format!("{v:.6}"));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.encoder, e.metric, e.score, r, e.n
            ));
        }
        out
    }
}

type StudyColumn = (&'static str, fn(&StudyRow) -> f64);

const METRIC_COLUMNS: [StudyColumn; 3] = [
    ("expressibility", |r| r.expressibility_kl),
    ("meyer_wallach", |r| r.meyer_wallach),
    ("von_neumann", |r| r.von_neumann),
];

const SCORE_COLUMNS: [StudyColumn; 3] = [
    ("precision", |r| r.precision),
    ("recall", |r| r.recall),
    ("f1", |r| r.f1),
];

/// Pearson r per (encoder, ansatz-quality metric, score) over the study
/// rows. Requires at least 3 circuits per encoder.
pub fn correlation_report(rows: &[StudyRow]) -> Result<CorrelationReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut encoders: Vec<String> = rows.iter().map(|r| r.encoder.clone()).collect();
    encoders.sort();
    encoders.dedup();

    let mut report = CorrelationReport::default();
    for encoder in &encoders {
        let subset: Vec<&StudyRow> = rows.iter().filter(|r| &r.encoder == encoder).collect();
        let mut distinct: Vec<u32> = subset.iter().map(|r| r.circuit_id).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            continue;
        }
        for (metric, mf) in METRIC_COLUMNS {
            for (score, sf) in SCORE_COLUMNS {
                let xs: Vec<f64> = subset.iter().map(|r| mf(r)).collect();
                let ys: Vec<f64> = subset.iter().map(|r| sf(r)).collect();
                let r = match correlate_metrics(&xs, &ys) {
                    Ok(v) => Some(v),
                    Err(MetricError::ConstantInput) => None,
                    Err(_) => None,
                };
                report.entries.push(CorrelationEntry {
                    encoder: encoder.clone(),
                    metric: metric.to_string(),
                    score: score.to_string(),
                    r,
                    n: subset.len(),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_predictions() {
        let y = vec![1, -1, 1, -1, -1];
        let r = classification_report(&y, &y).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.macro_precision, 1.0);
        assert_eq!(r.macro_recall, 1.0);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(false_positive_count(&y, &y).unwrap(), 0);
    }

    #[test]
    fn all_positive_on_imbalanced_test() {
        let mut y_true = vec![1; 1000];
        y_true.extend(vec![-1; 10000]);
        let y_pred = vec![1; 11000];
        let r = classification_report(&y_true, &y_pred).unwrap();
        assert_eq!(r.phishing.recall, 1.0);
        assert!((r.phishing.precision - 1000.0 / 11000.0).abs() < 1e-12);
        assert!(r.non_phishing.degenerate); // no negative predictions at all
        assert_eq!(r.non_phishing.recall, 0.0);
        assert_eq!(false_positive_count(&y_true, &y_pred).unwrap(), 10000);
    }

    #[test]
    fn total_inversion_zeroes_both_classes() {
        let y_true = vec![1, 1, -1, -1];
        let y_pred = vec![-1, -1, 1, 1];
        let r = classification_report(&y_true, &y_pred).unwrap();
        assert_eq!(r.phishing.precision, 0.0);
        assert_eq!(r.phishing.recall, 0.0);
        assert_eq!(r.phishing.f1, 0.0);
        assert_eq!(r.non_phishing.f1, 0.0);
        assert!(r.phishing.degenerate);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            classification_report(&[1, -1], &[1]),
            Err(EvalError::LengthMismatch(2, 1))
        ));
    }

    /// Brute-force per-sample tally oracle on random label/prediction pairs.
    #[test]
    fn report_matches_tally_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 1000;
        let y_true: Vec<Label> = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let y_pred: Vec<Label> = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let r = classification_report(&y_true, &y_pred).unwrap();

        let mut tp = 0;
        let mut fp = 0;
        let mut tn = 0;
        let mut fn_ = 0;
        for i in 0..n {
            match (y_true[i], y_pred[i]) {
                (1, 1) => tp += 1,
                (-1, 1) => fp += 1,
                (-1, -1) => tn += 1,
                _ => fn_ += 1,
            }
        }
        assert_eq!(r.confusion.true_positive, tp);
        assert_eq!(r.confusion.false_positive, fp);
        assert_eq!(r.confusion.true_negative, tn);
        assert_eq!(r.confusion.false_negative, fn_);
        assert_eq!(r.confusion.total(), n);
        let p = tp as f64 / (tp + fp) as f64;
        let rec = tp as f64 / (tp + fn_) as f64;
        assert_eq!(r.phishing.precision, p);
        assert_eq!(r.phishing.recall, rec);
        assert_eq!(r.phishing.f1, 2.0 * p * rec / (p + rec));
        assert_eq!(false_positive_count(&y_true, &y_pred).unwrap(), fp);
    }

    /// Swapping +1/-1 in both vectors swaps the per-class rows and leaves
    /// the macro averages unchanged.
    #[test]
    fn macro_invariant_under_class_relabel() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let y_true: Vec<Label> = (0..200)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let y_pred: Vec<Label> = (0..200)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let a = classification_report(&y_true, &y_pred).unwrap();
        let y_true_s: Vec<Label> = y_true.iter().map(|l| -l).collect();
        let y_pred_s: Vec<Label> = y_pred.iter().map(|l| -l).collect();
        let b = classification_report(&y_true_s, &y_pred_s).unwrap();
        assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
        assert!((a.phishing.f1 - b.non_phishing.f1).abs() < 1e-12);
        assert!((a.non_phishing.precision - b.phishing.precision).abs() < 1e-12);
    }

    #[test]
    fn hand_built_false_positives() {
        let y_true = vec![-1, -1, -1, 1, 1, -1, -1, 1, -1, -1];
        let y_pred = vec![1, -1, 1, 1, 1, -1, 1, 1, -1, -1];
        assert_eq!(false_positive_count(&y_true, &y_pred).unwrap(), 3);
    }

    fn study_row(id: u32, encoder: &str, kl: f64, f1: f64) -> StudyRow {
        StudyRow {
            circuit_id: id,
            layers: 1,
            encoder: encoder.into(),
            expressibility_kl: kl,
            meyer_wallach: kl / 2.0,
            von_neumann: kl / 3.0,
            precision: f1,
            recall: f1,
            f1,
        }
    }

    #[test]
    fn correlation_report_linear_relation() {
        let rows: Vec<StudyRow> = (1..=5)
            .map(|i| study_row(i, "z", i as f64, 1.0 - 0.1 * i as f64))
            .collect();
        let rep = correlation_report(&rows).unwrap();
        let e = rep.get("z", "expressibility", "f1").unwrap();
        assert!((e.r.unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn correlation_report_flags_constant_columns() {
        let rows: Vec<StudyRow> = (1..=4).map(|i| study_row(i, "zz", 2.0, 0.5)).collect();
        let rep = correlation_report(&rows).unwrap();
        let e = rep.get("zz", "expressibility", "f1").unwrap();
        assert!(e.r.is_none());
        assert!(rep.to_csv_string().contains("undefined"));
    }

    /// Shuffling a perfectly linear pairing destroys the correlation: the
    /// median |r| over 100 shuffles at n = 19 stays small.
    #[test]
    fn shuffled_linear_relation_loses_correlation() {
        let xs: Vec<f64> = (0..19).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut abs_rs = Vec::new();
        for _ in 0..100 {
            let mut ys = xs.clone();
            // Fisher-Yates
            for i in (1..ys.len()).rev() {
                let j = rng.random_range(0..=i);
                ys.swap(i, j);
            }
            abs_rs.push(crate::metrics::correlate_metrics(&xs, &ys).unwrap().abs());
        }
        abs_rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = abs_rs[abs_rs.len() / 2];
        assert!(median < 0.5, "median |r| = {median}");
    }
}
