//! Classical baselines behind the shared classifier contract.
//!
//! Logistic regression (full-batch gradient descent with backtracking line
//! search on standardized features), a small gradient-boosted-trees learner
//! on logistic loss with exact greedy splits, and an RBF-kernel SVM reusing
//! the dual solver.

use crate::model::{tagged, untagged, Classifier, Dataset, Label, ModelError};
use crate::qsvm::{compute_bias, rbf_kernel, solve_dual_svm, svm_predict, KernelKind, SvmModel};
use serde::{Deserialize, Serialize};

pub const LOGISTIC_TAG: &str = "logistic";
pub const GBT_TAG: &str = "gbt";
pub const SVM_TAG: &str = "classical-svm";

/// Per-feature standardization fitted on the training split. Constant
/// features pass through unscaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[Vec<f64>]) -> Self {
        let m = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; m];
        for row in rows {
            for (j, v) in row.iter().enumerate() {
                means[j] += v;
            }
        }
        for mean in &mut means {
            *mean /= n;
        }
        let mut stds = vec![0.0; m];
        for row in rows {
            for (j, v) in row.iter().enumerate() {
                stds[j] += (v - means[j]) * (v - means[j]);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    fn identity(m: usize) -> Self {
        Standardizer {
            means: vec![0.0; m],
            stds: vec![1.0; m],
        }
    }

    fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + exp(-z)) without overflow.
fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub l2: f64,
    pub epochs: usize,
    pub seed: u64,
    state: Option<FittedLogistic>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FittedLogistic {
    weights: Vec<f64>,
    bias: f64,
    standardizer: Standardizer,
}

impl LogisticRegression {
    pub fn new(l2: f64, epochs: usize, seed: u64) -> Self {
        LogisticRegression {
            l2,
            epochs,
            seed,
            state: None,
        }
    }

    /// A fitted model with explicit weights over raw (unstandardized)
    /// features. Used to assemble reference classifiers in tests and stacks.
    pub fn from_weights(weights: Vec<f64>, bias: f64) -> Self {
        let m = weights.len();
        LogisticRegression {
            l2: 0.0,
            epochs: 0,
            seed: 0,
            state: Some(FittedLogistic {
                weights,
                bias,
                standardizer: Standardizer::identity(m),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    pub fn weights(&self) -> Option<(&[f64], f64)> {
        self.state.as_ref().map(|s| (s.weights.as_slice(), s.bias))
    }

    fn objective(xs: &[Vec<f64>], ys: &[Label], w: &[f64], b: f64, l2: f64) -> f64 {
        let n = xs.len() as f64;
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let z = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() + b;
            loss += log1p_exp_neg(f64::from(y) * z);
        }
        loss / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(xs: &[Vec<f64>], ys: &[Label], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
        let n = xs.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let z = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() + b;
            let factor = -f64::from(y) * sigmoid(-f64::from(y) * z);
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += factor * xi;
            }
            gb += factor;
        }
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = *g / n + l2 * wi;
        }
        (gw, gb / n)
    }
}

/// Fit logistic regression by gradient descent on regularized log-loss.
pub fn train_logistic(
    data: &Dataset,
    l2: f64,
    epochs: usize,
    seed: u64,
) -> Result<LogisticRegression, ModelError> {
    let mut clf = LogisticRegression::new(l2, epochs, seed);
    clf.fit(data)?;
    Ok(clf)
}

impl Classifier for LogisticRegression {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        if data.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        let standardizer = Standardizer::fit(data.features());
        let xs: Vec<Vec<f64>> = data
            .features()
            .iter()
            .map(|r| standardizer.transform(r))
            .collect();
        let ys = data.labels();
        let m = data.n_features();
        let mut w = vec![0.0; m];
        let mut b = 0.0;
        let mut loss = Self::objective(&xs, ys, &w, b, self.l2);
        let mut lr = 1.0;
        for _ in 0..self.epochs {
            let (gw, gb) = Self::gradient(&xs, ys, &w, b, self.l2);
            // backtracking: shrink the step until the loss does not increase
            loop {
                let w_next: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - lr * gi).collect();
                let b_next = b - lr * gb;
                let next = Self::objective(&xs, ys, &w_next, b_next, self.l2);
                if next <= loss || lr < 1e-14 {
                    w = w_next;
                    b = b_next;
                    loss = next;
                    break;
                }
                lr *= 0.5;
            }
            lr = (lr * 1.2).min(10.0);
        }
        self.state = Some(FittedLogistic {
            weights: w,
            bias: b,
            standardizer,
        });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        Ok(if self.decision_value(x)? >= 0.0 {
            1
        } else {
            -1
        })
    }

    fn predict_probability(&self, x: &[f64]) -> Result<Option<f64>, ModelError> {
        Ok(Some(sigmoid(self.decision_value(x)?)))
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(LOGISTIC_TAG, self)
    }
}

impl LogisticRegression {
    fn decision_value(&self, x: &[f64]) -> Result<f64, ModelError> {
        let s = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        if x.len() != s.weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: s.weights.len(),
                got: x.len(),
            });
        }
        Ok(s.standardizer
            .transform(x)
            .iter()
            .zip(&s.weights)
            .map(|(xi, wi)| xi * wi)
            .sum::<f64>()
            + s.bias)
    }
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradientBoostedTrees {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub seed: u64,
    state: Option<GbtModel>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GbtModel {
    base_score: f64,
    trees: Vec<ScaledTree>,
    loss_trace: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ScaledTree {
    scale: f64,
    nodes: Vec<TreeNode>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

impl ScaledTree {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

impl GradientBoostedTrees {
    pub fn new(n_rounds: usize, learning_rate: f64, max_depth: usize, seed: u64) -> Self {
        GradientBoostedTrees {
            n_rounds,
            learning_rate,
            max_depth,
            seed,
            state: None,
        }
    }

    pub fn defaults(seed: u64) -> Self {
        Self::new(100, 0.1, 3, seed)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    /// Training loss after the base score and after each boosting round.
    pub fn loss_trace(&self) -> Option<&[f64]> {
        self.state.as_ref().map(|s| s.loss_trace.as_slice())
    }

    fn score(&self, x: &[f64]) -> Result<f64, ModelError> {
        let s = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        let mut f = s.base_score;
        for tree in &s.trees {
            f += tree.scale * tree.eval(x);
        }
        Ok(f)
    }
}

/// Fit gradient-boosted trees on logistic loss.
pub fn train_gbt(
    data: &Dataset,
    n_rounds: usize,
    learning_rate: f64,
    max_depth: usize,
    seed: u64,
) -> Result<GradientBoostedTrees, ModelError> {
    let mut clf = GradientBoostedTrees::new(n_rounds, learning_rate, max_depth, seed);
    clf.fit(data)?;
    Ok(clf)
}

fn mean_logistic_loss(ys: &[Label], scores: &[f64]) -> f64 {
    ys.iter()
        .zip(scores)
        .map(|(&y, &f)| log1p_exp_neg(f64::from(y) * f))
        .sum::<f64>()
        / ys.len() as f64
}

impl Classifier for GradientBoostedTrees {
    fn name(&self) -> &'static str {
        "gbt"
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        if data.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        let xs = data.features();
        let ys = data.labels();
        let n_pos = ys.iter().filter(|&&y| y == 1).count();
        let n_neg = ys.len() - n_pos;
        let base_score = if n_neg == 0 {
            10.0
        } else if n_pos == 0 {
            -10.0
        } else {
            (n_pos as f64 / n_neg as f64).ln()
        };

        let mut scores = vec![base_score; ys.len()];
        let mut loss = mean_logistic_loss(ys, &scores);
        let mut trees = Vec::new();
        let mut loss_trace = vec![loss];
        for _ in 0..self.n_rounds {
            let residuals: Vec<f64> = ys
                .iter()
                .zip(&scores)
                .map(|(&y, &f)| f64::from(y) * sigmoid(-f64::from(y) * f))
                .collect();
            let hessians: Vec<f64> = ys
                .iter()
                .zip(&scores)
                .map(|(&y, &f)| {
                    let p = sigmoid(-f64::from(y) * f);
                    p * (1.0 - p)
                })
                .collect();
            let mut nodes = Vec::new();
            let all: Vec<usize> = (0..ys.len()).collect();
            build_tree(xs, &residuals, &hessians, &all, self.max_depth, &mut nodes);
            let tree = ScaledTree {
                scale: self.learning_rate,
                nodes,
            };

            // shrink the round's contribution until the loss is non-increasing
            let step: Vec<f64> = xs.iter().map(|x| tree.eval(x)).collect();
            let mut scale = self.learning_rate;
            let mut accepted = false;
            for _ in 0..24 {
                let candidate: Vec<f64> = scores
                    .iter()
                    .zip(&step)
                    .map(|(f, s)| f + scale * s)
                    .collect();
                let candidate_loss = mean_logistic_loss(ys, &candidate);
                if candidate_loss <= loss {
                    scores = candidate;
                    loss = candidate_loss;
                    trees.push(ScaledTree {
                        scale,
                        nodes: tree.nodes.clone(),
                    });
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                // no useful step at any scale; the trace stays flat
            }
            loss_trace.push(loss);
        }
        self.state = Some(GbtModel {
            base_score,
            trees,
            loss_trace,
        });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        Ok(if self.score(x)? >= 0.0 { 1 } else { -1 })
    }

    fn predict_probability(&self, x: &[f64]) -> Result<Option<f64>, ModelError> {
        Ok(Some(sigmoid(self.score(x)?)))
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(GBT_TAG, self)
    }
}

/// Greedy exact-split regression tree on the residuals, Newton leaf values.
/// Returns the index of the created node.
fn build_tree(
    xs: &[Vec<f64>],
    residuals: &[f64],
    hessians: &[f64],
    rows: &[usize],
    depth_left: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let leaf_value = |rs: &[usize]| {
        let num: f64 = rs.iter().map(|&i| residuals[i]).sum();
        let den: f64 = rs.iter().map(|&i| hessians[i]).sum();
        num / (den + 1e-12)
    };

    if depth_left == 0 || rows.len() < 2 {
        let idx = nodes.len();
        nodes.push(TreeNode::Leaf {
            value: leaf_value(rows),
        });
        return idx;
    }

    let m = xs[0].len();
    let total_sum: f64 = rows.iter().map(|&i| residuals[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| residuals[i] * residuals[i]).sum();
    let base_sse = total_sq - total_sum * total_sum / rows.len() as f64;
    if base_sse < 1e-12 {
        // node already pure in residual space
        let idx = nodes.len();
        nodes.push(TreeNode::Leaf {
            value: leaf_value(rows),
        });
        return idx;
    }

    // Zero-gain splits are allowed on impure nodes: parity-style patterns
    // (XOR) have no first-split gain but perfect second-level splits.
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for feature in 0..m {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            xs[a][feature]
                .partial_cmp(&xs[b][feature])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for split in 0..order.len() - 1 {
            let i = order[split];
            left_sum += residuals[i];
            left_sq += residuals[i] * residuals[i];
            let a = xs[i][feature];
            let b = xs[order[split + 1]][feature];
            if a == b {
                continue;
            }
            let nl = (split + 1) as f64;
            let nr = (order.len() - split - 1) as f64;
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let sse =
                (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
            let gain = base_sse - sse;
            if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                best = Some((gain, feature, (a + b) / 2.0));
            }
        }
    }

    match best {
        None => {
            let idx = nodes.len();
            nodes.push(TreeNode::Leaf {
                value: leaf_value(rows),
            });
            idx
        }
        Some((_, feature, threshold)) => {
            let left_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| xs[i][feature] <= threshold)
                .collect();
            let right_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| xs[i][feature] > threshold)
                .collect();
            let idx = nodes.len();
            nodes.push(TreeNode::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let left = build_tree(xs, residuals, hessians, &left_rows, depth_left - 1, nodes);
            let right = build_tree(xs, residuals, hessians, &right_rows, depth_left - 1, nodes);
            if let TreeNode::Split {
                left: l, right: r, ..
            } = &mut nodes[idx]
            {
                *l = left;
                *r = right;
            }
            idx
        }
    }
}

// ---------------------------------------------------------------------------
// Classical RBF-SVM
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalSvm {
    pub sigma: f64,
    pub box_bound: f64,
    state: Option<SvmModel>,
}

impl ClassicalSvm {
    pub fn new(sigma: f64, box_bound: f64) -> Self {
        ClassicalSvm {
            sigma,
            box_bound,
            state: None,
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    pub fn model(&self) -> Option<&SvmModel> {
        self.state.as_ref()
    }
}

/// Fit a classical SVM with the RBF kernel via the shared dual solver.
pub fn train_classical_svm(
    data: &Dataset,
    sigma: f64,
    box_bound: f64,
) -> Result<ClassicalSvm, ModelError> {
    let mut clf = ClassicalSvm::new(sigma, box_bound);
    clf.fit(data)?;
    Ok(clf)
}

impl Classifier for ClassicalSvm {
    fn name(&self) -> &'static str {
        "classical-svm"
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        let k = rbf_kernel(data.features(), self.sigma)?;
        let lambdas = solve_dual_svm(&k, data.labels(), self.box_bound)?;
        let bias = compute_bias(&lambdas, &k, data.labels());
        self.state = Some(SvmModel {
            lambdas,
            train_x: data.features().to_vec(),
            train_y: data.labels().to_vec(),
            bias,
            kernel: KernelKind::Rbf { sigma: self.sigma },
        });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        let model = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        svm_predict(model, x)
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(SVM_TAG, self)
    }
}
