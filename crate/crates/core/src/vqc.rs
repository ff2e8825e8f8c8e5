//! Variational quantum classifier: encoder circuit + ansatz + parity
//! decoding + derivative-free cost minimization.
//!
//! Measurement outcomes decode by parity: bitstrings with an even number of
//! 1-bits count toward label +1, odd toward -1. The training cost is the
//! mean binary cross-entropy between the +1-parity probability and the 0/1
//! target. Exact mode reads probabilities straight off the statevector; a
//! seeded shot-sampling mode exists for parity with hardware behavior and is
//! off by default.

use crate::ansatz::build_ansatz;
use crate::encoders::{EncoderSpec, FeatureScaler};
use crate::model::{tagged, untagged, Classifier, Dataset, Label, ModelError};
use crate::optimize::{minimize, OptimizeOptions, OptimizerKind};
use crate::qsim::{CircuitSpec, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const VQC_TAG: &str = "vqc";

/// Default shot count for shot-mode inference (exact mode needs none).
pub const DEFAULT_SHOTS: usize = 1024;

/// Probability clamp for the cross-entropy terms.
const P_CLAMP: f64 = 1e-9;

/// Probability that a measured bitstring has even parity (label +1).
pub fn parity_label_probability(probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 0)
        .map(|(_, p)| p)
        .sum()
}

/// Same quantity read directly off a statevector.
pub fn parity_plus_probability(state: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Cross-entropy of the +1-parity probability against the 0/1 target,
/// with the probability clamped to [1e-9, 1 - 1e-9].
pub fn binary_cross_entropy(p_plus: f64, label: Label) -> f64 {
    let p = p_plus.clamp(P_CLAMP, 1.0 - P_CLAMP);
    let target = (f64::from(label) + 1.0) / 2.0;
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Decision rule: +1 iff the +1-parity probability is at least 1/2.
pub fn label_from_probability(p_plus: f64) -> Label {
    if p_plus >= 0.5 {
        1
    } else {
        -1
    }
}

/// Mean cross-entropy of the parity output over a batch of already-scaled
/// feature rows. The ansatz is applied after the encoder with the given
/// parameter binding.
pub fn vqc_cost(
    params: &[f64],
    batch: &Dataset,
    encoder: &EncoderSpec,
    ansatz: &CircuitSpec,
) -> Result<f64, ModelError> {
    if batch.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut total = 0.0;
    for (x, y) in batch.iter() {
        let encoded = encoder.encode_state(x)?;
        let out = ansatz.apply(&encoded, params)?;
        total += binary_cross_entropy(parity_plus_probability(&out), y);
    }
    Ok(total / batch.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqcConfig {
    pub encoder: EncoderSpec,
    pub ansatz_id: u32,
    pub layers: usize,
    pub optimizer: OptimizerKind,
    pub max_evaluations: usize,
    pub seed: u64,
}

impl VqcConfig {
    pub fn new(encoder: EncoderSpec, ansatz_id: u32, layers: usize, seed: u64) -> Self {
        VqcConfig {
            encoder,
            ansatz_id,
            layers,
            optimizer: OptimizerKind::Cobyla,
            max_evaluations: 100,
            seed,
        }
    }
}

/// A trained classifier: configuration, fitted scaler (angle maps only),
/// and ansatz angles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqcModel {
    pub config: VqcConfig,
    pub n_qubits: usize,
    pub n_features: usize,
    pub trained_params: Vec<f64>,
    pub scaler: Option<FeatureScaler>,
    /// Best-so-far cost after each objective evaluation.
    pub cost_trace: Vec<f64>,
    pub n_evaluations: usize,
}

impl VqcModel {
    fn ansatz(&self) -> Result<CircuitSpec, ModelError> {
        Ok(build_ansatz(
            self.config.ansatz_id,
            self.n_qubits,
            self.config.layers,
        )?)
    }

    fn output_state(&self, x: &[f64]) -> Result<StateVector, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let row = match &self.scaler {
            Some(s) => s.transform(x),
            None => x.to_vec(),
        };
        let encoded = self.config.encoder.encode_state(&row)?;
        Ok(self.ansatz()?.apply(&encoded, &self.trained_params)?)
    }

    /// Exact +1-parity probability for a raw feature row.
    pub fn p_plus(&self, x: &[f64]) -> Result<f64, ModelError> {
        Ok(parity_plus_probability(&self.output_state(x)?))
    }
}

/// Uniformly drawn initial angles in [0, 2pi).
pub fn initial_parameters(n_params: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_params)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Train a VQC: fit the feature scaler, precompute the encoded training
/// states, and minimize the parity cross-entropy over the ansatz angles.
pub fn train_vqc(train: &Dataset, config: &VqcConfig) -> Result<VqcModel, ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let scaler = if config.encoder.needs_angle_scaling() {
        Some(FeatureScaler::fit(train.features())?)
    } else {
        None
    };
    let n_qubits = config.encoder.n_qubits(train.n_features());
    if n_qubits < 2 {
        return Err(ModelError::Config(format!(
            "encoder `{}` yields {n_qubits} qubit(s) for {} feature(s); the ansatz needs >= 2",
            config.encoder.kind.as_str(),
            train.n_features()
        )));
    }
    let ansatz = build_ansatz(config.ansatz_id, n_qubits, config.layers)?;

    let encoded: Vec<StateVector> = train
        .features()
        .iter()
        .map(|row| {
            let row = match &scaler {
                Some(s) => s.transform(row),
                None => row.clone(),
            };
            config.encoder.encode_state(&row)
        })
        .collect::<Result<_, _>>()?;
    let labels = train.labels().to_vec();

    let objective = |params: &[f64]| -> f64 {
        // per-sample costs are gathered in index order and summed
        // sequentially so the result does not depend on rayon's work split
        let costs: Vec<f64> = encoded
            .par_iter()
            .zip(&labels)
            .map(|(state, &y)| {
                let out = ansatz.apply(state, params).expect("validated binding");
                binary_cross_entropy(parity_plus_probability(&out), y)
            })
            .collect();
        costs.iter().sum::<f64>() / labels.len() as f64
    };

    let x0 = initial_parameters(ansatz.n_params(), config.seed);
    let opts = OptimizeOptions::new(config.optimizer, config.max_evaluations, config.seed);
    let result = minimize(objective, &x0, &opts)?;

    Ok(VqcModel {
        config: *config,
        n_qubits,
        n_features: train.n_features(),
        trained_params: result.best_params,
        scaler,
        cost_trace: result.trace,
        n_evaluations: result.n_evaluations,
    })
}

/// Exact-mode prediction: the most probable parity label.
pub fn predict_vqc(model: &VqcModel, x: &[f64]) -> Result<Label, ModelError> {
    Ok(label_from_probability(model.p_plus(x)?))
}

/// Shot-mode prediction: estimate the parity probability from `shots`
/// sampled bitstrings. Randomness comes only from `seed`.
pub fn predict_vqc_shots(
    model: &VqcModel,
    x: &[f64],
    shots: usize,
    seed: u64,
) -> Result<Label, ModelError> {
    if shots == 0 {
        return Err(ModelError::Config("shot count must be >= 1".into()));
    }
    let state = model.output_state(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = state.sample_counts(shots, &mut rng);
    let even: u64 = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 0)
        .map(|(_, c)| c)
        .sum();
    Ok(label_from_probability(even as f64 / shots as f64))
}

/// Classifier wrapper around the training configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqcClassifier {
    pub config: VqcConfig,
    trained: Option<VqcModel>,
}

impl VqcClassifier {
    pub fn new(config: VqcConfig) -> Self {
        VqcClassifier {
            config,
            trained: None,
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    pub fn model(&self) -> Option<&VqcModel> {
        self.trained.as_ref()
    }
}

impl Classifier for VqcClassifier {
    fn name(&self) -> &'static str {
        "vqc"
    }

    fn is_fitted(&self) -> bool {
        self.trained.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        self.trained = Some(train_vqc(data, &self.config)?);
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        let model = self.trained.as_ref().ok_or(ModelError::NotFitted)?;
        predict_vqc(model, x)
    }

    fn predict_probability(&self, x: &[f64]) -> Result<Option<f64>, ModelError> {
        let model = self.trained.as_ref().ok_or(ModelError::NotFitted)?;
        Ok(Some(model.p_plus(x)?))
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(VQC_TAG, self)
    }
}
