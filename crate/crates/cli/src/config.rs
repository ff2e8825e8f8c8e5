//! Experiment configuration: one TOML file per run, fully resolvable before
//! any compute starts. Every default stated here can be overridden in the
//! file.

use crate::error::CliError;
use qeml_core::encoders::EncoderKind;
use qeml_core::ensemble::CombineRule;
use qeml_core::optimize::OptimizerKind;
use qeml_core::qsvm::QuboSolverKind;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DatasetConfig {
    /// Generate a labeled pool from the calibrated synthesizer.
    Synthetic {
        n_phishing: usize,
        n_nonphishing: usize,
        seed: u64,
    },
    /// Load a previously exported feature table.
    FeaturesCsv { features: PathBuf },
    /// Ingest a raw edge list plus labels and extract features.
    Edges { edges: PathBuf, labels: PathBuf },
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            DatasetConfig::Synthetic {
                n_phishing,
                n_nonphishing,
                ..
            } => {
                if *n_phishing == 0 || *n_nonphishing == 0 {
                    return Err(CliError::Config(
                        "synthetic class counts must be >= 1".into(),
                    ));
                }
            }
            DatasetConfig::FeaturesCsv { features } => {
                if !features.is_file() {
                    return Err(CliError::Config(format!(
                        "feature file not found: {}",
                        features.display()
                    )));
                }
            }
            DatasetConfig::Edges { edges, labels } => {
                for p in [edges, labels] {
                    if !p.is_file() {
                        return Err(CliError::Config(format!("file not found: {}", p.display())));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default = "d_train_p")]
    pub train_phishing: usize,
    #[serde(default = "d_train_p")]
    pub train_nonphishing: usize,
    #[serde(default = "d_test_p")]
    pub test_phishing: usize,
    #[serde(default = "d_test_np")]
    pub test_nonphishing: usize,
}

fn d_train_p() -> usize {
    160
}
fn d_test_p() -> usize {
    1000
}
fn d_test_np() -> usize {
    10000
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_phishing: 160,
            train_nonphishing: 160,
            test_phishing: 1000,
            test_nonphishing: 10000,
        }
    }
}

impl SplitConfig {
    pub fn to_spec(self, seed: u64) -> qeml_core::data::SplitSpec {
        qeml_core::data::SplitSpec {
            train_phishing: self.train_phishing,
            train_nonphishing: self.train_nonphishing,
            test_phishing: self.test_phishing,
            test_nonphishing: self.test_nonphishing,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.train_phishing == 0
            || self.train_nonphishing == 0
            || self.test_phishing == 0
            || self.test_nonphishing == 0
        {
            return Err(CliError::Config("split counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Model kind plus per-kind settings; stacks and bags nest recursively.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Vqc {
        encoder: EncoderKind,
        #[serde(default = "d_reps")]
        repetitions: usize,
        ansatz: u32,
        #[serde(default = "d_layers")]
        layers: usize,
        #[serde(default = "d_budget")]
        max_evaluations: usize,
        #[serde(default = "d_optimizer")]
        optimizer: OptimizerKind,
    },
    QsvmKernel {
        encoder: EncoderKind,
        #[serde(default = "d_reps")]
        repetitions: usize,
        #[serde(default = "d_box")]
        box_bound: f64,
        /// Directory for cached training kernel matrices.
        #[serde(default)]
        kernel_cache: Option<PathBuf>,
    },
    QsvmAnneal {
        #[serde(default = "d_sigma")]
        sigma: f64,
        #[serde(default = "d_solver")]
        solver: QuboSolverKind,
        #[serde(default)]
        scale_features: bool,
    },
    Logistic {
        #[serde(default = "d_l2")]
        l2: f64,
        #[serde(default = "d_epochs")]
        epochs: usize,
    },
    Gbt {
        #[serde(default = "d_rounds")]
        n_rounds: usize,
        #[serde(default = "d_lr")]
        learning_rate: f64,
        #[serde(default = "d_depth")]
        max_depth: usize,
    },
    ClassicalSvm {
        sigma: f64,
        #[serde(default = "d_box")]
        box_bound: f64,
    },
    Stack {
        level0: Vec<ModelSpec>,
        #[serde(default)]
        level1: Vec<ModelSpec>,
        meta: Box<ModelSpec>,
        #[serde(default)]
        probability_columns: bool,
    },
    Bag {
        base: Box<ModelSpec>,
        #[serde(default = "d_members")]
        n_members: usize,
        combine: CombineRule,
    },
}

fn d_reps() -> usize {
    2
}
fn d_layers() -> usize {
    1
}
fn d_budget() -> usize {
    100
}
fn d_optimizer() -> OptimizerKind {
    OptimizerKind::Cobyla
}
fn d_box() -> f64 {
    qeml_core::qsvm::DEFAULT_BOX_BOUND
}
fn d_sigma() -> f64 {
    qeml_core::qsvm::DEFAULT_RBF_SIGMA
}
fn d_solver() -> QuboSolverKind {
    QuboSolverKind::Anneal
}
fn d_l2() -> f64 {
    1e-3
}
fn d_epochs() -> usize {
    300
}
fn d_rounds() -> usize {
    100
}
fn d_lr() -> f64 {
    0.1
}
fn d_depth() -> usize {
    3
}
fn d_members() -> usize {
    5
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            ModelSpec::Vqc {
                repetitions,
                ansatz,
                layers,
                max_evaluations,
                ..
            } => {
                if *repetitions == 0 || *layers == 0 || *max_evaluations == 0 {
                    return Err(CliError::Config(
                        "vqc repetitions, layers, and max_evaluations must be >= 1".into(),
                    ));
                }
                if !(1..=19).contains(ansatz) {
                    return Err(CliError::Config(format!(
                        "ansatz id {ansatz} outside 1..=19"
                    )));
                }
            }
            ModelSpec::QsvmKernel {
                repetitions,
                box_bound,
                ..
            } => {
                if *repetitions == 0 || *box_bound <= 0.0 {
                    return Err(CliError::Config(
                        "qsvm-kernel needs repetitions >= 1 and box_bound > 0".into(),
                    ));
                }
            }
            ModelSpec::QsvmAnneal { sigma, .. } => {
                if *sigma <= 0.0 {
                    return Err(CliError::Config(
                        "qsvm-anneal sigma must be positive".into(),
                    ));
                }
            }
            ModelSpec::ClassicalSvm { sigma, box_bound } => {
                if *sigma <= 0.0 || *box_bound <= 0.0 {
                    return Err(CliError::Config(
                        "classical-svm sigma and box_bound must be positive".into(),
                    ));
                }
            }
            ModelSpec::Logistic { epochs, .. } => {
                if *epochs == 0 {
                    return Err(CliError::Config("logistic epochs must be >= 1".into()));
                }
            }
            ModelSpec::Gbt {
                learning_rate,
                max_depth,
                ..
            } => {
                if *learning_rate <= 0.0 || *max_depth == 0 {
                    return Err(CliError::Config(
                        "gbt learning_rate must be positive and max_depth >= 1".into(),
                    ));
                }
            }
            ModelSpec::Stack {
                level0,
                level1,
                meta,
                ..
            } => {
                if level0.is_empty() {
                    return Err(CliError::Config(
                        "stack needs at least one level-0 model".into(),
                    ));
                }
                for m in level0.iter().chain(level1.iter()) {
                    m.validate()?;
                }
                meta.validate()?;
            }
            ModelSpec::Bag {
                base, n_members, ..
            } => {
                if *n_members == 0 {
                    return Err(CliError::Config("bag needs at least one member".into()));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Short name for file naming and tables.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Vqc {
                encoder,
                ansatz,
                layers,
                ..
            } => {
                format!("vqc-{}-c{ansatz}-l{layers}", encoder.as_str())
            }
            ModelSpec::QsvmKernel { encoder, .. } => format!("qsvm-kernel-{}", encoder.as_str()),
            ModelSpec::QsvmAnneal { .. } => "qsvm-anneal".into(),
            ModelSpec::Logistic { .. } => "logistic".into(),
            ModelSpec::Gbt { .. } => "gbt".into(),
            ModelSpec::ClassicalSvm { .. } => "classical-svm".into(),
            ModelSpec::Stack { .. } => "stack".into(),
            ModelSpec::Bag { .. } => "bag".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "d_repeats")]
    pub repeats: usize,
    #[serde(default = "d_output")]
    pub output_dir: PathBuf,
}

fn d_repeats() -> usize {
    1
}
fn d_output() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub split: SplitConfig,
    pub model: ModelSpec,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = toml::from_str(&text)?;
        Ok(config)
    }

    /// Fail-fast validation; nothing is written before this passes.
    pub fn validate(&self) -> Result<(), CliError> {
        self.dataset.validate()?;
        self.split.validate()?;
        self.model.validate()?;
        if self.run.repeats == 0 {
            return Err(CliError::Config("run.repeats must be >= 1".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Serialization(e.to_string()))
    }
}

/// Grid configuration for the ansatz study.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyConfig {
    #[serde(default = "d_circuits")]
    pub circuits: Vec<u32>,
    #[serde(default = "d_layer_grid")]
    pub layers: Vec<usize>,
    #[serde(default = "d_encoders")]
    pub encoders: Vec<EncoderKind>,
    #[serde(default = "d_reps")]
    pub repetitions: usize,
    #[serde(default = "d_budget")]
    pub max_evaluations: usize,
    #[serde(default = "d_pairs")]
    pub n_pairs: usize,
    #[serde(default = "d_bins")]
    pub n_bins: usize,
    #[serde(default = "d_param_samples")]
    pub n_param_samples: usize,
    pub dataset: DatasetConfig,
    #[serde(default = "d_study_split")]
    pub split: SplitConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn d_circuits() -> Vec<u32> {
    (1..=19).collect()
}
fn d_layer_grid() -> Vec<usize> {
    vec![1, 2]
}
fn d_encoders() -> Vec<EncoderKind> {
    vec![
        EncoderKind::ZFeatureMap,
        EncoderKind::ZzFeatureMap,
        EncoderKind::Amplitude,
    ]
}
fn d_pairs() -> usize {
    qeml_core::metrics::DEFAULT_N_PAIRS
}
fn d_bins() -> usize {
    qeml_core::metrics::DEFAULT_N_BINS
}
fn d_param_samples() -> usize {
    qeml_core::metrics::DEFAULT_N_PARAM_SAMPLES
}
fn d_study_split() -> SplitConfig {
    SplitConfig {
        train_phishing: 40,
        train_nonphishing: 40,
        test_phishing: 100,
        test_nonphishing: 1000,
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.circuits.is_empty() || self.layers.is_empty() || self.encoders.is_empty() {
            return Err(CliError::Config("study grid axes must be non-empty".into()));
        }
        for id in &self.circuits {
            if !(1..=19).contains(id) {
                return Err(CliError::Config(format!("circuit id {id} outside 1..=19")));
            }
        }
        for l in &self.layers {
            if *l == 0 {
                return Err(CliError::Config("layer counts must be >= 1".into()));
            }
        }
        self.dataset.validate()?;
        self.split.validate()?;
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.circuits.len() * self.layers.len() * self.encoders.len()
    }
}

/// Configuration for the training-time benchmark.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Ascending balanced training-set sizes (total points per size).
    pub sizes: Vec<usize>,
    pub models: Vec<ModelSpec>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sizes.is_empty() || self.models.is_empty() {
            return Err(CliError::Config("bench needs sizes and models".into()));
        }
        for w in self.sizes.windows(2) {
            if w[1] <= w[0] {
                return Err(CliError::Config(
                    "bench sizes must be strictly ascending".into(),
                ));
            }
        }
        for s in &self.sizes {
            if *s < 2 {
                return Err(CliError::Config("bench sizes must be >= 2".into()));
            }
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }
}
