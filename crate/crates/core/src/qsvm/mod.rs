//! Quantum support vector machines, both formulations.
//!
//! The kernel path builds a quantum fidelity kernel and solves the classical
//! dual; the annealer path expands the multipliers over a 2-bit precision
//! vector and minimizes the resulting QUBO by simulated annealing (or
//! exhaustive enumeration at toy sizes). Both produce the same [`SvmModel`]
//! and predict with label(x) = sign(sum_i lambda_i y_i K(x, x_i) + b).

mod dual;
mod kernel;
mod qubo;

pub use dual::{dual_objective, kkt_violation, solve_dual_svm, DUAL_TOLERANCE};
pub use kernel::{
    kernel_cache_key, quantum_kernel, quantum_kernel_cached, rbf_kernel, KernelMatrix,
};
pub use qubo::{
    anneal, build_qubo, exhaustive_qubo_solve, AnnealOutcome, AnnealSchedule, QuboProblem,
    QuboSolverKind, DEFAULT_PRECISION, MAX_EXHAUSTIVE_VARS,
};

use crate::encoders::{EncoderSpec, FeatureScaler};
use crate::model::{tagged, untagged, Classifier, Dataset, Label, ModelError};
use serde::{Deserialize, Serialize};

pub const KERNEL_QSVM_TAG: &str = "kernel-qsvm";
pub const ANNEAL_QSVM_TAG: &str = "anneal-qsvm";

/// Default box bound for the kernel-path dual solve.
pub const DEFAULT_BOX_BOUND: f64 = 1000.0;
/// RBF width used by the annealer path.
pub const DEFAULT_RBF_SIGMA: f64 = 150.0;

/// Which similarity the model retains for prediction columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelKind {
    Quantum { encoder: EncoderSpec },
    Rbf { sigma: f64 },
}

impl KernelKind {
    pub fn value(&self, a: &[f64], b: &[f64]) -> Result<f64, ModelError> {
        match self {
            KernelKind::Quantum { encoder } => kernel::quantum_value(a, b, encoder),
            KernelKind::Rbf { sigma } => Ok(kernel::rbf_value(a, b, *sigma)),
        }
    }

    pub fn matrix(&self, xs: &[Vec<f64>]) -> Result<KernelMatrix, ModelError> {
        match self {
            KernelKind::Quantum { encoder } => quantum_kernel(xs, encoder),
            KernelKind::Rbf { sigma } => rbf_kernel(xs, *sigma),
        }
    }
}

/// Solved SVM: multipliers, retained training data, bias, kernel kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub lambdas: Vec<f64>,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<Label>,
    pub bias: f64,
    pub kernel: KernelKind,
}

impl SvmModel {
    /// Decision value sum_i lambda_i y_i K(x, x_i) + b.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, ModelError> {
        let expected = self.train_x.first().map_or(0, Vec::len);
        if x.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                got: x.len(),
            });
        }
        let mut acc = self.bias;
        for ((xi, &yi), &li) in self.train_x.iter().zip(&self.train_y).zip(&self.lambdas) {
            if li != 0.0 {
                acc += li * f64::from(yi) * self.kernel.value(x, xi)?;
            }
        }
        Ok(acc)
    }
}

/// label(x) = sign(sum_i lambda_i y_i K(x, x_i) + b); sign(0) is +1.
pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<Label, ModelError> {
    let v = model.decision_value(x)?;
    Ok(if v >= 0.0 { 1 } else { -1 })
}

/// Bias b = mean(y_i - sum_j lambda_j y_j K_ji). The mean runs over support
/// vectors (lambda_i > 0) when any exist, otherwise over all points: with
/// mostly-zero multipliers the all-points average is dominated by rows the
/// solution never touched.
pub fn compute_bias(lambdas: &[f64], k: &KernelMatrix, y: &[Label]) -> f64 {
    let n = k.n();
    let support: Vec<usize> = (0..n).filter(|&i| lambdas[i] > 0.0).collect();
    let over: Vec<usize> = if support.is_empty() {
        (0..n).collect()
    } else {
        support
    };
    let mut acc = 0.0;
    for &i in &over {
        let mut w = 0.0;
        for j in 0..n {
            w += lambdas[j] * f64::from(y[j]) * k.get(j, i);
        }
        acc += f64::from(y[i]) - w;
    }
    acc / over.len() as f64
}

fn fit_svm_from_kernel(
    k: &KernelMatrix,
    xs: &[Vec<f64>],
    y: &[Label],
    lambdas: Vec<f64>,
    kernel: KernelKind,
) -> SvmModel {
    let bias = compute_bias(&lambdas, k, y);
    SvmModel {
        lambdas,
        train_x: xs.to_vec(),
        train_y: y.to_vec(),
        bias,
        kernel,
    }
}

/// Kernel-path QSVM: quantum fidelity kernel plus the classical dual solve.
/// Angle maps consume features min-max scaled into [0, pi] with the scaler
/// fitted on the training split; amplitude encoding normalizes raw rows
/// itself. With a cache directory set, the training Gram matrix is
/// persisted keyed by (dataset hash, encoder, repetitions) and a hit is
/// bit-identical to recomputation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelQsvm {
    pub encoder: EncoderSpec,
    pub box_bound: f64,
    #[serde(default)]
    pub cache_dir: Option<std::path::PathBuf>,
    state: Option<FittedKernelQsvm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FittedKernelQsvm {
    model: SvmModel,
    scaler: Option<FeatureScaler>,
}

impl KernelQsvm {
    pub fn new(encoder: EncoderSpec) -> Self {
        KernelQsvm {
            encoder,
            box_bound: DEFAULT_BOX_BOUND,
            cache_dir: None,
            state: None,
        }
    }

    pub fn with_box_bound(encoder: EncoderSpec, box_bound: f64) -> Self {
        KernelQsvm {
            encoder,
            box_bound,
            cache_dir: None,
            state: None,
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    pub fn model(&self) -> Option<&SvmModel> {
        self.state.as_ref().map(|s| &s.model)
    }
}

impl Classifier for KernelQsvm {
    fn name(&self) -> &'static str {
        "kernel-qsvm"
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        let scaler = if self.encoder.needs_angle_scaling() {
            Some(FeatureScaler::fit(data.features())?)
        } else {
            None
        };
        let rows: Vec<Vec<f64>> = match &scaler {
            Some(s) => data.features().iter().map(|r| s.transform(r)).collect(),
            None => data.features().to_vec(),
        };
        let k = match &self.cache_dir {
            Some(dir) => quantum_kernel_cached(dir, &rows, &self.encoder)?,
            None => quantum_kernel(&rows, &self.encoder)?,
        };
        let lambdas = solve_dual_svm(&k, data.labels(), self.box_bound)?;
        let kernel = KernelKind::Quantum {
            encoder: self.encoder,
        };
        let model = fit_svm_from_kernel(&k, &rows, data.labels(), lambdas, kernel);
        self.state = Some(FittedKernelQsvm { model, scaler });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        let state = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        match &state.scaler {
            Some(s) => svm_predict(&state.model, &s.transform(x)),
            None => svm_predict(&state.model, x),
        }
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(KERNEL_QSVM_TAG, self)
    }
}

/// Annealer-path QSVM: RBF kernel, QUBO with the 2-bit precision vector,
/// simulated annealing (or exhaustive enumeration). Works on raw features by
/// default, matching the sigma = 150 scale.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnealQsvm {
    pub sigma: f64,
    pub precision: Vec<f64>,
    pub solver: QuboSolverKind,
    pub schedule: AnnealSchedule,
    pub seed: u64,
    /// Min-max scale features into [0, pi] before the kernel (off by
    /// default: raw features match sigma = 150).
    pub scale_features: bool,
    state: Option<FittedAnnealQsvm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FittedAnnealQsvm {
    model: SvmModel,
    scaler: Option<FeatureScaler>,
}

impl AnnealQsvm {
    pub fn new(seed: u64) -> Self {
        AnnealQsvm {
            sigma: DEFAULT_RBF_SIGMA,
            precision: DEFAULT_PRECISION.to_vec(),
            solver: QuboSolverKind::Anneal,
            schedule: AnnealSchedule::default(),
            seed,
            scale_features: false,
            state: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_solver(mut self, solver: QuboSolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ModelError> {
        untagged(v)
    }

    pub fn model(&self) -> Option<&SvmModel> {
        self.state.as_ref().map(|s| &s.model)
    }
}

impl Classifier for AnnealQsvm {
    fn name(&self) -> &'static str {
        "anneal-qsvm"
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn fit(&mut self, data: &Dataset) -> Result<(), ModelError> {
        let scaler = if self.scale_features {
            Some(FeatureScaler::fit(data.features())?)
        } else {
            None
        };
        let rows: Vec<Vec<f64>> = match &scaler {
            Some(s) => data.features().iter().map(|r| s.transform(r)).collect(),
            None => data.features().to_vec(),
        };
        let k = rbf_kernel(&rows, self.sigma)?;
        let qubo = build_qubo(&k, data.labels(), &self.precision)?;
        let outcome = match self.solver {
            QuboSolverKind::Anneal => anneal(&qubo, &self.schedule, self.seed),
            QuboSolverKind::Exhaustive => exhaustive_qubo_solve(&qubo)?,
        };
        let lambdas = qubo.lambdas(&outcome.bits);
        let kernel = KernelKind::Rbf { sigma: self.sigma };
        let model = fit_svm_from_kernel(&k, &rows, data.labels(), lambdas, kernel);
        self.state = Some(FittedAnnealQsvm { model, scaler });
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<Label, ModelError> {
        let state = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        match &state.scaler {
            Some(s) => svm_predict(&state.model, &s.transform(x)),
            None => svm_predict(&state.model, x),
        }
    }

    fn to_json(&self) -> Result<serde_json::Value, ModelError> {
        tagged(ANNEAL_QSVM_TAG, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::EncoderKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn enc(kind: EncoderKind, reps: usize) -> EncoderSpec {
        EncoderSpec::with_repetitions(kind, reps)
    }

    #[test]
    fn kernel_self_similarity_is_one() {
        let xs = vec![vec![0.3, 1.2], vec![2.0, 0.1]];
        for kind in [EncoderKind::ZFeatureMap, EncoderKind::ZzFeatureMap] {
            let k = quantum_kernel(&xs, &enc(kind, 2)).unwrap();
            for i in 0..2 {
                assert!((k.get(i, i) - 1.0).abs() < 1e-9, "{kind:?}");
            }
        }
        let k = quantum_kernel(&xs, &enc(EncoderKind::Amplitude, 1)).unwrap();
        assert!((k.get(0, 0) - 1.0).abs() < 1e-12);
    }

    /// Single-feature Z map with one repetition: K = cos^2(x1 - x2).
    #[test]
    fn z_map_kernel_closed_form() {
        let xs = vec![vec![0.0], vec![std::f64::consts::FRAC_PI_2], vec![0.7]];
        let k = quantum_kernel(&xs, &enc(EncoderKind::ZFeatureMap, 1)).unwrap();
        assert!(
            k.get(0, 1).abs() < 1e-12,
            "cos^2(pi/2) = 0, got {}",
            k.get(0, 1)
        );
        let expect = (0.7f64).cos().powi(2);
        assert!((k.get(0, 2) - expect).abs() < 1e-12);
    }

    #[test]
    fn amplitude_kernel_is_squared_inner_product() {
        let xs = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        let k = quantum_kernel(&xs, &enc(EncoderKind::Amplitude, 1)).unwrap();
        assert_eq!(k.get(0, 1), 0.0);
        assert!((k.get(0, 2) - 0.5).abs() < 1e-12);
    }

    /// Dual-route oracle: circuit composition equals the squared inner
    /// product of separately simulated encoded states.
    #[test]
    fn kernel_matches_separate_statevector_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (kind, m) in [
            (EncoderKind::ZFeatureMap, 3),
            (EncoderKind::ZzFeatureMap, 4),
            (EncoderKind::Amplitude, 7),
        ] {
            let spec = enc(kind, 2);
            let xs: Vec<Vec<f64>> = (0..6)
                .map(|_| {
                    (0..m)
                        .map(|_| rng.random_range(0.0..std::f64::consts::PI))
                        .collect()
                })
                .collect();
            let k = quantum_kernel(&xs, &spec).unwrap();
            let states: Vec<_> = xs.iter().map(|x| spec.encode_state(x).unwrap()).collect();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    let oracle = states[j].inner_product(&states[i]).unwrap().norm_sqr();
                    assert!(
                        (k.get(i, j) - oracle).abs() < 1e-10,
                        "{kind:?} ({i},{j}): {} vs {oracle}",
                        k.get(i, j)
                    );
                }
            }
            // symmetry and range
            assert!(k.max_asymmetry() < 1e-9);
            for e in k.entries() {
                assert!((-1e-12..=1.0 + 1e-12).contains(e));
            }
        }
    }

    #[test]
    fn rbf_examples() {
        let sigma = 150.0;
        let xs = vec![vec![0.0, 0.0], vec![150.0 * 2f64.sqrt(), 0.0]];
        let k = rbf_kernel(&xs, sigma).unwrap();
        assert_eq!(k.get(0, 0), 1.0);
        assert!((k.get(0, 1) - (-1.0f64).exp()).abs() < 1e-12);
        assert!(rbf_kernel(&xs, 0.0).is_err());
        assert!(rbf_kernel(&xs, -2.0).is_err());
    }

    #[test]
    fn dual_two_point_closed_form() {
        // K = I, labels (+1, -1): minimize 1/2(l1^2 + l2^2) - l1 - l2 at (1,1)
        let k = KernelMatrix::from_entries(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let l = solve_dual_svm(&k, &[1, -1], 10.0).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-6);
        assert!((l[1] - 1.0).abs() < 1e-6);
    }

    /// Exhaustive grid oracle on random 2-point problems.
    #[test]
    fn dual_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let off = rng.random_range(-0.9..0.9f64);
            let k = KernelMatrix::from_entries(2, vec![1.0, off, off, 1.0]).unwrap();
            let y: [Label; 2] = [if rng.random::<bool>() { 1 } else { -1 }, -1];
            let c = 3.0;
            let solved = solve_dual_svm(&k, &y, c).unwrap();
            let solved_obj = dual_objective(&k, &y, &solved);
            let mut grid_best = f64::INFINITY;
            let steps = (c / 0.1) as usize;
            for a in 0..=steps {
                for b in 0..=steps {
                    let lam = [a as f64 * 0.1, b as f64 * 0.1];
                    grid_best = grid_best.min(dual_objective(&k, &y, &lam));
                }
            }
            assert!(
                solved_obj <= grid_best + 1e-3,
                "solver {solved_obj} worse than grid {grid_best}"
            );
        }
    }

    #[test]
    fn dual_rejects_asymmetric_kernel() {
        let k = KernelMatrix::from_entries(2, vec![1.0, 0.3, 0.1, 1.0]).unwrap();
        assert!(solve_dual_svm(&k, &[1, -1], 1.0).is_err());
    }

    #[test]
    fn one_class_input_predicts_that_class() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]];
        let k = rbf_kernel(&xs, 2.0).unwrap();
        let y = [1, 1, 1];
        let lambdas = solve_dual_svm(&k, &y, 10.0).unwrap();
        let model = fit_svm_from_kernel(&k, &xs, &y, lambdas, KernelKind::Rbf { sigma: 2.0 });
        for x in &xs {
            assert_eq!(svm_predict(&model, x).unwrap(), 1);
        }
        assert_eq!(svm_predict(&model, &[5.0, 5.0]).unwrap(), 1);
    }

    #[test]
    fn qubo_hand_expansion() {
        // N=2, K=I, y=(+1,-1), bits (1,0,1,0) => lambda=(1,1), objective
        // 1/2(1+1) - 2 = -1
        let k = KernelMatrix::from_entries(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let qubo = build_qubo(&k, &[1, -1], &DEFAULT_PRECISION).unwrap();
        assert_eq!(qubo.n_vars(), 4);
        assert_eq!(qubo.objective(&[0, 0, 0, 0]), 0.0);
        let obj = qubo.objective(&[1, 0, 1, 0]);
        assert!((obj - (-1.0)).abs() < 1e-12);
        assert_eq!(qubo.lambdas(&[1, 0, 1, 0]), vec![1.0, 1.0]);
        assert_eq!(qubo.lambdas(&[1, 1, 0, 1]), vec![3.0, 2.0]);
    }

    /// Dense-formula oracle over every assignment at N=3.
    #[test]
    fn qubo_matches_dense_formula_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..5 {
            let xs: Vec<Vec<f64>> = (0..3)
                .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
                .collect();
            let y: Vec<Label> = (0..3)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let k = rbf_kernel(&xs, 1.5).unwrap();
            let qubo = build_qubo(&k, &y, &DEFAULT_PRECISION).unwrap();
            for mask in 0u64..64 {
                let bits: Vec<u8> = (0..6).map(|b| ((mask >> b) & 1) as u8).collect();
                let lam = qubo.lambdas(&bits);
                // dense evaluation of 1/2 l^T (K.yy^T) l - l^T 1
                let dense = dual_objective(&k, &y, &lam);
                let fast = qubo.objective(&bits);
                assert!(
                    (dense - fast).abs() < 1e-12,
                    "mask {mask}: {dense} vs {fast}"
                );
            }
        }
    }

    #[test]
    fn anneal_finds_exhaustive_optimum_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let schedule = AnnealSchedule::default();
        for trial in 0..10 {
            let xs: Vec<Vec<f64>> = (0..3)
                .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
                .collect();
            let y: Vec<Label> = (0..3)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let k = rbf_kernel(&xs, 2.0).unwrap();
            let qubo = build_qubo(&k, &y, &DEFAULT_PRECISION).unwrap();
            let exact = exhaustive_qubo_solve(&qubo).unwrap();
            let sa = anneal(&qubo, &schedule, trial);
            assert!(
                (sa.objective - exact.objective).abs() < 1e-9,
                "trial {trial}: SA {} vs exact {}",
                sa.objective,
                exact.objective
            );
            assert!(sa.objective <= 0.0);
        }
    }

    #[test]
    fn anneal_zero_matrix_is_deterministic() {
        let k = KernelMatrix::from_entries(2, vec![0.0; 4]).unwrap();
        let qubo = build_qubo(&k, &[1, -1], &[0.0, 0.0]).unwrap();
        let a = anneal(&qubo, &AnnealSchedule::default(), 9);
        let b = anneal(&qubo, &AnnealSchedule::default(), 9);
        assert_eq!(a, b);
        assert_eq!(a.objective, 0.0);
    }

    #[test]
    fn anneal_seeds_agree_on_optimum_at_small_n() {
        let xs = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.5],
            vec![0.2, 1.5],
            vec![2.0, 2.0],
        ];
        let y = [1, -1, 1, -1];
        let k = rbf_kernel(&xs, 1.0).unwrap();
        let qubo = build_qubo(&k, &y, &DEFAULT_PRECISION).unwrap();
        let a = anneal(&qubo, &AnnealSchedule::default(), 1);
        let b = anneal(&qubo, &AnnealSchedule::default(), 2);
        assert!((a.objective - b.objective).abs() < 1e-9);
    }

    #[test]
    fn svm_predict_single_support_vector() {
        let model = SvmModel {
            lambdas: vec![1.0],
            train_x: vec![vec![0.0, 0.0]],
            train_y: vec![1],
            bias: 0.0,
            kernel: KernelKind::Rbf { sigma: 1.0 },
        };
        assert_eq!(svm_predict(&model, &[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn label_mirror_negates_predictions() {
        let xs = vec![
            vec![0.0, 0.0],
            vec![3.0, 3.0],
            vec![0.5, 0.0],
            vec![2.5, 3.0],
        ];
        let y: Vec<Label> = vec![1, -1, 1, -1];
        let y_neg: Vec<Label> = y.iter().map(|l| -l).collect();
        let k = rbf_kernel(&xs, 1.0).unwrap();
        let l1 = solve_dual_svm(&k, &y, 10.0).unwrap();
        let l2 = solve_dual_svm(&k, &y_neg, 10.0).unwrap();
        let m1 = fit_svm_from_kernel(&k, &xs, &y, l1, KernelKind::Rbf { sigma: 1.0 });
        let m2 = fit_svm_from_kernel(&k, &xs, &y_neg, l2, KernelKind::Rbf { sigma: 1.0 });
        for probe in [[0.1, 0.1], [2.9, 2.8], [1.0, 1.0]] {
            let a = m1.decision_value(&probe).unwrap();
            let b = m2.decision_value(&probe).unwrap();
            assert!((a + b).abs() < 1e-6, "scores should negate: {a} vs {b}");
        }
    }

    #[test]
    fn bias_invariant_under_permutation() {
        let xs = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = [1, 1, -1, -1];
        let k = rbf_kernel(&xs, 1.0).unwrap();
        let lambdas = solve_dual_svm(&k, &y, 5.0).unwrap();
        let b1 = compute_bias(&lambdas, &k, &y);

        let perm = [2usize, 0, 3, 1];
        let xs_p: Vec<Vec<f64>> = perm.iter().map(|&i| xs[i].clone()).collect();
        let y_p: Vec<Label> = perm.iter().map(|&i| y[i]).collect();
        let k_p = rbf_kernel(&xs_p, 1.0).unwrap();
        let lambdas_p: Vec<f64> = perm.iter().map(|&i| lambdas[i]).collect();
        let b2 = compute_bias(&lambdas_p, &k_p, &y_p);
        assert!((b1 - b2).abs() < 1e-9);
    }

    /// Six linearly separable points at the sigma = 150 scale: the
    /// exhaustively solved QUBO path classifies all of training correctly.
    #[test]
    fn qubo_svm_end_to_end_toy() {
        let data = toy_six_points();
        let mut clf = AnnealQsvm::new(0).with_solver(QuboSolverKind::Exhaustive);
        clf.fit(&data).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(clf.predict(x).unwrap(), y);
        }
    }

    pub(crate) fn toy_six_points() -> Dataset {
        Dataset::new(
            vec![
                vec![120.0, 140.0],
                vec![150.0, 110.0],
                vec![135.0, 125.0],
                vec![-120.0, -140.0],
                vec![-150.0, -110.0],
                vec![-135.0, -125.0],
            ],
            vec![1, 1, 1, -1, -1, -1],
        )
        .unwrap()
    }

    #[test]
    fn kernel_qsvm_classifier_roundtrip() {
        let data = Dataset::new(
            vec![
                vec![0.2, 0.3],
                vec![0.4, 0.1],
                vec![2.6, 2.8],
                vec![2.9, 2.5],
            ],
            vec![-1, -1, 1, 1],
        )
        .unwrap();
        let mut clf = KernelQsvm::new(EncoderSpec::new(EncoderKind::ZFeatureMap));
        assert!(!clf.is_fitted());
        assert!(matches!(
            clf.predict(&[0.0, 0.0]),
            Err(ModelError::NotFitted)
        ));
        clf.fit(&data).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(clf.predict(x).unwrap(), y);
        }
        let json = clf.to_json().unwrap();
        let loaded = crate::model::classifier_from_json(&json).unwrap();
        for (x, _) in data.iter() {
            assert_eq!(loaded.predict(x).unwrap(), clf.predict(x).unwrap());
        }
    }

    #[test]
    fn kernel_cache_roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let xs = vec![vec![0.5, 1.5], vec![2.0, 0.3], vec![1.0, 1.0]];
        let spec = EncoderSpec::new(EncoderKind::ZzFeatureMap);
        let fresh = quantum_kernel_cached(dir.path(), &xs, &spec).unwrap();
        let cached = quantum_kernel_cached(dir.path(), &xs, &spec).unwrap();
        let direct = quantum_kernel(&xs, &spec).unwrap();
        assert_eq!(fresh.to_bytes(), cached.to_bytes());
        assert_eq!(fresh.to_bytes(), direct.to_bytes());
    }
}
