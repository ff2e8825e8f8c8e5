//! Ansatz quality metrics: expressibility and entangling capacity.
//!
//! Expressibility is the KL divergence between the fidelity distribution of
//! states sampled from the ansatz (parameters uniform in [0, 2pi)) and the
//! fidelity distribution of Haar-random states, P_Haar(F) = (N-1)(1-F)^(N-2)
//! with N = 2^n. Lower KL means more expressive. Entangling capacity is the
//! sample mean of the Meyer-Wallach measure Q = 2(1 - mean_k Tr rho_k^2) and
//! of the mean single-qubit Von Neumann entropy.
//!
//! Metrics are computed on the bare ansatz applied to |0...0>; no feature
//! map is prepended.

use crate::qsim::{CircuitSpec, SimError, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Empirical histogram bins with zero mass receive this floor before the KL
/// sum so the divergence stays finite and comparable across runs.
pub const KL_EPSILON: f64 = 1e-12;

/// Defaults used by the study harness.
pub const DEFAULT_N_PAIRS: usize = 5000;
pub const DEFAULT_N_BINS: usize = 75;
pub const DEFAULT_N_PARAM_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("circuit has no parameters; every sampled fidelity would be 1")]
    DegenerateCircuit,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("correlation is undefined for a constant input vector")]
    ConstantInput,
    #[error("input vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpressibilityEstimate {
    /// KL(empirical fidelity histogram || Haar), in nats.
    pub kl_divergence: f64,
    pub n_fidelity_samples: usize,
    pub n_bins: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EntanglingCapacityEstimate {
    /// Mean Meyer-Wallach measure, in [0, 1].
    pub meyer_wallach: f64,
    /// Mean single-qubit Von Neumann entropy, in bits.
    pub von_neumann_bits: f64,
    pub n_param_samples: usize,
}

fn sample_params(n_params: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n_params)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Estimate expressibility by sampling `n_pairs` parameter-vector pairs,
/// histogramming pairwise state fidelities over [0, 1] and comparing against
/// the analytic Haar bin masses (1-a)^(N-1) - (1-b)^(N-1).
pub fn expressibility(
    ansatz: &CircuitSpec,
    n_pairs: usize,
    n_bins: usize,
    seed: u64,
) -> Result<ExpressibilityEstimate, MetricError> {
    if ansatz.n_params() == 0 {
        return Err(MetricError::DegenerateCircuit);
    }
    if n_pairs == 0 || n_bins == 0 {
        return Err(MetricError::TooFewSamples { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_pairs)
        .map(|_| {
            (
                sample_params(ansatz.n_params(), &mut rng),
                sample_params(ansatz.n_params(), &mut rng),
            )
        })
        .collect();

    let zero = StateVector::zero_state(ansatz.n_qubits())?;
    let fidelities: Vec<f64> = pairs
        .par_iter()
        .map(|(theta1, theta2)| {
            let s1 = ansatz.apply(&zero, theta1).expect("validated binding");
            let s2 = ansatz.apply(&zero, theta2).expect("validated binding");
            s1.inner_product(&s2)
                .expect("same width")
                .norm_sqr()
                .clamp(0.0, 1.0)
        })
        .collect();

    let mut counts = vec![0usize; n_bins];
    for f in &fidelities {
        let mut bin = (f * n_bins as f64) as usize;
        if bin >= n_bins {
            bin = n_bins - 1;
        }
        counts[bin] += 1;
    }

    let dim = 1usize << ansatz.n_qubits();
    let mut kl = 0.0;
    for (bin, &count) in counts.iter().enumerate() {
        let p = (count as f64 / n_pairs as f64).max(KL_EPSILON);
        let a = bin as f64 / n_bins as f64;
        let b = (bin + 1) as f64 / n_bins as f64;
        let q = haar_bin_mass(a, b, dim).max(KL_EPSILON);
        kl += p * (p / q).ln();
    }

    Ok(ExpressibilityEstimate {
        kl_divergence: kl,
        n_fidelity_samples: n_pairs,
        n_bins,
    })
}

/// Analytic Haar fidelity mass of the bin [a, b]: integral of
/// (N-1)(1-F)^(N-2) dF = (1-a)^(N-1) - (1-b)^(N-1).
pub fn haar_bin_mass(a: f64, b: f64, dim: usize) -> f64 {
    let e = (dim - 1) as f64;
    (1.0 - a).powf(e) - (1.0 - b).powf(e)
}

/// Estimate the entangling capacity of an ansatz from `n_param_samples`
/// uniform parameter draws. Zero-parameter circuits are allowed (the single
/// fixed output state is measured).
pub fn entangling_capacity(
    ansatz: &CircuitSpec,
    n_param_samples: usize,
    seed: u64,
) -> Result<EntanglingCapacityEstimate, MetricError> {
    if n_param_samples == 0 {
        return Err(MetricError::TooFewSamples { needed: 1, got: 0 });
    }
    let n = ansatz.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<f64>> = (0..n_param_samples)
        .map(|_| sample_params(ansatz.n_params(), &mut rng))
        .collect();

    let zero = StateVector::zero_state(n)?;
    let per_draw: Vec<(f64, f64)> = draws
        .par_iter()
        .map(|theta| {
            let state = ansatz.apply(&zero, theta).expect("validated binding");
            let mut purity_sum = 0.0;
            let mut entropy_sum = 0.0;
            for k in 0..n {
                let rho = state.reduced_density_matrix(k).expect("index in range");
                let (purity, entropy) = purity_and_entropy(&rho);
                purity_sum += purity;
                entropy_sum += entropy;
            }
            let q = 2.0 * (1.0 - purity_sum / n as f64);
            (q, entropy_sum / n as f64)
        })
        .collect();

    let mw = per_draw.iter().map(|d| d.0).sum::<f64>() / n_param_samples as f64;
    let vn = per_draw.iter().map(|d| d.1).sum::<f64>() / n_param_samples as f64;
    // rounding can push a product state's mean a few ulps below zero
    let snap = |v: f64| if (-1e-9..0.0).contains(&v) { 0.0 } else { v };
    Ok(EntanglingCapacityEstimate {
        meyer_wallach: snap(mw),
        von_neumann_bits: snap(vn),
        n_param_samples,
    })
}

/// Purity Tr(rho^2) and Von Neumann entropy (bits) of a 2x2 density matrix.
/// Eigenvalues are clamped to [0, 1] and 0 log 0 is taken as 0, so the
/// entropy is always finite and non-negative.
fn purity_and_entropy(rho: &[[num_complex::Complex64; 2]; 2]) -> (f64, f64) {
    let d00 = rho[0][0].re;
    let d11 = rho[1][1].re;
    let off = rho[0][1].norm_sqr();
    let purity = d00 * d00 + d11 * d11 + 2.0 * off;
    let trace = d00 + d11;
    let disc = ((d00 - d11) * (d00 - d11) + 4.0 * off).max(0.0).sqrt();
    let l1 = ((trace + disc) / 2.0).clamp(0.0, 1.0);
    let l2 = ((trace - disc) / 2.0).clamp(0.0, 1.0);
    let term = |l: f64| if l > 0.0 { -l * l.log2() } else { 0.0 };
    (purity, term(l1) + term(l2))
}

/// Pearson product-moment correlation between a metric column and a score
/// column. Errors on constant inputs, where the coefficient is undefined.
pub fn correlate_metrics(metric_values: &[f64], scores: &[f64]) -> Result<f64, MetricError> {
    if metric_values.len() != scores.len() {
        return Err(MetricError::LengthMismatch(
            metric_values.len(),
            scores.len(),
        ));
    }
    if metric_values.len() < 2 {
        return Err(MetricError::TooFewSamples {
            needed: 2,
            got: metric_values.len(),
        });
    }
    let n = metric_values.len() as f64;
    let mx = metric_values.iter().sum::<f64>() / n;
    let my = scores.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in metric_values.iter().zip(scores) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(MetricError::ConstantInput);
    }
    Ok(cov / (vx * vy).sqrt())
}
