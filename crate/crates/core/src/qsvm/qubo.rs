//! QUBO form of the SVM dual and its simulated-annealing solver.
//!
//! Each multiplier lambda_i is expanded over a precision vector of powers of
//! two (default p = [1, 2], giving lambda_i in {0,1,2,3}); the binary vector
//! lambda_hat = [l_11, l_12, ..., l_N1, l_N2] then minimizes
//! 1/2 lhat^T P^T (K . y y^T) P lhat - lhat^T P^T 1_N with P = I_N (x) p.
//! The linear term is folded into the diagonal of the QUBO matrix, which is
//! valid because b^2 = b for binary variables.

use super::kernel::KernelMatrix;
use crate::model::{Label, ModelError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The 2-bit precision vector [2^0, 2^1].
pub const DEFAULT_PRECISION: [f64; 2] = [1.0, 2.0];

/// Exhaustive enumeration guard.
pub const MAX_EXHAUSTIVE_VARS: usize = 24;

/// Binary quadratic objective lhat^T Q lhat over N * K_bits variables.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    n_points: usize,
    precision: Vec<f64>,
    /// Row-major symmetric matrix with the linear coefficients folded into
    /// the diagonal.
    q: Vec<f64>,
}

impl QuboProblem {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_vars(&self) -> usize {
        self.n_points * self.precision.len()
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    /// lhat^T Q lhat for a binary assignment.
    pub fn objective(&self, bits: &[u8]) -> f64 {
        let n = self.n_vars();
        debug_assert_eq!(bits.len(), n);
        let mut acc = 0.0;
        for i in 0..n {
            if bits[i] == 0 {
                continue;
            }
            for j in 0..n {
                if bits[j] != 0 {
                    acc += self.q[i * n + j];
                }
            }
        }
        acc
    }

    /// Recover the integer multipliers lambda = P lhat.
    pub fn lambdas(&self, bits: &[u8]) -> Vec<f64> {
        let kbits = self.precision.len();
        (0..self.n_points)
            .map(|i| {
                self.precision
                    .iter()
                    .enumerate()
                    .map(|(b, p)| p * f64::from(bits[i * kbits + b]))
                    .sum()
            })
            .collect()
    }
}

/// Assemble the QUBO matrix for the kernelized SVM dual.
pub fn build_qubo(
    k: &KernelMatrix,
    y: &[Label],
    precision: &[f64],
) -> Result<QuboProblem, ModelError> {
    let n = k.n();
    if y.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if precision.is_empty() {
        return Err(ModelError::Config("precision vector is empty".into()));
    }
    if k.max_asymmetry() > 1e-9 {
        return Err(ModelError::Config("kernel matrix is not symmetric".into()));
    }
    for &l in y {
        if l != 1 && l != -1 {
            return Err(ModelError::BadLabel(l));
        }
    }
    let kbits = precision.len();
    let nv = n * kbits;
    let mut q = vec![0.0; nv * nv];
    for i in 0..n {
        for bi in 0..kbits {
            let row = i * kbits + bi;
            for j in 0..n {
                for bj in 0..kbits {
                    let col = j * kbits + bj;
                    q[row * nv + col] = 0.5
                        * precision[bi]
                        * precision[bj]
                        * k.get(i, j)
                        * f64::from(y[i])
                        * f64::from(y[j]);
                }
            }
            // linear term -(P^T 1)_row folded into the diagonal
            q[row * nv + row] -= precision[bi];
        }
    }
    Ok(QuboProblem {
        n_points: n,
        precision: precision.to_vec(),
        q,
    })
}

/// Geometric cooling schedule for the simulated annealer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_min: f64,
    pub cooling: f64,
    pub sweeps_per_temp: usize,
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t_start: 10.0,
            t_min: 1e-3,
            cooling: 0.995,
            sweeps_per_temp: 20,
            restarts: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealOutcome {
    pub bits: Vec<u8>,
    pub objective: f64,
}

/// Simulated annealing over the binary variables. Restarts run in parallel
/// with per-restart seeds derived from `seed`; the best outcome is selected
/// deterministically by (objective, restart index). Every restart starts at
/// the all-zero assignment (objective 0) and tracks its best-so-far, so the
/// reported objective never exceeds 0.
pub fn anneal(qubo: &QuboProblem, schedule: &AnnealSchedule, seed: u64) -> AnnealOutcome {
    let restarts = schedule.restarts.max(1);
    let runs: Vec<AnnealOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mix = (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            anneal_single(
                qubo,
                schedule,
                seed.wrapping_add(mix).wrapping_add(r as u64),
            )
        })
        .collect();
    let mut best = 0usize;
    for (i, run) in runs.iter().enumerate() {
        if run.objective < runs[best].objective {
            best = i;
        }
    }
    runs.into_iter().nth(best).expect("at least one restart")
}

fn anneal_single(qubo: &QuboProblem, schedule: &AnnealSchedule, seed: u64) -> AnnealOutcome {
    let nv = qubo.n_vars();
    let q = qubo.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = vec![0u8; nv];
    // field[k] = sum_j (Q_kj + Q_jk) x_j, so a flip of bit k changes the
    // objective by +-(Q_kk + field[k])
    let mut field = vec![0.0; nv];
    let mut energy = 0.0;
    let mut best_bits = bits.clone();
    let mut best_energy = energy;

    let mut temperature = schedule.t_start;
    while temperature > schedule.t_min {
        for _ in 0..schedule.sweeps_per_temp {
            for k in 0..nv {
                let base = q[k * nv + k] + field[k];
                let delta = if bits[k] == 0 { base } else { -base };
                let accept = delta < 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
                if accept {
                    let sign = if bits[k] == 0 { 1.0 } else { -1.0 };
                    bits[k] ^= 1;
                    energy += delta;
                    for j in 0..nv {
                        if j != k {
                            field[j] += sign * (q[j * nv + k] + q[k * nv + j]);
                        }
                    }
                    if energy < best_energy {
                        best_energy = energy;
                        best_bits.copy_from_slice(&bits);
                    }
                }
            }
        }
        temperature *= schedule.cooling;
    }
    // report the exactly recomputed objective of the best assignment; the
    // incremental energy carries rounding drift over long runs
    let objective = qubo.objective(&best_bits);
    AnnealOutcome {
        bits: best_bits,
        objective,
    }
}

/// Enumerate all 2^n assignments. Only for small problems; errors above
/// [`MAX_EXHAUSTIVE_VARS`] variables.
pub fn exhaustive_qubo_solve(qubo: &QuboProblem) -> Result<AnnealOutcome, ModelError> {
    let nv = qubo.n_vars();
    if nv > MAX_EXHAUSTIVE_VARS {
        return Err(ModelError::Config(format!(
            "exhaustive enumeration limited to {MAX_EXHAUSTIVE_VARS} variables, got {nv}"
        )));
    }
    let mut best_bits = vec![0u8; nv];
    let mut best = 0.0;
    let mut bits = vec![0u8; nv];
    for mask in 0u64..(1u64 << nv) {
        for (k, b) in bits.iter_mut().enumerate() {
            *b = ((mask >> k) & 1) as u8;
        }
        let obj = qubo.objective(&bits);
        if obj < best {
            best = obj;
            best_bits.copy_from_slice(&bits);
        }
    }
    Ok(AnnealOutcome {
        bits: best_bits,
        objective: best,
    })
}

/// How the annealer-path SVM solves its QUBO.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuboSolverKind {
    Anneal,
    Exhaustive,
}
