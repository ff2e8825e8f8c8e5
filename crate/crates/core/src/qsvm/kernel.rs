//! Kernel matrices: quantum fidelity kernels and the classical RBF kernel.
//!
//! The quantum kernel element is the probability of measuring |0...0> after
//! applying the feature map of x_i followed by the inverse of the feature
//! map of x_j, i.e. |<psi(x_j)|psi(x_i)>|^2. Amplitude encoding prepares its
//! state directly, so there the inner product of the two encoded states is
//! the same quantity.

use crate::encoders::{Encoded, EncoderSpec};
use crate::model::ModelError;
use crate::qsim::StateVector;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::Path;

/// Symmetric N x N matrix of pairwise similarities in [0, 1] with a unit
/// diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self, ModelError> {
        if entries.len() != n * n {
            return Err(ModelError::Config(format!(
                "kernel storage has {} entries for n = {n}",
                entries.len()
            )));
        }
        Ok(KernelMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the (symmetrized) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| {
            (self.get(i, j) + self.get(j, i)) / 2.0
        });
        let eig = nalgebra::SymmetricEigen::new(m);
        eig.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Clip negative eigenvalues to zero and reconstruct. Used to absorb
    /// rounding-scale indefiniteness before the dual solve.
    pub fn clipped_psd(&self) -> KernelMatrix {
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| {
            (self.get(i, j) + self.get(j, i)) / 2.0
        });
        let mut eig = nalgebra::SymmetricEigen::new(m);
        for v in eig.eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let rebuilt = eig.recompose();
        let entries = (0..self.n * self.n)
            .map(|k| rebuilt[(k / self.n, k % self.n)])
            .collect();
        KernelMatrix { n: self.n, entries }
    }

    /// Little-endian binary image: magic, dimension, entries.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.entries.len());
        out.extend_from_slice(b"QKM1");
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        for v in &self.entries {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let fail = |m: &str| ModelError::Serialization(format!("kernel cache: {m}"));
        if bytes.len() < 12 || &bytes[..4] != b"QKM1" {
            return Err(fail("bad header"));
        }
        let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        if body.len() != n * n * 8 {
            return Err(fail("truncated body"));
        }
        let entries = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(KernelMatrix { n, entries })
    }
}

fn check_uniform(xs: &[Vec<f64>]) -> Result<usize, ModelError> {
    let first = xs.first().ok_or(ModelError::EmptyDataset)?;
    let m = first.len();
    for row in xs {
        if row.len() != m {
            return Err(ModelError::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
    }
    Ok(m)
}

/// Quantum fidelity kernel over the given rows. Entries are computed for
/// i <= j and mirrored.
pub fn quantum_kernel(xs: &[Vec<f64>], encoder: &EncoderSpec) -> Result<KernelMatrix, ModelError> {
    check_uniform(xs)?;
    let n = xs.len();
    let prepared: Vec<Prepared> = xs
        .iter()
        .map(|x| Prepared::new(encoder, x))
        .collect::<Result<_, _>>()?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let computed: Vec<((usize, usize), f64)> = pairs
        .par_iter()
        .map(|&(i, j)| ((i, j), prepared[i].fidelity_with(&prepared[j])))
        .collect();

    let mut entries = vec![0.0; n * n];
    for ((i, j), v) in computed {
        entries[i * n + j] = v;
        entries[j * n + i] = v;
    }
    Ok(KernelMatrix { n, entries })
}

/// One row's encoded form, ready for pairwise fidelity evaluation.
struct Prepared {
    /// phi(x)|0...0>
    state: StateVector,
    /// inverse circuit of phi(x); None for amplitude encoding
    inverse: Option<crate::qsim::CircuitSpec>,
}

impl Prepared {
    fn new(encoder: &EncoderSpec, x: &[f64]) -> Result<Self, ModelError> {
        match encoder.prepare(x)? {
            Encoded::State(state) => Ok(Prepared {
                state,
                inverse: None,
            }),
            Encoded::Circuit(c) => {
                let zero = StateVector::zero_state(c.n_qubits())?;
                let state = c.apply(&zero, &[])?;
                Ok(Prepared {
                    state,
                    inverse: Some(c.inverse()?),
                })
            }
        }
    }

    /// K = Pr[|0...0>] after composing this row's map with the inverse of
    /// the other row's map; for direct state preparation the overlap is
    /// taken between the two prepared states.
    fn fidelity_with(&self, other: &Prepared) -> f64 {
        match &other.inverse {
            Some(inv) => inv
                .apply(&self.state, &[])
                .expect("matching widths by construction")
                .probability_of_zero(),
            None => self
                .state
                .inner_product(&other.state)
                .expect("matching widths by construction")
                .norm_sqr(),
        }
    }
}

/// RBF kernel K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).
pub fn rbf_kernel(xs: &[Vec<f64>], sigma: f64) -> Result<KernelMatrix, ModelError> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(ModelError::Config(format!(
            "rbf sigma must be positive, got {sigma}"
        )));
    }
    check_uniform(xs)?;
    let n = xs.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = rbf_value(&xs[i], &xs[j], sigma);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(KernelMatrix { n, entries })
}

pub(crate) fn rbf_value(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Single quantum kernel entry between two rows.
pub(crate) fn quantum_value(
    a: &[f64],
    b: &[f64],
    encoder: &EncoderSpec,
) -> Result<f64, ModelError> {
    let pa = Prepared::new(encoder, a)?;
    let pb = Prepared::new(encoder, b)?;
    Ok(pa.fidelity_with(&pb))
}

/// Cache key for a kernel matrix: hash of the row bytes and the kernel
/// description string.
pub fn kernel_cache_key(xs: &[Vec<f64>], description: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(description.as_bytes());
    hasher.update((xs.len() as u64).to_le_bytes());
    for row in xs {
        hasher.update((row.len() as u64).to_le_bytes());
        for v in row {
            hasher.update(v.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Compute the quantum kernel, reusing a bit-identical cached copy when the
/// cache directory already holds one for this dataset/encoder pair.
pub fn quantum_kernel_cached(
    cache_dir: &Path,
    xs: &[Vec<f64>],
    encoder: &EncoderSpec,
) -> Result<KernelMatrix, ModelError> {
    let desc = format!(
        "quantum:{}:reps={}",
        encoder.kind.as_str(),
        encoder.repetitions
    );
    let key = kernel_cache_key(xs, &desc);
    let path = cache_dir.join(format!("{key}.qkm"));
    if path.is_file() {
        let bytes = std::fs::read(&path).map_err(|e| ModelError::Serialization(e.to_string()))?;
        return KernelMatrix::from_bytes(&bytes);
    }
    let k = quantum_kernel(xs, encoder)?;
    std::fs::create_dir_all(cache_dir).map_err(|e| ModelError::Serialization(e.to_string()))?;
    std::fs::write(&path, k.to_bytes()).map_err(|e| ModelError::Serialization(e.to_string()))?;
    Ok(k)
}
