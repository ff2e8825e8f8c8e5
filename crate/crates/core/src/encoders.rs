//! Data-encoding circuits (feature maps).
//!
//! Three ways to load a classical feature vector into a quantum state:
//!
//! - amplitude encoding: zero-pad to the next power of two, L2-normalize,
//!   write straight into the amplitudes (ceil(log2 m) qubits);
//! - Z feature map: per-qubit Hadamard followed by a Z rotation realizing
//!   exp(+i x Z) per feature, no entanglement (m qubits);
//! - ZZ feature map: the Z map plus a ZZ interaction for every qubit pair
//!   with angle (pi - x_p)(pi - x_q) (m qubits).
//!
//! Rotation convention: the single-feature phase is exp(+i x Z), realized as
//! RZ(-2x); pair interactions exp(+i phi Z Z) are realized as RZZ(-2 phi).
//! Kernels are insensitive to a global flip of this convention as long as it
//! is applied consistently.

use crate::qsim::{Angle, CircuitSpec, Gate, SimError, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("cannot amplitude-encode an all-zero feature vector")]
    ZeroVector,
    #[error("feature vector contains a non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("ZZ feature map needs at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error("feature vector is empty")]
    Empty,
    #[error("encoder repetitions must be >= 1")]
    ZeroRepetitions,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which feature map to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderKind {
    #[serde(rename = "amplitude")]
    Amplitude,
    #[serde(rename = "z")]
    ZFeatureMap,
    #[serde(rename = "zz")]
    ZzFeatureMap,
}

impl EncoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncoderKind::Amplitude => "amplitude",
            EncoderKind::ZFeatureMap => "z",
            EncoderKind::ZzFeatureMap => "zz",
        }
    }
}

/// Feature map plus its repetition count (the map circuit is applied
/// `repetitions` times in sequence; ignored for amplitude encoding).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub repetitions: usize,
}

impl EncoderSpec {
    /// Default repetition count is 2 for the angle maps.
    pub fn new(kind: EncoderKind) -> Self {
        let repetitions = match kind {
            EncoderKind::Amplitude => 1,
            _ => 2,
        };
        EncoderSpec { kind, repetitions }
    }

    pub fn with_repetitions(kind: EncoderKind, repetitions: usize) -> Self {
        EncoderSpec { kind, repetitions }
    }

    /// Qubits required for `m` features.
    pub fn n_qubits(&self, m: usize) -> usize {
        match self.kind {
            EncoderKind::Amplitude => amplitude_qubits(m),
            _ => m,
        }
    }

    /// Angle maps consume features min-max scaled into [0, pi]; amplitude
    /// encoding normalizes raw features itself (scaling a row of column
    /// minima would zero it out entirely).
    pub fn needs_angle_scaling(&self) -> bool {
        self.kind != EncoderKind::Amplitude
    }

    /// The encoded form of `x`: a circuit for the angle maps, a ready state
    /// for amplitude encoding (which writes amplitudes directly).
    pub fn prepare(&self, x: &[f64]) -> Result<Encoded, EncodeError> {
        if self.repetitions == 0 {
            return Err(EncodeError::ZeroRepetitions);
        }
        match self.kind {
            EncoderKind::Amplitude => Ok(Encoded::State(amplitude_encode(x)?)),
            EncoderKind::ZFeatureMap => Ok(Encoded::Circuit(z_feature_map(x, self.repetitions)?)),
            EncoderKind::ZzFeatureMap => Ok(Encoded::Circuit(zz_feature_map(x, self.repetitions)?)),
        }
    }

    /// The encoded statevector for `x`.
    pub fn encode_state(&self, x: &[f64]) -> Result<StateVector, EncodeError> {
        match self.prepare(x)? {
            Encoded::State(s) => Ok(s),
            Encoded::Circuit(c) => {
                let zero = StateVector::zero_state(c.n_qubits())?;
                Ok(c.apply(&zero, &[])?)
            }
        }
    }
}

/// Result of encoding a feature vector.
pub enum Encoded {
    /// A fixed-angle circuit to apply to |0...0>.
    Circuit(CircuitSpec),
    /// A directly prepared state (amplitude encoding).
    State(StateVector),
}

fn amplitude_qubits(m: usize) -> usize {
    let mut n = 0;
    while (1usize << n) < m {
        n += 1;
    }
    n.max(1)
}

fn check_finite(x: &[f64]) -> Result<(), EncodeError> {
    if x.is_empty() {
        return Err(EncodeError::Empty);
    }
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(EncodeError::NonFinite(i));
        }
    }
    Ok(())
}

/// Zero-pad `x` to the next power of two, L2-normalize, and write the result
/// into the amplitudes of a ceil(log2 m)-qubit state.
pub fn amplitude_encode(x: &[f64]) -> Result<StateVector, EncodeError> {
    check_finite(x)?;
    let norm_sqr: f64 = x.iter().map(|v| v * v).sum();
    if norm_sqr == 0.0 {
        return Err(EncodeError::ZeroVector);
    }
    let n_qubits = amplitude_qubits(x.len());
    let dim = 1usize << n_qubits;
    let norm = norm_sqr.sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (i, v) in x.iter().enumerate() {
        amps[i] = Complex64::new(v / norm, 0.0);
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// First-order Pauli-Z map: per repetition, H on every qubit followed by a
/// Z rotation with the feature value on its qubit. No two-qubit gates.
pub fn z_feature_map(x: &[f64], repetitions: usize) -> Result<CircuitSpec, EncodeError> {
    check_finite(x)?;
    if repetitions == 0 {
        return Err(EncodeError::ZeroRepetitions);
    }
    let m = x.len();
    let mut c = CircuitSpec::new(m)?;
    for _ in 0..repetitions {
        for q in 0..m {
            c.push(Gate::H(q))?;
        }
        for (q, &v) in x.iter().enumerate() {
            // exp(+i v Z) == RZ(-2v)
            c.push(Gate::Rz(q, Angle::Fixed(-2.0 * v)))?;
        }
    }
    Ok(c)
}

/// Second-order Pauli-Z map: the Z map plus, per repetition, an RZZ
/// interaction for every qubit pair (p < q) with angle
/// (pi - x_p)(pi - x_q).
pub fn zz_feature_map(x: &[f64], repetitions: usize) -> Result<CircuitSpec, EncodeError> {
    check_finite(x)?;
    if repetitions == 0 {
        return Err(EncodeError::ZeroRepetitions);
    }
    let m = x.len();
    if m < 2 {
        return Err(EncodeError::TooFewFeatures(m));
    }
    let mut c = CircuitSpec::new(m)?;
    for _ in 0..repetitions {
        for q in 0..m {
            c.push(Gate::H(q))?;
        }
        for (q, &v) in x.iter().enumerate() {
            c.push(Gate::Rz(q, Angle::Fixed(-2.0 * v)))?;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let phi = pair_angle(x[p], x[q]);
                c.push(Gate::Rzz(p, q, Angle::Fixed(-2.0 * phi)))?;
            }
        }
    }
    Ok(c)
}

/// Pair interaction angle phi_(p,q)(x) = (pi - x_p)(pi - x_q).
pub fn pair_angle(xp: f64, xq: f64) -> f64 {
    (std::f64::consts::PI - xp) * (std::f64::consts::PI - xq)
}

/// Per-feature min-max scaler into [0, pi], fitted on the training split
/// only. Out-of-range test values are clipped; a constant feature maps to
/// pi/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, EncodeError> {
        let first = rows.first().ok_or(EncodeError::Empty)?;
        let m = first.len();
        let mut mins = vec![f64::INFINITY; m];
        let mut maxs = vec![f64::NEG_INFINITY; m];
        for row in rows {
            for (j, &v) in row.iter().enumerate().take(m) {
                if !v.is_finite() {
                    return Err(EncodeError::NonFinite(j));
                }
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(FeatureScaler { mins, maxs })
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| {
                if hi <= lo {
                    std::f64::consts::FRAC_PI_2
                } else {
                    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                    t * std::f64::consts::PI
                }
            })
            .collect()
    }
}

/// Min-max scale `raw` into [0, pi] with ranges fitted elsewhere.
pub fn scale_features(raw: &[f64], scaler: &FeatureScaler) -> Vec<f64> {
    scaler.transform(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::zero_state;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn amplitude_single_nonzero_is_basis_state() {
        let s = amplitude_encode(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.n_qubits(), 3);
        assert_eq!(s.amplitudes().len(), 8);
        assert!((s.probability_of_zero() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_uniform_seven_features() {
        let s = amplitude_encode(&[1.0; 7]).unwrap();
        let expect = 1.0 / 7f64.sqrt();
        for &a in &s.amplitudes()[..7] {
            assert!((a.re - expect).abs() < 1e-12);
            assert_eq!(a.im, 0.0);
        }
        // zero pad at index 7
        assert_eq!(s.amplitudes()[7], num_complex::Complex64::new(0.0, 0.0));
    }

    #[test]
    fn amplitude_three_four_five() {
        let s = amplitude_encode(&[3.0, 4.0]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-12);
    }

    #[test]
    fn amplitude_rejects_zero_vector() {
        assert!(matches!(
            amplitude_encode(&[0.0, 0.0]),
            Err(EncodeError::ZeroVector)
        ));
    }

    proptest! {
        #[test]
        fn amplitude_norm_is_one(v in proptest::collection::vec(-50.0f64..50.0, 1..16)) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-9));
            let s = amplitude_encode(&v).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_map_single_feature_zero_angle() {
        let c = z_feature_map(&[0.0], 1).unwrap();
        let s = c.apply(&zero_state(1).unwrap(), &[]).unwrap();
        let e = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].norm() - e).abs() < 1e-12);
        assert!((s.amplitudes()[1].norm() - e).abs() < 1e-12);
        // RZ(0) leaves H|0> untouched including phase
        assert!((s.amplitudes()[0].re - e).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - e).abs() < 1e-12);
    }

    #[test]
    fn z_map_structure_two_features() {
        let c = z_feature_map(&[0.4, 1.1], 1).unwrap();
        let h = c
            .gates()
            .iter()
            .filter(|g| matches!(g, crate::qsim::Gate::H(_)))
            .count();
        let rz = c
            .gates()
            .iter()
            .filter(|g| matches!(g, crate::qsim::Gate::Rz(..)))
            .count();
        assert_eq!(h, 2);
        assert_eq!(rz, 2);
        assert_eq!(c.two_qubit_gate_count(), 0);
    }

    #[test]
    fn z_map_phase_sign_does_not_change_probabilities() {
        let plus = z_feature_map(&[FRAC_PI_2], 1).unwrap();
        let minus = z_feature_map(&[-FRAC_PI_2], 1).unwrap();
        let sp = plus.apply(&zero_state(1).unwrap(), &[]).unwrap();
        let sm = minus.apply(&zero_state(1).unwrap(), &[]).unwrap();
        assert!((sp.probability_of_zero() - sm.probability_of_zero()).abs() < 1e-12);

        // at +-pi/4 the relative phases genuinely differ while the outcome
        // distribution stays the same
        let sp4 = z_feature_map(&[PI / 4.0], 1)
            .unwrap()
            .apply(&zero_state(1).unwrap(), &[])
            .unwrap();
        let sm4 = z_feature_map(&[-PI / 4.0], 1)
            .unwrap()
            .apply(&zero_state(1).unwrap(), &[])
            .unwrap();
        assert!((sp4.probability_of_zero() - sm4.probability_of_zero()).abs() < 1e-12);
        let rel_p = sp4.amplitudes()[1] / sp4.amplitudes()[0];
        let rel_m = sm4.amplitudes()[1] / sm4.amplitudes()[0];
        assert!((rel_p - rel_m).norm() > 1.0);
    }

    /// Permuting features together with qubit labels leaves the outcome
    /// distribution invariant (the map is per-qubit).
    #[test]
    fn z_map_commutes_with_feature_permutation() {
        let x = [0.3, 1.2, 2.1, 0.7];
        for m in 2..=4 {
            let xs = &x[..m];
            let mut probs = z_feature_map(xs, 2)
                .unwrap()
                .apply(&zero_state(m).unwrap(), &[])
                .unwrap()
                .outcome_probabilities();
            // reverse the features and un-permute the outcome indices
            let rev: Vec<f64> = xs.iter().rev().copied().collect();
            let probs_rev = z_feature_map(&rev, 2)
                .unwrap()
                .apply(&zero_state(m).unwrap(), &[])
                .unwrap()
                .outcome_probabilities();
            for (i, p) in probs.iter_mut().enumerate() {
                let mut j = 0;
                for b in 0..m {
                    if (i >> b) & 1 == 1 {
                        j |= 1 << (m - 1 - b);
                    }
                }
                assert!((*p - probs_rev[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zz_pair_angle_vanishes_at_pi() {
        assert_eq!(pair_angle(PI, 0.123), 0.0);
        assert_eq!(pair_angle(2.0, PI), 0.0);
    }

    #[test]
    fn zz_pair_counts() {
        let c3 = zz_feature_map(&[0.1, 0.2, 0.3], 1).unwrap();
        assert_eq!(c3.two_qubit_gate_count(), 3);
        let c7 = zz_feature_map(&[0.5; 7], 1).unwrap();
        assert_eq!(c7.two_qubit_gate_count(), 21);
        let c7x2 = zz_feature_map(&[0.5; 7], 2).unwrap();
        assert_eq!(c7x2.two_qubit_gate_count(), 42);
    }

    #[test]
    fn zz_rejects_single_feature() {
        assert!(matches!(
            zz_feature_map(&[1.0], 1),
            Err(EncodeError::TooFewFeatures(1))
        ));
    }

    /// With every feature at pi the pair interactions vanish and the map
    /// collapses to H gates plus single-qubit rotations.
    #[test]
    fn zz_collapses_when_all_features_are_pi() {
        let m = 3;
        let x = vec![PI; m];
        let full = zz_feature_map(&x, 1).unwrap();
        for g in full.gates() {
            if let crate::qsim::Gate::Rzz(_, _, Angle::Fixed(a)) = g {
                assert_eq!(*a, 0.0);
            }
        }
        let reference = z_feature_map(&x, 1).unwrap();
        let sf = full.apply(&zero_state(m).unwrap(), &[]).unwrap();
        let sr = reference.apply(&zero_state(m).unwrap(), &[]).unwrap();
        for (a, b) in sf.amplitudes().iter().zip(sr.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    /// Kernel values are invariant to a global phase on the encoded states.
    #[test]
    fn global_phase_leaves_fidelity_invariant() {
        let x1 = [0.3, 2.0];
        let x2 = [1.1, 0.4];
        let s1 = EncoderSpec::new(EncoderKind::ZzFeatureMap)
            .encode_state(&x1)
            .unwrap();
        let s2 = EncoderSpec::new(EncoderKind::ZzFeatureMap)
            .encode_state(&x2)
            .unwrap();
        let base = s1.inner_product(&s2).unwrap().norm_sqr();

        // prepend a global phase: P(theta) plus X-conjugated P(theta) applies
        // e^{i theta} to every amplitude of qubit 0's subspace pair
        let mut phased = zz_feature_map(&x1, 2).unwrap();
        phased.push(crate::qsim::Gate::X(0)).unwrap();
        phased
            .push(crate::qsim::Gate::Phase(0, Angle::Fixed(0.77)))
            .unwrap();
        phased.push(crate::qsim::Gate::X(0)).unwrap();
        phased
            .push(crate::qsim::Gate::Phase(0, Angle::Fixed(0.77)))
            .unwrap();
        let s1p = phased.apply(&zero_state(2).unwrap(), &[]).unwrap();
        let with_phase = s1p.inner_product(&s2).unwrap().norm_sqr();
        assert!((base - with_phase).abs() < 1e-12);
    }

    #[test]
    fn scaler_bounds_and_midpoint() {
        let rows = vec![vec![2.0, -1.0], vec![6.0, -1.0], vec![4.0, -1.0]];
        let scaler = FeatureScaler::fit(&rows).unwrap();
        let lo = scaler.transform(&[2.0, -1.0]);
        assert_eq!(lo[0], 0.0);
        assert_eq!(lo[1], FRAC_PI_2); // constant feature
        let hi = scaler.transform(&[6.0, -1.0]);
        assert!((hi[0] - PI).abs() < 1e-12);
        let mid = scaler.transform(&[4.0, -1.0]);
        assert!((mid[0] - FRAC_PI_2).abs() < 1e-12);
        // clipping
        let clipped = scaler.transform(&[100.0, -1.0]);
        assert!((clipped[0] - PI).abs() < 1e-12);
        let clipped_lo = scaler.transform(&[-100.0, -1.0]);
        assert_eq!(clipped_lo[0], 0.0);
    }
}
