//! Exact statevector simulation.
//!
//! A [`StateVector`] holds the 2^n complex amplitudes of an n-qubit register;
//! a [`CircuitSpec`] is an ordered gate list with optional unbound parameter
//! slots. Applying a circuit is a pure function of the inputs, so states can
//! be evaluated from many threads as long as each thread owns its own copy.
//!
//! Qubit 0 is the least-significant bit of the basis index: basis state 0b01
//! has qubit 0 in |1> and qubit 1 in |0>.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Memory guard: 2^20 amplitudes is 16 MiB per state.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    Capacity(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    DuplicateQubit(usize),
    #[error("circuit expects {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("amplitude vector length {0} is not a power of two >= 2")]
    BadLength(usize),
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("circuit with unbound parameters cannot be inverted")]
    UnboundInverse,
    #[error("circuit spans {circuit} qubits but state has {state}")]
    WidthMismatch { circuit: usize, state: usize },
}

/// A gate angle: either a concrete value in radians or a reference to a
/// parameter slot resolved at application time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Slot(usize),
}

impl Angle {
    fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Fixed(v) => v,
            Angle::Slot(i) => params[i],
        }
    }

    fn negated(self) -> Result<Angle, SimError> {
        match self {
            Angle::Fixed(v) => Ok(Angle::Fixed(-v)),
            Angle::Slot(_) => Err(SimError::UnboundInverse),
        }
    }
}

/// The fixed gate set. Anything outside this list is rejected at circuit
/// construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    /// Phase gate P(theta) = diag(1, e^{i theta}).
    Phase(usize, Angle),
    Cnot {
        control: usize,
        target: usize,
    },
    Cz(usize, usize),
    Crx {
        control: usize,
        target: usize,
        angle: Angle,
    },
    Crz {
        control: usize,
        target: usize,
        angle: Angle,
    },
    /// Two-qubit ZZ rotation exp(-i theta/2 Z x Z).
    Rzz(usize, usize, Angle),
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => (q, None),
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Phase(q, _) => (q, None),
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Cz(a, b) => (a, Some(b)),
            Gate::Crx {
                control, target, ..
            } => (control, Some(target)),
            Gate::Crz {
                control, target, ..
            } => (control, Some(target)),
            Gate::Rzz(a, b, _) => (a, Some(b)),
        }
    }

    fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Rx(_, a)
            | Gate::Ry(_, a)
            | Gate::Rz(_, a)
            | Gate::Phase(_, a)
            | Gate::Crx { angle: a, .. }
            | Gate::Crz { angle: a, .. }
            | Gate::Rzz(_, _, a) => Some(a),
            _ => None,
        }
    }

    /// True for gates acting on two qubits.
    pub fn is_two_qubit(&self) -> bool {
        self.qubits().1.is_some()
    }

    fn inverse(&self) -> Result<Gate, SimError> {
        Ok(match *self {
            Gate::H(q) => Gate::H(q),
            Gate::X(q) => Gate::X(q),
            Gate::Z(q) => Gate::Z(q),
            Gate::Rx(q, a) => Gate::Rx(q, a.negated()?),
            Gate::Ry(q, a) => Gate::Ry(q, a.negated()?),
            Gate::Rz(q, a) => Gate::Rz(q, a.negated()?),
            Gate::Phase(q, a) => Gate::Phase(q, a.negated()?),
            Gate::Cnot { control, target } => Gate::Cnot { control, target },
            Gate::Cz(a, b) => Gate::Cz(a, b),
            Gate::Crx {
                control,
                target,
                angle,
            } => Gate::Crx {
                control,
                target,
                angle: angle.negated()?,
            },
            Gate::Crz {
                control,
                target,
                angle,
            } => Gate::Crz {
                control,
                target,
                angle: angle.negated()?,
            },
            Gate::Rzz(a, b, angle) => Gate::Rzz(a, b, angle.negated()?),
        })
    }
}

/// Ordered gate list over a fixed register width, with `n_params` unbound
/// parameter slots. Binding a vector of `n_params` angles yields a concrete
/// unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::Capacity(n_qubits));
        }
        Ok(CircuitSpec {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Append a gate, validating qubit indices against the register width.
    pub fn push(&mut self, gate: Gate) -> Result<(), SimError> {
        let (a, b) = gate.qubits();
        for q in [Some(a), b].into_iter().flatten() {
            if q >= self.n_qubits {
                return Err(SimError::QubitIndex {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if let Some(bq) = b {
            if bq == a {
                return Err(SimError::DuplicateQubit(a));
            }
        }
        if let Some(Angle::Slot(s)) = gate.angle() {
            self.n_params = self.n_params.max(s + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Allocate the next parameter slot.
    pub fn alloc_slot(&mut self) -> Angle {
        let slot = self.n_params;
        self.n_params += 1;
        Angle::Slot(slot)
    }

    /// Exact inverse: reversed gate order with negated angles. Only defined
    /// for fully bound circuits.
    pub fn inverse(&self) -> Result<CircuitSpec, SimError> {
        if self.n_params > 0 {
            return Err(SimError::UnboundInverse);
        }
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            gates.push(g.inverse()?);
        }
        Ok(CircuitSpec {
            n_qubits: self.n_qubits,
            gates,
            n_params: 0,
        })
    }

    /// Apply the circuit to a state, resolving parameter slots from `params`.
    /// Returns a new state; the input is untouched.
    pub fn apply(&self, state: &StateVector, params: &[f64]) -> Result<StateVector, SimError> {
        if params.len() != self.n_params {
            return Err(SimError::ParamCount {
                expected: self.n_params,
                got: params.len(),
            });
        }
        if state.n_qubits != self.n_qubits {
            return Err(SimError::WidthMismatch {
                circuit: self.n_qubits,
                state: state.n_qubits,
            });
        }
        let mut out = state.clone();
        for gate in &self.gates {
            apply_gate(&mut out.amps, gate, params);
        }
        Ok(out)
    }
}

/// Complex amplitude vector over the 2^n computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The |0...0> state.
    pub fn zero_state(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::Capacity(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Build a state from explicit amplitudes. The length must be a power of
    /// two and the norm must be 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(SimError::Capacity(n_qubits));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized((norm - 1.0).abs()));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Sum of |amplitude|^2; 1 for any valid state.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of measuring the all-zeros outcome.
    pub fn probability_of_zero(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// Probability of each basis outcome; entries sum to 1.
    pub fn outcome_probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// <self|other>.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64, SimError> {
        if self.n_qubits != other.n_qubits {
            return Err(SimError::WidthMismatch {
                circuit: other.n_qubits,
                state: self.n_qubits,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Single-qubit reduced density matrix obtained by tracing out every
    /// qubit except `keep`. Hermitian with unit trace.
    pub fn reduced_density_matrix(&self, keep: usize) -> Result<[[Complex64; 2]; 2], SimError> {
        if keep >= self.n_qubits {
            return Err(SimError::QubitIndex {
                index: keep,
                n_qubits: self.n_qubits,
            });
        }
        let mask = 1usize << keep;
        let mut r00 = Complex64::new(0.0, 0.0);
        let mut r01 = Complex64::new(0.0, 0.0);
        let mut r11 = Complex64::new(0.0, 0.0);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                r00 += a0 * a0.conj();
                r11 += a1 * a1.conj();
                r01 += a0 * a1.conj();
            }
        }
        Ok([[r00, r01], [r01.conj(), r11]])
    }

    /// Sample `shots` measurement outcomes in the computational basis and
    /// return per-basis-state counts. Randomness comes only from `rng`.
    pub fn sample_counts<R: Rng>(&self, shots: usize, rng: &mut R) -> Vec<u64> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut counts = vec![0u64; self.amps.len()];
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(self.amps.len() - 1);
            counts[idx] += 1;
        }
        counts
    }
}

/// The |0...0> state of `n_qubits` qubits.
pub fn zero_state(n_qubits: usize) -> Result<StateVector, SimError> {
    StateVector::zero_state(n_qubits)
}

/// Apply `circuit` to `state` with the given parameter binding.
pub fn apply_circuit(
    state: &StateVector,
    circuit: &CircuitSpec,
    params: &[f64],
) -> Result<StateVector, SimError> {
    circuit.apply(state, params)
}

fn apply_gate(amps: &mut [Complex64], gate: &Gate, params: &[f64]) {
    match *gate {
        Gate::H(q) => {
            let f = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            apply_1q(amps, q, f, f, f, -f);
        }
        Gate::X(q) => {
            let step = 1 << q;
            let mut i = 0;
            while i < amps.len() {
                for off in 0..step {
                    amps.swap(i + off, i + off + step);
                }
                i += 2 * step;
            }
        }
        Gate::Z(q) => {
            for (i, a) in amps.iter_mut().enumerate() {
                if (i >> q) & 1 == 1 {
                    *a = -*a;
                }
            }
        }
        Gate::Rx(q, angle) => {
            let t = angle.resolve(params) / 2.0;
            let c = Complex64::new(t.cos(), 0.0);
            let s = Complex64::new(0.0, -t.sin());
            apply_1q(amps, q, c, s, s, c);
        }
        Gate::Ry(q, angle) => {
            let t = angle.resolve(params) / 2.0;
            let c = Complex64::new(t.cos(), 0.0);
            let s = Complex64::new(t.sin(), 0.0);
            apply_1q(amps, q, c, -s, s, c);
        }
        Gate::Rz(q, angle) => {
            let t = angle.resolve(params) / 2.0;
            let e0 = Complex64::from_polar(1.0, -t);
            let e1 = Complex64::from_polar(1.0, t);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if (i >> q) & 1 == 0 { e0 } else { e1 };
            }
        }
        Gate::Phase(q, angle) => {
            let e = Complex64::from_polar(1.0, angle.resolve(params));
            for (i, a) in amps.iter_mut().enumerate() {
                if (i >> q) & 1 == 1 {
                    *a *= e;
                }
            }
        }
        Gate::Cnot { control, target } => {
            for i in 0..amps.len() {
                if (i >> control) & 1 == 1 && (i >> target) & 1 == 0 {
                    amps.swap(i, i | (1 << target));
                }
            }
        }
        Gate::Cz(a, b) => {
            for (i, amp) in amps.iter_mut().enumerate() {
                if (i >> a) & 1 == 1 && (i >> b) & 1 == 1 {
                    *amp = -*amp;
                }
            }
        }
        Gate::Crx {
            control,
            target,
            angle,
        } => {
            let t = angle.resolve(params) / 2.0;
            let c = Complex64::new(t.cos(), 0.0);
            let s = Complex64::new(0.0, -t.sin());
            apply_controlled_1q(amps, control, target, c, s, s, c);
        }
        Gate::Crz {
            control,
            target,
            angle,
        } => {
            let t = angle.resolve(params) / 2.0;
            let e0 = Complex64::from_polar(1.0, -t);
            let e1 = Complex64::from_polar(1.0, t);
            for (i, a) in amps.iter_mut().enumerate() {
                if (i >> control) & 1 == 1 {
                    *a *= if (i >> target) & 1 == 0 { e0 } else { e1 };
                }
            }
        }
        Gate::Rzz(qa, qb, angle) => {
            let t = angle.resolve(params) / 2.0;
            let same = Complex64::from_polar(1.0, -t);
            let diff = Complex64::from_polar(1.0, t);
            for (i, a) in amps.iter_mut().enumerate() {
                let parity = ((i >> qa) ^ (i >> qb)) & 1;
                *a *= if parity == 0 { same } else { diff };
            }
        }
    }
}

fn apply_1q(
    amps: &mut [Complex64],
    q: usize,
    u00: Complex64,
    u01: Complex64,
    u10: Complex64,
    u11: Complex64,
) {
    let step = 1 << q;
    let mut i = 0;
    while i < amps.len() {
        for off in 0..step {
            let j = i + off;
            let k = j + step;
            let a = amps[j];
            let b = amps[k];
            amps[j] = u00 * a + u01 * b;
            amps[k] = u10 * a + u11 * b;
        }
        i += 2 * step;
    }
}

fn apply_controlled_1q(
    amps: &mut [Complex64],
    control: usize,
    target: usize,
    u00: Complex64,
    u01: Complex64,
    u10: Complex64,
    u11: Complex64,
) {
    for i in 0..amps.len() {
        if (i >> control) & 1 == 1 && (i >> target) & 1 == 0 {
            let j = i;
            let k = i | (1 << target);
            let a = amps[j];
            let b = amps[k];
            amps[j] = u00 * a + u01 * b;
            amps[k] = u10 * a + u11 * b;
        }
    }
}
