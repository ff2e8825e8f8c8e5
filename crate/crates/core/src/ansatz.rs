//! Registry of the 19 benchmarked parameterized circuit templates.
//!
//! The layouts live in `data/ansatz_registry.txt`, a small pattern language
//! expanded against the register width at build time. Builders are pure and
//! deterministic: the same (id, n_qubits, layers) tuple always yields the
//! same gate list, and layer L's parameters occupy slots
//! [(L-1)*P, L*P) where P = params_per_layer.

use crate::qsim::{CircuitSpec, Gate, SimError};
use std::collections::BTreeMap;
use std::sync::OnceLock;
use thiserror::Error;

const REGISTRY_TEXT: &str = include_str!("../data/ansatz_registry.txt");

#[derive(Debug, Error)]
pub enum AnsatzError {
    #[error("no circuit template with id {0} in the registry")]
    UnknownId(u32),
    #[error("ansatz templates require at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("layers must be >= 1")]
    ZeroLayers,
    #[error("registry parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StepOp {
    H,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Crx,
    Crz,
}

impl StepOp {
    fn is_single_qubit(self) -> bool {
        matches!(self, StepOp::H | StepOp::Rx | StepOp::Ry | StepOp::Rz)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pattern {
    All,
    Inner,
    Chain,
    Ring,
    RingRev,
    PairsEven,
    PairsOdd,
    AllToAll,
}

impl Pattern {
    fn is_pairwise(self) -> bool {
        !matches!(self, Pattern::All | Pattern::Inner)
    }
}

#[derive(Clone, Debug)]
struct Step {
    op: StepOp,
    pattern: Pattern,
}

/// One of the 19 templates, identified by its registry id.
#[derive(Clone, Debug)]
pub struct AnsatzTemplate {
    id: u32,
    steps: Vec<Step>,
}

impl AnsatzTemplate {
    pub fn id(&self) -> u32 {
        self.id
    }

    /// Parameter slots emitted by a single layer at the given width.
    pub fn params_per_layer(&self, n_qubits: usize) -> Result<usize, AnsatzError> {
        if n_qubits < 2 {
            return Err(AnsatzError::TooFewQubits(n_qubits));
        }
        let mut count = 0;
        for step in &self.steps {
            let parametric = matches!(
                step.op,
                StepOp::Rx | StepOp::Ry | StepOp::Rz | StepOp::Crx | StepOp::Crz
            );
            if parametric {
                count += match step.pattern {
                    Pattern::All => n_qubits,
                    Pattern::Inner => n_qubits.saturating_sub(2),
                    Pattern::Chain => n_qubits - 1,
                    Pattern::Ring | Pattern::RingRev => ring_len(n_qubits),
                    Pattern::PairsEven => (0..n_qubits - 1).step_by(2).count(),
                    Pattern::PairsOdd => (1..n_qubits - 1).step_by(2).count(),
                    Pattern::AllToAll => n_qubits * (n_qubits - 1),
                };
            }
        }
        Ok(count)
    }

    /// Build the template at the given width and layer count.
    pub fn build(&self, n_qubits: usize, layers: usize) -> Result<CircuitSpec, AnsatzError> {
        if n_qubits < 2 {
            return Err(AnsatzError::TooFewQubits(n_qubits));
        }
        if layers == 0 {
            return Err(AnsatzError::ZeroLayers);
        }
        let mut circuit = CircuitSpec::new(n_qubits)?;
        for _ in 0..layers {
            for step in &self.steps {
                emit_step(&mut circuit, step, n_qubits)?;
            }
        }
        Ok(circuit)
    }
}

fn ring_len(n: usize) -> usize {
    if n == 2 {
        1
    } else {
        n
    }
}

fn single_qubit_targets(pattern: Pattern, n: usize) -> Vec<usize> {
    match pattern {
        Pattern::All => (0..n).collect(),
        Pattern::Inner => (1..n.saturating_sub(1)).collect(),
        _ => unreachable!("pairwise pattern used with a single-qubit op"),
    }
}

fn pair_targets(pattern: Pattern, n: usize) -> Vec<(usize, usize)> {
    match pattern {
        Pattern::Chain => (0..n - 1).map(|i| (i, i + 1)).collect(),
        Pattern::Ring => {
            let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if n > 2 {
                pairs.push((n - 1, 0));
            }
            pairs
        }
        Pattern::RingRev => {
            let mut pairs = pair_targets(Pattern::Ring, n);
            pairs.reverse();
            for p in &mut pairs {
                *p = (p.1, p.0);
            }
            pairs
        }
        Pattern::PairsEven => (0..n - 1).step_by(2).map(|i| (i, i + 1)).collect(),
        Pattern::PairsOdd => (1..n - 1).step_by(2).map(|i| (i, i + 1)).collect(),
        Pattern::AllToAll => {
            let mut pairs = Vec::with_capacity(n * (n - 1));
            for c in 0..n {
                for t in 0..n {
                    if t != c {
                        pairs.push((c, t));
                    }
                }
            }
            pairs
        }
        Pattern::All | Pattern::Inner => {
            unreachable!("single-qubit pattern used with a two-qubit op")
        }
    }
}

fn emit_step(circuit: &mut CircuitSpec, step: &Step, n: usize) -> Result<(), AnsatzError> {
    if step.op.is_single_qubit() {
        for q in single_qubit_targets(step.pattern, n) {
            let gate = match step.op {
                StepOp::H => Gate::H(q),
                StepOp::Rx => Gate::Rx(q, circuit.alloc_slot()),
                StepOp::Ry => Gate::Ry(q, circuit.alloc_slot()),
                StepOp::Rz => Gate::Rz(q, circuit.alloc_slot()),
                _ => unreachable!(),
            };
            circuit.push(gate)?;
        }
    } else {
        for (control, target) in pair_targets(step.pattern, n) {
            let gate = match step.op {
                StepOp::Cnot => Gate::Cnot { control, target },
                StepOp::Cz => Gate::Cz(control, target),
                StepOp::Crx => Gate::Crx {
                    control,
                    target,
                    angle: circuit.alloc_slot(),
                },
                StepOp::Crz => Gate::Crz {
                    control,
                    target,
                    angle: circuit.alloc_slot(),
                },
                _ => unreachable!(),
            };
            circuit.push(gate)?;
        }
    }
    Ok(())
}

/// Immutable template registry parsed from the shipped data file.
pub struct AnsatzRegistry {
    templates: BTreeMap<u32, AnsatzTemplate>,
}

impl AnsatzRegistry {
    fn parse(text: &str) -> Result<Self, AnsatzError> {
        let mut templates = BTreeMap::new();
        let mut current: Option<AnsatzTemplate> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            match head {
                "circuit" => {
                    if current.is_some() {
                        return Err(AnsatzError::Parse {
                            line: lineno,
                            message: "nested circuit block".into(),
                        });
                    }
                    let id: u32 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                        AnsatzError::Parse {
                            line: lineno,
                            message: "expected circuit <id>".into(),
                        }
                    })?;
                    current = Some(AnsatzTemplate {
                        id,
                        steps: Vec::new(),
                    });
                }
                "end" => {
                    let t = current.take().ok_or_else(|| AnsatzError::Parse {
                        line: lineno,
                        message: "end outside a circuit block".into(),
                    })?;
                    templates.insert(t.id, t);
                }
                op_name => {
                    let t = current.as_mut().ok_or_else(|| AnsatzError::Parse {
                        line: lineno,
                        message: "gate line outside a circuit block".into(),
                    })?;
                    let op = match op_name {
                        "h" => StepOp::H,
                        "rx" => StepOp::Rx,
                        "ry" => StepOp::Ry,
                        "rz" => StepOp::Rz,
                        "cnot" => StepOp::Cnot,
                        "cz" => StepOp::Cz,
                        "crx" => StepOp::Crx,
                        "crz" => StepOp::Crz,
                        other => {
                            return Err(AnsatzError::Parse {
                                line: lineno,
                                message: format!("unknown op `{other}`"),
                            })
                        }
                    };
                    let pattern = match parts.next() {
                        Some("all") => Pattern::All,
                        Some("inner") => Pattern::Inner,
                        Some("chain") => Pattern::Chain,
                        Some("ring") => Pattern::Ring,
                        Some("ring_rev") => Pattern::RingRev,
                        Some("pairs_even") => Pattern::PairsEven,
                        Some("pairs_odd") => Pattern::PairsOdd,
                        Some("all_to_all") => Pattern::AllToAll,
                        other => {
                            return Err(AnsatzError::Parse {
                                line: lineno,
                                message: format!("unknown pattern `{other:?}`"),
                            })
                        }
                    };
                    let two_qubit_op = !op.is_single_qubit();
                    if two_qubit_op != pattern.is_pairwise() {
                        return Err(AnsatzError::Parse {
                            line: lineno,
                            message: format!("op `{op_name}` incompatible with its pattern"),
                        });
                    }
                    t.steps.push(Step { op, pattern });
                }
            }
        }
        if current.is_some() {
            return Err(AnsatzError::Parse {
                line: 0,
                message: "unterminated circuit block".into(),
            });
        }
        Ok(AnsatzRegistry { templates })
    }

    pub fn get(&self, id: u32) -> Result<&AnsatzTemplate, AnsatzError> {
        self.templates.get(&id).ok_or(AnsatzError::UnknownId(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.templates.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// The shared registry, parsed once.
pub fn registry() -> &'static AnsatzRegistry {
    static REGISTRY: OnceLock<AnsatzRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        AnsatzRegistry::parse(REGISTRY_TEXT).expect("shipped ansatz registry must parse")
    })
}

/// Build template `id` at the given width and layer count.
pub fn build_ansatz(id: u32, n_qubits: usize, layers: usize) -> Result<CircuitSpec, AnsatzError> {
    registry().get(id)?.build(n_qubits, layers)
}

/// Parameter slots per layer for template `id` at the given width.
pub fn params_per_layer(id: u32, n_qubits: usize) -> Result<usize, AnsatzError> {
    registry().get(id)?.params_per_layer(n_qubits)
}

/// Number of two-qubit gates in a circuit.
pub fn count_entangling_gates(circuit: &CircuitSpec) -> usize {
    circuit.two_qubit_gate_count()
}
