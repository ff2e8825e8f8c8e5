//! Quantum-classical ensemble machine learning toolkit.
//!
//! Everything runs at desk scale on an exact statevector simulator:
//! data-encoding circuits, a variational quantum classifier, quantum-kernel
//! and QUBO/annealing SVM formulations, ansatz quality metrics, classical
//! baselines, stacking/bagging ensembles, and transaction-graph feature
//! extraction for phishing detection.

pub mod ansatz;
pub mod classical;
pub mod data;
pub mod encoders;
pub mod ensemble;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod qsim;
pub mod qsvm;
pub mod vqc;
