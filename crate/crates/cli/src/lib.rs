//! Experiment runner library behind the `qeml` binary: configuration
//! loading, classifier construction, the experiment/study/bench pipelines,
//! and report assembly.

pub mod bench;
pub mod config;
pub mod error;
pub mod models;
pub mod runner;
pub mod study;
