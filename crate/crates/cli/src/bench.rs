//! Training-time benchmark over ascending balanced training-set sizes.

use crate::config::{BenchConfig, ModelSpec};
use crate::error::CliError;
use crate::models::build_classifier;
use qeml_core::data::synth_dataset;
use qeml_core::model::Dataset;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingRow {
    pub model: String,
    pub size: usize,
    pub seconds: f64,
    /// Distinct kernel entries a kernel-based model computes at this size,
    /// n(n+1)/2; zero for models that build no Gram matrix.
    pub kernel_entries: usize,
}

fn builds_kernel(spec: &ModelSpec) -> bool {
    matches!(
        spec,
        ModelSpec::QsvmKernel { .. }
            | ModelSpec::QsvmAnneal { .. }
            | ModelSpec::ClassicalSvm { .. }
    )
}

/// Train each model at each size on a balanced synthetic set and report
/// wall-clock fit times as delimited text.
pub fn run_timing_benchmark(config: &BenchConfig) -> Result<(Vec<TimingRow>, PathBuf), CliError> {
    config.validate()?;
    let max = *config.sizes.last().expect("validated non-empty");
    let per_class = max / 2 + 1;
    let pool = synth_dataset(per_class, per_class, config.seed);
    let full = pool.to_dataset()?;
    let pos: Vec<usize> = full.indices_with_label(1);
    let neg: Vec<usize> = full.indices_with_label(-1);

    let mut rows = Vec::new();
    for spec in &config.models {
        for &size in &config.sizes {
            let half = size / 2;
            let mut indices: Vec<usize> = pos[..half].to_vec();
            indices.extend_from_slice(&neg[..size - half]);
            let train: Dataset = full.select(&indices)?;

            let mut model = build_classifier(spec, config.seed)?;
            let t0 = Instant::now();
            model.fit(&train)?;
            let seconds = t0.elapsed().as_secs_f64();
            rows.push(TimingRow {
                model: spec.label(),
                size,
                seconds,
                kernel_entries: if builds_kernel(spec) {
                    size * (size + 1) / 2
                } else {
                    0
                },
            });
        }
    }

    std::fs::create_dir_all(&config.output_dir)?;
    let mut csv = String::from("model,size,seconds,kernel_entries\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:.6},{}",
            r.model, r.size, r.seconds, r.kernel_entries
        );
    }
    let path = config.output_dir.join("timing.csv");
    std::fs::write(&path, csv)?;
    Ok((rows, config.output_dir.clone()))
}
