//! The ansatz study: a (circuit x encoder x layers) grid of VQC trainings
//! plus ansatz quality metrics, feeding the correlation report.
//!
//! Cells are cached under `cells/<hash>.json` keyed by everything that
//! affects the cell's result, so an interrupted study resumes where it
//! stopped and a resumed run assembles the same tables as a fresh one.

use crate::config::StudyConfig;
use crate::error::CliError;
use qeml_core::data::sample_split;
use qeml_core::encoders::{EncoderKind, EncoderSpec};
use qeml_core::eval::{classification_report, correlation_report, StudyRow};
use qeml_core::metrics::{entangling_capacity, expressibility};
use qeml_core::model::{Classifier, Label};
use qeml_core::vqc::{VqcClassifier, VqcConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CellResult {
    row: StudyRow,
    macro_f1: f64,
    entangling_gates: usize,
}

fn cell_hash(config: &StudyConfig, circuit: u32, encoder: EncoderKind, layers: usize) -> String {
    let mut hasher = Sha256::new();
    let key = format!(
        "{circuit}|{}|{layers}|reps={}|budget={}|pairs={}|bins={}|samples={}|seed={}",
        encoder.as_str(),
        config.repetitions,
        config.max_evaluations,
        config.n_pairs,
        config.n_bins,
        config.n_param_samples,
        config.seed,
    );
    hasher.update(key.as_bytes());
    if let Ok(ds) = serde_json::to_string(&config.dataset) {
        hasher.update(ds.as_bytes());
    }
    if let Ok(sp) = serde_json::to_string(&config.split) {
        hasher.update(sp.as_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyOutput {
    pub rows: Vec<StudyRow>,
    /// Per encoder: (circuit, macro F1 at the first layer count, macro F1 at
    /// the second), present when the grid has exactly two layer settings.
    pub layer_comparison: Vec<(String, u32, f64, f64)>,
}

/// Run (or resume) the study grid and emit the metrics/scores table, the
/// correlation table, and the layer comparison under `output_dir`.
pub fn run_ansatz_study(config: &StudyConfig) -> Result<(StudyOutput, PathBuf), CliError> {
    config.validate()?;
    let pool = crate::runner::load_pool(&config.dataset)?;
    let split = sample_split(&pool, &config.split.to_spec(config.seed))?;
    let train = split.train.to_dataset()?;
    let test = split.test.to_dataset()?;

    let dir = config.output_dir.clone();
    let cell_dir = dir.join("cells");
    std::fs::create_dir_all(&cell_dir)?;

    let mut cells: Vec<CellResult> = Vec::new();
    for &circuit in &config.circuits {
        for &encoder in &config.encoders {
            for &layers in &config.layers {
                let hash = cell_hash(config, circuit, encoder, layers);
                let path = cell_dir.join(format!("{hash}.json"));
                let cell = if path.is_file() {
                    let text = std::fs::read_to_string(&path)?;
                    serde_json::from_str(&text)?
                } else {
                    match compute_cell(config, circuit, encoder, layers, &train, &test) {
                        Ok(cell) => {
                            std::fs::write(&path, serde_json::to_string_pretty(&cell)?)?;
                            cell
                        }
                        Err(e) => {
                            // per-cell failures are recorded and skipped
                            log::warn!(
                                "cell (circuit {circuit}, {}, {layers} layers) failed: {e}",
                                encoder.as_str()
                            );
                            std::fs::write(cell_dir.join(format!("{hash}.failed")), e.to_string())?;
                            continue;
                        }
                    }
                };
                cells.push(cell);
            }
        }
    }

    let rows: Vec<StudyRow> = cells.iter().map(|c| c.row.clone()).collect();
    let correlations = correlation_report(&rows)?;

    let mut metrics_csv = String::from(
        "circuit_id,layers,encoder,expressibility_kl,meyer_wallach,von_neumann,precision,recall,f1,macro_f1,entangling_gates\n",
    );
    for c in &cells {
        let r = &c.row;
        let _ = writeln!(
            metrics_csv,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            r.circuit_id,
            r.layers,
            r.encoder,
            r.expressibility_kl,
            r.meyer_wallach,
            r.von_neumann,
            r.precision,
            r.recall,
            r.f1,
            c.macro_f1,
            c.entangling_gates
        );
    }
    std::fs::write(dir.join("metrics_scores.csv"), metrics_csv)?;
    std::fs::write(dir.join("correlations.csv"), correlations.to_csv_string())?;

    // layer-degradation comparison when exactly two layer settings ran
    let mut layer_comparison = Vec::new();
    if config.layers.len() == 2 {
        let (l1, l2) = (config.layers[0], config.layers[1]);
        let mut csv = String::from("encoder,circuit_id,macro_f1_first,macro_f1_second\n");
        for &encoder in &config.encoders {
            for &circuit in &config.circuits {
                let find = |layers: usize| {
                    cells
                        .iter()
                        .find(|c| {
                            c.row.circuit_id == circuit
                                && c.row.layers == layers
                                && c.row.encoder == encoder.as_str()
                        })
                        .map(|c| c.macro_f1)
                };
                if let (Some(a), Some(b)) = (find(l1), find(l2)) {
                    let _ = writeln!(csv, "{},{circuit},{a:.6},{b:.6}", encoder.as_str());
                    layer_comparison.push((encoder.as_str().to_string(), circuit, a, b));
                }
            }
        }
        std::fs::write(dir.join("layers_compare.csv"), csv)?;
    }

    Ok((
        StudyOutput {
            rows,
            layer_comparison,
        },
        dir,
    ))
}

fn compute_cell(
    config: &StudyConfig,
    circuit: u32,
    encoder: EncoderKind,
    layers: usize,
    train: &qeml_core::model::Dataset,
    test: &qeml_core::model::Dataset,
) -> Result<CellResult, CliError> {
    let spec = EncoderSpec::with_repetitions(encoder, config.repetitions);
    let mut vqc_config = VqcConfig::new(spec, circuit, layers, config.seed);
    vqc_config.max_evaluations = config.max_evaluations;
    let mut clf = VqcClassifier::new(vqc_config);
    clf.fit(train)?;

    let preds: Vec<Label> = clf.predict_batch(test.features())?;
    let report = classification_report(test.labels(), &preds)?;

    let n_qubits = spec.n_qubits(train.n_features());
    let ansatz = qeml_core::ansatz::build_ansatz(circuit, n_qubits, layers)?;
    let expr = expressibility(&ansatz, config.n_pairs, config.n_bins, config.seed)?;
    let ent = entangling_capacity(&ansatz, config.n_param_samples, config.seed)?;

    Ok(CellResult {
        row: StudyRow {
            circuit_id: circuit,
            layers,
            encoder: encoder.as_str().to_string(),
            expressibility_kl: expr.kl_divergence,
            meyer_wallach: ent.meyer_wallach,
            von_neumann: ent.von_neumann_bits,
            precision: report.macro_precision,
            recall: report.macro_recall,
            f1: report.macro_f1,
        },
        macro_f1: report.macro_f1,
        entangling_gates: qeml_core::ansatz::count_entangling_gates(&ansatz),
    })
}
