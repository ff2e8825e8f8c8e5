//! Config-driven experiment execution: data -> split -> train -> evaluate,
//! with per-seed and mean reports written under a run-id directory.

use crate::config::{DatasetConfig, ExperimentConfig};
use crate::error::CliError;
use crate::models::build_classifier;
use qeml_core::data::{
    extract_features, ingest_edges, sample_split, synth_dataset, NodeFeatureTable,
};
use qeml_core::eval::{classification_report, false_positive_count, ClassificationReport};
use qeml_core::model::Label;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Everything one seed produced, minus wall-clock timing (which lives in
/// `timing.log` so reports stay bit-identical across reruns).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub model: String,
    pub n_train: usize,
    pub n_test: usize,
    pub split_scaled: bool,
    pub report: ClassificationReport,
    pub false_positives: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seeds: Vec<SeedSummary>,
}

impl RunSummary {
    pub fn mean(&self, pick: impl Fn(&SeedSummary) -> f64) -> f64 {
        self.seeds.iter().map(&pick).sum::<f64>() / self.seeds.len() as f64
    }
}

/// Load or synthesize the labeled feature pool.
pub fn load_pool(dataset: &DatasetConfig) -> Result<NodeFeatureTable, CliError> {
    match dataset {
        DatasetConfig::Synthetic {
            n_phishing,
            n_nonphishing,
            seed,
        } => Ok(synth_dataset(*n_phishing, *n_nonphishing, *seed)),
        DatasetConfig::FeaturesCsv { features } => Ok(NodeFeatureTable::read_csv(features)?),
        DatasetConfig::Edges { edges, labels } => {
            let (graph, labels) = ingest_edges(edges, labels)?;
            Ok(extract_features(&graph, &labels))
        }
    }
}

/// Run id: hash of the resolved config plus a timestamp.
pub fn run_id(config_echo: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_echo.as_bytes());
    let digest = hasher.finalize();
    let hash: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{hash}-{ts}")
}

pub fn report_csv(summary: &SeedSummary) -> String {
    let r = &summary.report;
    let mut out = String::from("metric,value\n");
    let mut kv = |k: &str, v: f64| {
        let _ = writeln!(out, "{k},{v:.6}");
    };
    kv("macro_precision", r.macro_precision);
    kv("macro_recall", r.macro_recall);
    kv("macro_f1", r.macro_f1);
    kv("phishing_precision", r.phishing.precision);
    kv("phishing_recall", r.phishing.recall);
    kv("phishing_f1", r.phishing.f1);
    kv("nonphishing_precision", r.non_phishing.precision);
    kv("nonphishing_recall", r.non_phishing.recall);
    kv("nonphishing_f1", r.non_phishing.f1);
    kv("accuracy", r.accuracy);
    let _ = writeln!(out, "false_positives,{}", summary.false_positives);
    let _ = writeln!(out, "tp,{}", r.confusion.true_positive);
    let _ = writeln!(out, "fp,{}", r.confusion.false_positive);
    let _ = writeln!(out, "tn,{}", r.confusion.true_negative);
    let _ = writeln!(out, "fn,{}", r.confusion.false_negative);
    out
}

pub fn mean_report_csv(run: &RunSummary) -> String {
    let mut out = String::from("metric,mean\n");
    type MeanColumn = (&'static str, fn(&SeedSummary) -> f64);
    let metrics: [MeanColumn; 7] = [
        ("macro_precision", |s| s.report.macro_precision),
        ("macro_recall", |s| s.report.macro_recall),
        ("macro_f1", |s| s.report.macro_f1),
        ("phishing_precision", |s| s.report.phishing.precision),
        ("phishing_recall", |s| s.report.phishing.recall),
        ("phishing_f1", |s| s.report.phishing.f1),
        ("false_positives", |s| s.false_positives as f64),
    ];
    for (name, pick) in metrics {
        let _ = writeln!(out, "{name},{:.6}", run.mean(pick));
    }
    out
}

/// Execute the experiment: `repeats` seeds, one artifact directory per run.
/// Validation happens before the output directory is created; a mid-run
/// failure leaves completed seeds on disk next to a FAILED marker.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunSummary, PathBuf), CliError> {
    config.validate()?;
    let echo = config.to_toml()?;
    let pool = load_pool(&config.dataset)?;

    let id = run_id(&echo);
    let dir = config.run.output_dir.join(&id);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.toml"), &echo)?;

    let mut summaries = Vec::new();
    for rep in 0..config.run.repeats {
        let seed = config.run.seed.wrapping_add(rep as u64);
        match run_single_seed(config, &pool, seed, &dir) {
            Ok(summary) => summaries.push(summary),
            Err(e) => {
                let marker = format!("seed {seed}: [{}] {e}\n", e.category());
                std::fs::write(dir.join("FAILED"), marker)?;
                return Err(e);
            }
        }
    }

    let run = RunSummary {
        run_id: id,
        seeds: summaries,
    };
    std::fs::write(dir.join("mean_report.csv"), mean_report_csv(&run))?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&run)?,
    )?;
    Ok((run, dir))
}

fn run_single_seed(
    config: &ExperimentConfig,
    pool: &NodeFeatureTable,
    seed: u64,
    dir: &Path,
) -> Result<SeedSummary, CliError> {
    let split = sample_split(pool, &config.split.to_spec(seed))?;
    let train = split.train.to_dataset()?;
    let test = split.test.to_dataset()?;

    let mut model = build_classifier(&config.model, seed)?;
    let t0 = Instant::now();
    model.fit(&train)?;
    let fit_seconds = t0.elapsed().as_secs_f64();

    let preds: Vec<Label> = model.predict_batch(test.features())?;
    let report = classification_report(test.labels(), &preds)?;
    let fp = false_positive_count(test.labels(), &preds)?;

    let summary = SeedSummary {
        seed,
        model: config.model.label(),
        n_train: train.len(),
        n_test: test.len(),
        split_scaled: split.scaled,
        report,
        false_positives: fp,
    };

    let seed_dir = dir.join(format!("seed-{seed}"));
    std::fs::create_dir_all(&seed_dir)?;
    std::fs::write(seed_dir.join("report.csv"), report_csv(&summary))?;
    std::fs::write(
        seed_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    std::fs::write(
        seed_dir.join("timing.log"),
        format!("fit_seconds={fit_seconds:.3}\n"),
    )?;
    match model.to_json() {
        Ok(json) => std::fs::write(seed_dir.join("model.json"), serde_json::to_string(&json)?)?,
        Err(e) => log::warn!("model not serialized: {e}"),
    }
    Ok(summary)
}
