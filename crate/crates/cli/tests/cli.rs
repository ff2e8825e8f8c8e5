//! Integration tests for the runner library and the `qeml` binary.

use qeml_cli::bench::run_timing_benchmark;
use qeml_cli::config::{
    BenchConfig, DatasetConfig, ExperimentConfig, ModelSpec, RunConfig, SplitConfig, StudyConfig,
};
use qeml_cli::runner::run_experiment;
use qeml_cli::study::run_ansatz_study;
use qeml_core::encoders::EncoderKind;
use std::path::{Path, PathBuf};
use std::process::Command;

fn qeml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qeml"))
}

fn small_synthetic(out: PathBuf, model: ModelSpec, repeats: usize) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetConfig::Synthetic {
            n_phishing: 120,
            n_nonphishing: 1200,
            seed: 4,
        },
        split: SplitConfig {
            train_phishing: 30,
            train_nonphishing: 30,
            test_phishing: 60,
            test_nonphishing: 600,
        },
        model,
        run: RunConfig {
            seed: 11,
            repeats,
            output_dir: out,
        },
    }
}

#[test]
fn invalid_config_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let mut config = small_synthetic(
        out.clone(),
        ModelSpec::Logistic {
            l2: 1e-3,
            epochs: 100,
        },
        1,
    );
    config.split.test_phishing = 0; // invalid
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.category(), "config");
    assert!(
        !out.exists(),
        "no output directory may be created for an invalid config"
    );
}

#[test]
fn repeats_produce_per_seed_and_mean_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_synthetic(
        dir.path().join("runs"),
        ModelSpec::Logistic {
            l2: 1e-3,
            epochs: 150,
        },
        5,
    );
    let (run, path) = run_experiment(&config).unwrap();
    assert_eq!(run.seeds.len(), 5);
    for rep in 0..5u64 {
        let seed_dir = path.join(format!("seed-{}", 11 + rep));
        assert!(seed_dir.join("report.csv").is_file());
        assert!(seed_dir.join("summary.json").is_file());
        assert!(seed_dir.join("model.json").is_file());
        assert!(seed_dir.join("timing.log").is_file());
    }
    assert!(path.join("mean_report.csv").is_file());
    assert!(path.join("config.toml").is_file());
    let mean = std::fs::read_to_string(path.join("mean_report.csv")).unwrap();
    assert!(mean.contains("macro_f1"));
    assert!(mean.contains("macro_precision"));
    assert!(mean.contains("macro_recall"));
}

#[test]
fn stack_and_bag_specs_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let stack = ModelSpec::Stack {
        level0: vec![ModelSpec::Gbt {
            n_rounds: 10,
            learning_rate: 0.2,
            max_depth: 2,
        }],
        level1: vec![
            ModelSpec::QsvmKernel {
                encoder: EncoderKind::Amplitude,
                repetitions: 1,
                box_bound: 100.0,
                kernel_cache: None,
            },
            ModelSpec::Gbt {
                n_rounds: 10,
                learning_rate: 0.2,
                max_depth: 2,
            },
        ],
        meta: Box::new(ModelSpec::Logistic {
            l2: 1e-3,
            epochs: 150,
        }),
        probability_columns: false,
    };
    let (run, _) = run_experiment(&small_synthetic(dir.path().join("s"), stack, 1)).unwrap();
    assert!(run.seeds[0].report.macro_f1 > 0.0);

    let bag = ModelSpec::Bag {
        base: Box::new(ModelSpec::Gbt {
            n_rounds: 10,
            learning_rate: 0.2,
            max_depth: 2,
        }),
        n_members: 5,
        combine: qeml_core::ensemble::CombineRule::WeightedAverage,
    };
    let (run, _) = run_experiment(&small_synthetic(dir.path().join("b"), bag, 1)).unwrap();
    assert!(run.seeds[0].report.macro_f1 > 0.0);
}

#[test]
fn bench_rows_are_monotone_and_quadratic_in_kernel_entries() {
    let dir = tempfile::tempdir().unwrap();
    let config = BenchConfig {
        sizes: vec![40, 80, 160],
        models: vec![ModelSpec::QsvmKernel {
            encoder: EncoderKind::Amplitude,
            repetitions: 1,
            box_bound: 100.0,
            kernel_cache: None,
        }],
        seed: 3,
        output_dir: dir.path().join("bench"),
    };
    let (rows, out) = run_timing_benchmark(&config).unwrap();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(
            w[1].seconds >= w[0].seconds,
            "{} then {}",
            w[0].seconds,
            w[1].seconds
        );
    }
    for r in &rows {
        assert_eq!(r.kernel_entries, r.size * (r.size + 1) / 2);
    }
    let csv = std::fs::read_to_string(out.join("timing.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + 3 rows
}

#[test]
fn study_resume_skips_completed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let config = StudyConfig {
        circuits: vec![1, 9, 13],
        layers: vec![1, 2],
        encoders: vec![EncoderKind::ZFeatureMap],
        repetitions: 1,
        max_evaluations: 10,
        n_pairs: 100,
        n_bins: 75,
        n_param_samples: 50,
        dataset: DatasetConfig::Synthetic {
            n_phishing: 80,
            n_nonphishing: 800,
            seed: 6,
        },
        split: SplitConfig {
            train_phishing: 20,
            train_nonphishing: 20,
            test_phishing: 40,
            test_nonphishing: 400,
        },
        seed: 5,
        output_dir: dir.path().join("study"),
    };
    let (out, path) = run_ansatz_study(&config).unwrap();
    assert_eq!(out.rows.len(), 6); // 3 circuits x 1 encoder x 2 layers
    assert_eq!(out.layer_comparison.len(), 3);

    let cell_dir = path.join("cells");
    let mtimes = |dir: &Path| -> Vec<(String, std::time::SystemTime)> {
        let mut v: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    e.metadata().unwrap().modified().unwrap(),
                )
            })
            .collect();
        v.sort();
        v
    };
    let before = mtimes(&cell_dir);
    assert_eq!(before.len(), 6);
    let first_tables = std::fs::read(path.join("metrics_scores.csv")).unwrap();

    // resume: same cells, untouched files, identical final table
    let (out2, _) = run_ansatz_study(&config).unwrap();
    assert_eq!(out2.rows.len(), 6);
    assert_eq!(
        mtimes(&cell_dir),
        before,
        "resume must not recompute finished cells"
    );
    assert_eq!(
        std::fs::read(path.join("metrics_scores.csv")).unwrap(),
        first_tables
    );
}

#[test]
fn binary_pipeline_features_split_train_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let labels = dir.path().join("labels.csv");

    // a small two-cluster transaction graph: phishing hubs receive from
    // many one-off senders, normal wallets trade amongst themselves
    let mut e = String::from("from,to,value\n");
    let mut l = String::from("address,label\n");
    for hub in 0..30 {
        l.push_str(&format!("hub{hub},1\n"));
        for s in 0..8 {
            e.push_str(&format!("w{hub}-{s},hub{hub},{}\n", 10.0 + (s as f64)));
        }
    }
    for w in 0..200 {
        l.push_str(&format!("n{w},0\n"));
        e.push_str(&format!("n{w},n{},0.5\n", (w + 1) % 200));
    }
    std::fs::write(&edges, e).unwrap();
    std::fs::write(&labels, l).unwrap();

    let features = dir.path().join("features.csv");
    let status = qeml()
        .args(["features", "--edges"])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&features)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(features.is_file());

    let split_dir = dir.path().join("split");
    let output = qeml()
        .args(["split", "--features"])
        .arg(&features)
        .arg("--out-dir")
        .arg(&split_dir)
        .args([
            "--seed",
            "3",
            "--train-phishing",
            "10",
            "--train-nonphishing",
            "10",
        ])
        .args(["--test-phishing", "15", "--test-nonphishing", "150"])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(split_dir.join("train.csv").is_file());
    assert!(split_dir.join("test.csv").is_file());

    // train a gbt on the ingested data through a config file
    let runs = dir.path().join("runs");
    let config_path = dir.path().join("exp.toml");
    let config = format!(
        r#"
[dataset]
source = "edges"
edges = "{}"
labels = "{}"

[split]
train_phishing = 10
train_nonphishing = 10
test_phishing = 15
test_nonphishing = 150

[model]
kind = "gbt"
n_rounds = 20
learning_rate = 0.2
max_depth = 2

[run]
seed = 9
repeats = 1
output_dir = "{}"
"#,
        edges.display(),
        labels.display(),
        runs.display()
    );
    std::fs::write(&config_path, config).unwrap();
    let output = qeml()
        .args(["train", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("macro_f1"));

    // locate the run dir and re-evaluate the saved model on the test slice
    let run_dir = std::fs::read_dir(&runs)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let model_path = run_dir.join("seed-9").join("model.json");
    assert!(model_path.is_file());
    let output = qeml()
        .args(["evaluate", "--model"])
        .arg(&model_path)
        .arg("--features")
        .arg(split_dir.join("test.csv"))
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(String::from_utf8_lossy(&output.stdout).contains("macro_f1="));

    // report re-prints the summary
    let output = qeml()
        .args(["report", "--run-dir"])
        .arg(&run_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("seed 9"));
}

#[test]
fn binary_rejects_invalid_config_with_category_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(
        &config_path,
        r#"
[dataset]
source = "synthetic"
n_phishing = 100
n_nonphishing = 1000
seed = 1

[model]
kind = "vqc"
encoder = "z"
ansatz = 25

[run]
seed = 1
output_dir = "nowhere"
"#,
    )
    .unwrap();
    let output = qeml()
        .args(["train", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error[config]"), "stderr: {stderr}");
    assert!(!Path::new("nowhere").exists());
}

#[test]
fn binary_ingest_prints_stats() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    let labels = dir.path().join("l.csv");
    std::fs::write(&edges, "from,to,value\nA,B,2\nB,C,1\n").unwrap();
    std::fs::write(&labels, "address,label\nA,1\n").unwrap();
    let output = qeml()
        .args(["ingest", "--edges"])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("nodes=3"));
    assert!(stdout.contains("edges=2"));
    assert!(stdout.contains("phishing=1"));
}

#[test]
fn malformed_edge_file_maps_to_data_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    let labels = dir.path().join("l.csv");
    std::fs::write(&edges, "from,to,value\nA,B,-5\n").unwrap();
    std::fs::write(&labels, "address,label\n").unwrap();
    let output = qeml()
        .args(["ingest", "--edges"])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error[data]"));
}

#[test]
fn shipped_example_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sample_data");
    let exp = std::fs::read_to_string(root.join("experiment.toml")).unwrap();
    let exp: ExperimentConfig = toml::from_str(&exp).unwrap();
    exp.validate().unwrap();

    let edges = std::fs::read_to_string(root.join("edges_experiment.toml")).unwrap();
    // parse only: the referenced csv paths are relative to the repo root
    let _: ExperimentConfig = toml::from_str(&edges).unwrap();

    let study = std::fs::read_to_string(root.join("study.toml")).unwrap();
    let study: StudyConfig = toml::from_str(&study).unwrap();
    study.validate().unwrap();
    assert_eq!(study.cell_count(), 30);

    let bench = std::fs::read_to_string(root.join("bench.toml")).unwrap();
    let bench: BenchConfig = toml::from_str(&bench).unwrap();
    bench.validate().unwrap();
}

#[test]
fn default_study_grid_is_the_full_114_cells() {
    let config: StudyConfig = toml::from_str(
        r#"
seed = 1
output_dir = "unused"

[dataset]
source = "synthetic"
n_phishing = 100
n_nonphishing = 1000
seed = 1
"#,
    )
    .unwrap();
    assert_eq!(config.circuits.len(), 19);
    assert_eq!(config.layers, vec![1, 2]);
    assert_eq!(config.encoders.len(), 3);
    assert_eq!(config.cell_count(), 114);
}
