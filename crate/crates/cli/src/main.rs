use clap::{Parser, Subcommand};
use qeml_cli::bench::run_timing_benchmark;
use qeml_cli::config::{BenchConfig, ExperimentConfig, StudyConfig};
use qeml_cli::error::CliError;
use qeml_cli::runner::{run_experiment, RunSummary};
use qeml_cli::study::run_ansatz_study;
use qeml_core::data::{extract_features, ingest_edges, sample_split, NodeFeatureTable, SplitSpec};
use qeml_core::eval::{classification_report, false_positive_count};
use qeml_core::model::classifier_from_json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "qeml",
    about = "Quantum-classical ensemble ML for transaction-graph phishing detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an edge list + labels file and print graph statistics.
    Ingest {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Extract the seven per-node features into a CSV table.
    Features {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a deterministic class-imbalanced train/test split.
    Split {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 160)]
        train_phishing: usize,
        #[arg(long, default_value_t = 160)]
        train_nonphishing: usize,
        #[arg(long, default_value_t = 1000)]
        test_phishing: usize,
        #[arg(long, default_value_t = 10000)]
        test_nonphishing: usize,
    },
    /// Run a configured experiment: train, evaluate, and write reports.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a saved model file against a feature table.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Run the (circuit x encoder x layers) ansatz study grid.
    AnsatzStudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Benchmark training time against training-set size.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-print the mean metrics table of a finished run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error[{}]: {e}", e.category());
        std::process::exit(e.exit_code());
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { edges, labels } => {
            let (graph, labels) = ingest_edges(&edges, &labels)?;
            let phishing = labels.values().filter(|&&l| l == 1).count();
            println!(
                "nodes={} edges={} labeled={} phishing={}",
                graph.n_nodes(),
                graph.n_edges(),
                labels.len(),
                phishing
            );
            Ok(())
        }
        Command::Features { edges, labels, out } => {
            let (graph, labels) = ingest_edges(&edges, &labels)?;
            let table = extract_features(&graph, &labels);
            table.write_csv(&out)?;
            println!("wrote {} rows to {}", table.len(), out.display());
            Ok(())
        }
        Command::Split {
            features,
            out_dir,
            seed,
            train_phishing,
            train_nonphishing,
            test_phishing,
            test_nonphishing,
        } => {
            let table = NodeFeatureTable::read_csv(&features)?;
            let spec = SplitSpec {
                train_phishing,
                train_nonphishing,
                test_phishing,
                test_nonphishing,
                seed,
            };
            let split = sample_split(&table, &spec)?;
            std::fs::create_dir_all(&out_dir)?;
            split.train.write_csv(&out_dir.join("train.csv"))?;
            split.test.write_csv(&out_dir.join("test.csv"))?;
            println!(
                "train={} test={} scaled={}",
                split.train.len(),
                split.test.len(),
                split.scaled
            );
            Ok(())
        }
        Command::Train { config } => {
            let config = ExperimentConfig::load(&config)?;
            let (run, dir) = run_experiment(&config)?;
            print_run(&run);
            println!("artifacts: {}", dir.display());
            Ok(())
        }
        Command::Evaluate { model, features } => {
            let text = std::fs::read_to_string(&model)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let clf = classifier_from_json(&value)?;
            let table = NodeFeatureTable::read_csv(&features)?;
            let data = table.to_dataset()?;
            let preds = clf.predict_batch(data.features())?;
            let report = classification_report(data.labels(), &preds)?;
            let fp = false_positive_count(data.labels(), &preds)?;
            println!(
                "macro_p={:.4} macro_r={:.4} macro_f1={:.4} phishing_f1={:.4} false_positives={fp}",
                report.macro_precision, report.macro_recall, report.macro_f1, report.phishing.f1
            );
            Ok(())
        }
        Command::AnsatzStudy { config } => {
            let config = StudyConfig::load(&config)?;
            let (output, dir) = run_ansatz_study(&config)?;
            println!(
                "completed {} cells; tables under {}",
                output.rows.len(),
                dir.display()
            );
            Ok(())
        }
        Command::Bench { config } => {
            let config = BenchConfig::load(&config)?;
            let (rows, dir) = run_timing_benchmark(&config)?;
            for r in &rows {
                println!("{} size={} seconds={:.3}", r.model, r.size, r.seconds);
            }
            println!("timing table under {}", dir.display());
            Ok(())
        }
        Command::Report { run_dir } => {
            let text = std::fs::read_to_string(run_dir.join("summary.json"))?;
            let run: RunSummary = serde_json::from_str(&text)?;
            print_run(&run);
            Ok(())
        }
    }
}

fn print_run(run: &RunSummary) {
    for s in &run.seeds {
        println!(
            "seed {}: model={} macro_f1={:.4} phishing_f1={:.4} false_positives={}",
            s.seed, s.model, s.report.macro_f1, s.report.phishing.f1, s.false_positives
        );
    }
    if run.seeds.len() > 1 {
        println!(
            "mean: macro_f1={:.4} phishing_f1={:.4}",
            run.mean(|s| s.report.macro_f1),
            run.mean(|s| s.report.phishing.f1)
        );
    }
}
