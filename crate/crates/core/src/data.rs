//! Transaction-graph ingestion, the seven statistical node features,
//! class-imbalanced splits, and a synthetic generator calibrated to the
//! snapshot's per-class feature statistics.
//!
//! The graph is a directed multigraph: parallel edges are kept, so degree
//! counts transactions while `neighbors` counts distinct adjacent addresses
//! regardless of direction. Self-loops count toward degree and strength but
//! not neighbors.

use crate::model::{Dataset, Label, ModelError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("negative transaction value {value} at line {line}")]
    NegativeValue { line: u64, value: f64 },
    #[error("conflicting labels for address {0}")]
    ConflictingLabel(String),
    #[error("phishing pool has {available} nodes; at least {minimum} required")]
    InsufficientPhishing { available: usize, minimum: usize },
    #[error("{0}")]
    PoolTooSmall(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Minimum phishing pool accepted by the splitter.
pub const MIN_PHISHING_POOL: usize = 20;

/// Directed multigraph of value transfers between addresses.
#[derive(Clone, Debug, Default)]
pub struct TransactionGraph {
    addresses: Vec<String>,
    index: BTreeMap<String, usize>,
    /// (from, to, value); parallel edges are kept as-is.
    edges: Vec<(usize, usize, f64)>,
}

impl TransactionGraph {
    pub fn n_nodes(&self) -> usize {
        self.addresses.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn addresses(&self) -> &[String] {
        &self.addresses
    }

    fn node(&mut self, address: &str) -> usize {
        if let Some(&i) = self.index.get(address) {
            return i;
        }
        let i = self.addresses.len();
        self.addresses.push(address.to_string());
        self.index.insert(address.to_string(), i);
        i
    }

    pub fn add_edge(&mut self, from: &str, to: &str, value: f64) {
        let f = self.node(from);
        let t = self.node(to);
        self.edges.push((f, t, value));
    }

    pub fn add_node(&mut self, address: &str) {
        self.node(address);
    }
}

/// Read a `from,to,value` edge file and an `address,label` file with label
/// in {0, 1}, 1 = phishing. Unlabeled addresses default to non-phishing;
/// labeled addresses without edges become isolated nodes.
pub fn ingest_edges(
    edges_path: &Path,
    labels_path: &Path,
) -> Result<(TransactionGraph, BTreeMap<String, Label>), DataError> {
    let mut graph = TransactionGraph::default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(edges_path)?;
    for result in reader.records() {
        let record = result.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, csv::Position::line),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 3 {
            return Err(DataError::Parse {
                line,
                message: format!("expected 3 columns (from,to,value), got {}", record.len()),
            });
        }
        let value: f64 = record[2].trim().parse().map_err(|_| DataError::Parse {
            line,
            message: format!("bad value `{}`", &record[2]),
        })?;
        if !value.is_finite() {
            return Err(DataError::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        if value < 0.0 {
            return Err(DataError::NegativeValue { line, value });
        }
        graph.add_edge(record[0].trim(), record[1].trim(), value);
    }

    let mut labels: BTreeMap<String, Label> = BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(labels_path)?;
    for result in reader.records() {
        let record = result.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, csv::Position::line),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 2 {
            return Err(DataError::Parse {
                line,
                message: format!("expected 2 columns (address,label), got {}", record.len()),
            });
        }
        let address = record[0].trim().to_string();
        let label: Label = match record[1].trim() {
            "0" => -1,
            "1" => 1,
            other => {
                return Err(DataError::Parse {
                    line,
                    message: format!("label must be 0 or 1, got `{other}`"),
                })
            }
        };
        if let Some(&existing) = labels.get(&address) {
            if existing != label {
                return Err(DataError::ConflictingLabel(address));
            }
        } else {
            labels.insert(address.clone(), label);
            graph.add_node(&address);
        }
    }
    Ok((graph, labels))
}

/// Per-address feature row. Ingested degrees are integral-valued; the
/// synthesizer produces continuous rates with the same identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatureRow {
    pub address: String,
    pub in_degree: f64,
    pub out_degree: f64,
    pub degree: f64,
    pub in_strength: f64,
    pub out_strength: f64,
    pub strength: f64,
    pub neighbors: f64,
    pub label: Label,
}

impl NodeFeatureRow {
    /// The seven features in canonical column order.
    pub fn feature_vector(&self) -> Vec<f64> {
        vec![
            self.in_degree,
            self.out_degree,
            self.degree,
            self.in_strength,
            self.out_strength,
            self.strength,
            self.neighbors,
        ]
    }
}

pub const FEATURE_NAMES: [&str; 7] = [
    "in_degree",
    "out_degree",
    "degree",
    "in_strength",
    "out_strength",
    "strength",
    "neighbors",
];

/// Rows sorted by address, so the table is independent of edge-file order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatureTable {
    pub rows: Vec<NodeFeatureRow>,
}

impl NodeFeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count_with_label(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn to_dataset(&self) -> Result<Dataset, DataError> {
        let features = self
            .rows
            .iter()
            .map(NodeFeatureRow::feature_vector)
            .collect();
        let labels = self.rows.iter().map(|r| r.label).collect();
        Ok(Dataset::new(features, labels)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let mut out = std::fs::File::create(path)?;
        writeln!(
            out,
            "address,in_degree,out_degree,degree,in_strength,out_strength,strength,neighbors,label"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.address,
                r.in_degree,
                r.out_degree,
                r.degree,
                r.in_strength,
                r.out_strength,
                r.strength,
                r.neighbors,
                if r.label == 1 { 1 } else { 0 }
            )?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)?;
        let mut rows = Vec::new();
        for result in reader.records() {
            let record = result.map_err(|e| DataError::Parse {
                line: e.position().map_or(0, csv::Position::line),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, csv::Position::line);
            if record.len() != 9 {
                return Err(DataError::Parse {
                    line,
                    message: format!("expected 9 columns, got {}", record.len()),
                });
            }
            let num = |i: usize| -> Result<f64, DataError> {
                record[i].trim().parse().map_err(|_| DataError::Parse {
                    line,
                    message: format!("bad number `{}`", &record[i]),
                })
            };
            rows.push(NodeFeatureRow {
                address: record[0].trim().to_string(),
                in_degree: num(1)?,
                out_degree: num(2)?,
                degree: num(3)?,
                in_strength: num(4)?,
                out_strength: num(5)?,
                strength: num(6)?,
                neighbors: num(7)?,
                label: if record[8].trim() == "1" { 1 } else { -1 },
            });
        }
        Ok(NodeFeatureTable { rows })
    }
}

/// Aggregate the seven statistical features for every node in one pass.
pub fn extract_features(
    graph: &TransactionGraph,
    labels: &BTreeMap<String, Label>,
) -> NodeFeatureTable {
    let n = graph.n_nodes();
    let mut in_degree = vec![0u64; n];
    let mut out_degree = vec![0u64; n];
    let mut in_strength = vec![0.0f64; n];
    let mut out_strength = vec![0.0f64; n];
    let mut adjacent: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(from, to, value) in &graph.edges {
        out_degree[from] += 1;
        in_degree[to] += 1;
        out_strength[from] += value;
        in_strength[to] += value;
        if from != to {
            adjacent[from].insert(to);
            adjacent[to].insert(from);
        }
    }

    let mut rows: Vec<NodeFeatureRow> = (0..n)
        .map(|i| {
            let address = graph.addresses[i].clone();
            let label = labels.get(&address).copied().unwrap_or(-1);
            NodeFeatureRow {
                address,
                in_degree: in_degree[i] as f64,
                out_degree: out_degree[i] as f64,
                degree: (in_degree[i] + out_degree[i]) as f64,
                in_strength: in_strength[i],
                out_strength: out_strength[i],
                strength: in_strength[i] + out_strength[i],
                neighbors: adjacent[i].len() as f64,
                label,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.address.cmp(&b.address));
    NodeFeatureTable { rows }
}

/// Split sizes with the snapshot defaults: 160p-160np training and
/// 1000p-10000np testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_phishing: usize,
    pub train_nonphishing: usize,
    pub test_phishing: usize,
    pub test_nonphishing: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            train_phishing: 160,
            train_nonphishing: 160,
            test_phishing: 1000,
            test_nonphishing: 10000,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplitOutcome {
    pub train: NodeFeatureTable,
    pub test: NodeFeatureTable,
    /// Set when the pool could not support the requested counts and every
    /// count was scaled down proportionally.
    pub scaled: bool,
}

/// Draw disjoint train/test node sets with exact per-class counts. When the
/// pool is too small the counts shrink proportionally (ratios preserved to
/// within flooring) and a warning is logged.
pub fn sample_split(table: &NodeFeatureTable, spec: &SplitSpec) -> Result<SplitOutcome, DataError> {
    let pos: Vec<usize> = (0..table.len())
        .filter(|&i| table.rows[i].label == 1)
        .collect();
    let neg: Vec<usize> = (0..table.len())
        .filter(|&i| table.rows[i].label == -1)
        .collect();
    if pos.len() < MIN_PHISHING_POOL {
        return Err(DataError::InsufficientPhishing {
            available: pos.len(),
            minimum: MIN_PHISHING_POOL,
        });
    }
    let need_p = spec.train_phishing + spec.test_phishing;
    let need_np = spec.train_nonphishing + spec.test_nonphishing;
    let scale = 1.0f64
        .min(pos.len() as f64 / need_p as f64)
        .min(neg.len() as f64 / need_np as f64);
    let train_p = ((spec.train_phishing as f64) * scale).floor() as usize;
    if train_p == 0 {
        return Err(DataError::PoolTooSmall(format!(
            "pool ({}p/{}np) cannot support even a scaled-down split",
            pos.len(),
            neg.len()
        )));
    }
    let factor = train_p as f64 / spec.train_phishing as f64;
    let train_np = ((spec.train_nonphishing as f64) * factor).floor() as usize;
    let test_p = ((spec.test_phishing as f64) * factor).floor() as usize;
    let test_np = ((spec.test_nonphishing as f64) * factor).floor() as usize;
    let scaled = scale < 1.0;
    if scaled {
        log::warn!(
            "split pool too small; scaled to {train_p}p/{train_np}np train, {test_p}p/{test_np}np test"
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pos = pos;
    let mut neg = neg;
    rand::seq::SliceRandom::shuffle(pos.as_mut_slice(), &mut rng);
    rand::seq::SliceRandom::shuffle(neg.as_mut_slice(), &mut rng);

    let take = |ids: &[usize]| NodeFeatureTable {
        rows: ids.iter().map(|&i| table.rows[i].clone()).collect(),
    };
    let mut train_ids: Vec<usize> = pos[..train_p].to_vec();
    train_ids.extend_from_slice(&neg[..train_np]);
    let mut test_ids: Vec<usize> = pos[train_p..train_p + test_p].to_vec();
    test_ids.extend_from_slice(&neg[train_np..train_np + test_np]);

    Ok(SplitOutcome {
        train: take(&train_ids),
        test: take(&test_ids),
        scaled,
    })
}

/// Per-class (mean, standard deviation) pairs for the four sampled
/// features, from the snapshot statistics. Degree, strength, and neighbors
/// are derived, not sampled: degree = in + out (so its class means
/// 51.8862/9.1459 follow), strength = in_strength + out_strength
/// (165.3465/81.7880), and neighbors is uniform on [1, degree].
pub const PHISHING_FEATURE_STATS: [(f64, f64); 4] = [
    (31.3956, 180.9905), // in_degree
    (20.4905, 96.8388),  // out_degree
    (78.6105, 691.2912), // in_strength
    (86.7360, 860.1017), // out_strength
];

pub const NONPHISHING_FEATURE_STATS: [(f64, f64); 4] = [
    (4.5020, 154.3505),
    (4.6438, 101.3266),
    (72.5328, 4409.6850),
    (9.2551, 281.0234),
];

fn lognormal_for(mean: f64, std: f64) -> LogNormal<f64> {
    // Log-normal with exactly the requested mean and standard deviation:
    // sigma^2 = ln(1 + (std/mean)^2), mu = ln(mean) - sigma^2 / 2.
    let sigma_sq = (1.0 + (std / mean).powi(2)).ln();
    let mu = mean.ln() - sigma_sq / 2.0;
    LogNormal::new(mu, sigma_sq.sqrt()).expect("finite parameters")
}

/// One synthetic node of the given class.
fn synth_row(
    stats: &[(f64, f64); 4],
    label: Label,
    address: String,
    rng: &mut ChaCha8Rng,
) -> NodeFeatureRow {
    let draw: Vec<f64> = stats
        .iter()
        .map(|&(m, s)| lognormal_for(m, s).sample(rng))
        .collect();
    let (in_degree, out_degree, in_strength, out_strength) = (draw[0], draw[1], draw[2], draw[3]);
    let degree = in_degree + out_degree;
    let neighbors = if degree >= 1.0 {
        rng.random_range(1..=(degree as u64)) as f64
    } else {
        0.0
    };
    NodeFeatureRow {
        address,
        in_degree,
        out_degree,
        degree,
        in_strength,
        out_strength,
        strength: in_strength + out_strength,
        neighbors,
        label,
    }
}

/// Generate a labeled feature table with heavy-tailed per-class marginals
/// matching the snapshot statistics.
pub fn synth_dataset(n_phishing: usize, n_nonphishing: usize, seed: u64) -> NodeFeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_phishing + n_nonphishing);
    for i in 0..n_phishing {
        rows.push(synth_row(
            &PHISHING_FEATURE_STATS,
            1,
            format!("p-{i:06}"),
            &mut rng,
        ));
    }
    for i in 0..n_nonphishing {
        rows.push(synth_row(
            &NONPHISHING_FEATURE_STATS,
            -1,
            format!("np-{i:06}"),
            &mut rng,
        ));
    }
    NodeFeatureTable { rows }
}
