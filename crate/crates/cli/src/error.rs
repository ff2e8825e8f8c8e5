//! Error categories with machine-readable names and stable exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] qeml_core::data::DataError),
    #[error(transparent)]
    Model(#[from] qeml_core::model::ModelError),
    #[error(transparent)]
    Ansatz(#[from] qeml_core::ansatz::AnsatzError),
    #[error(transparent)]
    Eval(#[from] qeml_core::eval::EvalError),
    #[error(transparent)]
    Metric(#[from] qeml_core::metrics::MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Serialization(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Model(_) | CliError::Ansatz(_) => "model",
            CliError::Eval(_) | CliError::Metric(_) => "eval",
            CliError::Io(_) => "io",
            CliError::Serialization(_) => "serialization",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) | CliError::Ansatz(_) => 4,
            CliError::Io(_) => 5,
            CliError::Eval(_) | CliError::Metric(_) => 6,
            CliError::Serialization(_) => 7,
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialization(e.to_string())
    }
}
