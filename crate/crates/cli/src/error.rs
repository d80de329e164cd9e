use thiserror::Error;

use sarcasm_core::augment::AugmentError;
use sarcasm_core::corpus::CorpusError;
use sarcasm_core::embed::EmbedError;
use sarcasm_core::model::ModelError;
use sarcasm_core::preprocess::PreprocessError;
use sarcasm_core::train::TrainError;

/// Command failure; [`CliError::code`] is the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("augmentation error: {0}")]
    Augment(String),
    #[error("training error: {0}")]
    Train(String),
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Checks(_) => 1,
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Augment(_) => 4,
            CliError::Train(_) => 5,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Corpus(c) => c.into(),
            other => CliError::Augment(other.to_string()),
        }
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        match e {
            PreprocessError::Io { .. } => CliError::Input(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(m) => CliError::Config(m),
            other => CliError::Train(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. } => CliError::Input(e.to_string()),
            other => CliError::Train(other.to_string()),
        }
    }
}
