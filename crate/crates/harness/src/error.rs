use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("output directory {path} is not writable: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build agents: {0}")]
    Agents(String),
    #[error("{path}:{line}: {reason}")]
    Corpus { path: PathBuf, line: usize, reason: String },
    #[error("annotations do not match the corpus: {0}")]
    Misaligned(String),
    #[error("backend failed on {failures} requests during {run_id}; completed runs are saved in {saved}")]
    BackendUnavailable {
        run_id: String,
        failures: usize,
        saved: PathBuf,
    },
    #[error(transparent)]
    Annotate(#[from] deceit_annotate::AnnotateError),
    #[error(transparent)]
    Core(#[from] deceit_core::CoreError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}
