use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("label sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no labels to compare")]
    Empty,
    #[error("stability needs exactly 3 runs, got {0}")]
    RunCount(usize),
    #[error("runs cover different utterances; missing keys: {}", .0.join(", "))]
    Coverage(Vec<String>),
    #[error("malformed annotated corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
