//! Batch experiments over the deduction game: run plans into a corpus,
//! annotate its utterances, and compute the report tables and figures.

pub mod analysis;
pub mod annotation;
mod error;
pub mod export;
pub mod plan;
pub mod pretty;
pub mod run;
pub mod svg;
pub mod synthetic;

pub use analysis::{analyze, AnalysisReport, Section};
pub use annotation::{annotate_corpus, AnnotationOutcome, BackendSpec};
pub use error::HarnessError;
pub use export::{report_json, write_report};
pub use plan::{game_seed, ExperimentPlan, PlanEntry, RosterSpec};
pub use run::{load_corpus, run_experiment, run_experiment_with, ExperimentSummary, FailedGame, OutcomeCounts};
pub use synthetic::{planted_corpus, PlantedEffects};

use std::path::Path;

use deceit_annotate::AnnotatedCorpus;

/// Reads a corpus and, if given, the annotation file in `annotations_dir`,
/// analyzes them and writes the report under `out_dir`.
pub fn analyze_dirs(corpus_dir: &Path, annotations_dir: Option<&Path>, out_dir: &Path) -> Result<AnalysisReport, HarnessError> {
    let records = load_corpus(corpus_dir)?;
    let annotations = match annotations_dir {
        Some(dir) => {
            let path = if dir.is_file() { dir.to_path_buf() } else { dir.join(annotation::ANNOTATIONS_FILE) };
            Some(AnnotatedCorpus::read(&path)?)
        }
        None => None,
    };
    let report = analyze(&records, annotations.as_ref())?;
    write_report(&report, out_dir)?;
    Ok(report)
}
