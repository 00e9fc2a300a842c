//! Labels a corpus directory with repeated classifier runs and measures how
//! stable the labels are across runs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use deceit_agents::{ChatClient, ChatEndpointConfig};
use deceit_annotate::{
    stability, AnnotatedCorpus, Backend, ChatBackend, DiscussionWindow, ReplayBackend, RuleBackend,
    StabilityReport, Task, UtteranceKey,
};
use serde::{Deserialize, Serialize};

use crate::run::load_corpus;
use crate::HarnessError;

pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const STABILITY_FILE: &str = "stability.json";

/// Number of runs the stability report compares.
pub const STABILITY_RUNS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum BackendSpec {
    Rules,
    /// Labels from an earlier annotation file. Run `i` replays the source's
    /// `i`-th run, or its last run when it has fewer.
    Replay { source: PathBuf },
    Chat { endpoint: ChatEndpointConfig },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationOutcome {
    pub path: PathBuf,
    /// Runs labelled by this call.
    pub labelled: Vec<String>,
    /// Runs already complete on disk and left alone.
    pub resumed: Vec<String>,
    pub stability: Option<BTreeMap<Task, StabilityReport>>,
    pub notice: Option<String>,
}

pub fn run_id(i: usize) -> String {
    format!("run{i}")
}

fn complete(corpus: &AnnotatedCorpus, id: &str) -> bool {
    let cols = [Task::SpeechAct.column(id), Task::Deception.column(id)];
    corpus.runs.iter().any(|r| r.run_id == id)
        && corpus.rows.iter().all(|row| cols.iter().all(|c| row.labels.contains_key(c)))
}

fn keys(corpus: &AnnotatedCorpus) -> BTreeSet<&UtteranceKey> {
    corpus.rows.iter().map(|r| &r.key).collect()
}

/// Annotates every utterance of the corpus at `corpus_dir` `runs` times,
/// saving `annotations.jsonl` in `out_dir` after every run. Complete runs
/// already in that file are kept, so an interrupted call can be repeated.
/// With exactly three runs, `stability.json` is written as well.
pub fn annotate_corpus(
    corpus_dir: &Path,
    out_dir: &Path,
    backend: &BackendSpec,
    runs: usize,
    window: DiscussionWindow,
) -> Result<AnnotationOutcome, HarnessError> {
    let records = load_corpus(corpus_dir)?;
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Unwritable {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let path = out_dir.join(ANNOTATIONS_FILE);
    let fresh = AnnotatedCorpus::from_records(&records);
    let mut corpus = if path.exists() {
        let saved = AnnotatedCorpus::read(&path)?;
        if keys(&saved) != keys(&fresh) {
            return Err(HarnessError::Misaligned(format!(
                "{} was made from a different corpus",
                path.display()
            )));
        }
        saved
    } else {
        fresh
    };

    let replay_source = match backend {
        BackendSpec::Replay { source } => Some(AnnotatedCorpus::read(source)?),
        _ => None,
    };
    let chat_client = match backend {
        BackendSpec::Chat { endpoint } => {
            Some(ChatClient::new(endpoint.clone()).map_err(|e| HarnessError::Agents(e.to_string()))?)
        }
        _ => None,
    };

    let tasks = [Task::SpeechAct, Task::Deception];
    let mut outcome = AnnotationOutcome {
        path: path.clone(),
        labelled: Vec::new(),
        resumed: Vec::new(),
        stability: None,
        notice: None,
    };
    for i in 1..=runs {
        let id = run_id(i);
        if complete(&corpus, &id) {
            outcome.resumed.push(id);
            continue;
        }
        match (backend, &replay_source, &chat_client) {
            (BackendSpec::Replay { .. }, Some(source), _) => {
                let ids = source.run_ids();
                let Some(from) = ids.get(i - 1).or(ids.last()) else {
                    return Err(HarnessError::Misaligned("replay source has no runs".into()));
                };
                let b = ReplayBackend::from_corpus(source, from);
                corpus.annotate(&records, &b, &id, &tasks, window);
            }
            (BackendSpec::Chat { endpoint }, _, Some(client)) => {
                let b = ChatBackend::new(client.clone(), endpoint.model_name.clone());
                corpus.annotate(&records, &b, &id, &tasks, window);
                if b.failures() > 0 {
                    // Keep the labels that did arrive but leave the run
                    // unregistered so the next call repeats it.
                    corpus.runs.retain(|r| r.run_id != id);
                    corpus.write(&path)?;
                    return Err(HarnessError::BackendUnavailable {
                        run_id: id,
                        failures: b.failures(),
                        saved: path,
                    });
                }
            }
            _ => {
                let b: &dyn Backend = &RuleBackend;
                corpus.annotate(&records, b, &id, &tasks, window);
            }
        }
        corpus.write(&path)?;
        outcome.labelled.push(id);
    }

    if runs == STABILITY_RUNS {
        let mut reports = BTreeMap::new();
        for task in tasks {
            let runs: Vec<_> = (1..=runs).map(|i| corpus.run(task, &run_id(i))).collect();
            reports.insert(task, stability(&runs)?);
        }
        let stability_path = out_dir.join(STABILITY_FILE);
        let mut json = serde_json::to_string_pretty(&reports)?;
        json.push('\n');
        std::fs::write(&stability_path, json).map_err(HarnessError::io(&stability_path))?;
        outcome.stability = Some(reports);
    } else {
        outcome.notice = Some(format!(
            "stability skipped: it compares exactly {STABILITY_RUNS} runs, {runs} requested"
        ));
    }
    Ok(outcome)
}
