//! Annotated corpus: one row per non-abstention utterance with a label
//! column per (task, run).

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use deceit_core::{GameRecord, PlayerId, UtteranceRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{Backend, ClassifyRequest};
use crate::keys::UtteranceKey;
use crate::AnnotateError;

/// Label reported when a speech-act reply matches no category.
pub const UNCLASSIFIABLE: &str = "Unclassifiable";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    SpeechAct,
    Deception,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::SpeechAct => "speech_act",
            Task::Deception => "deception",
        }
    }

    pub fn column(self, run_id: &str) -> String {
        format!("{}/{run_id}", self.as_str())
    }
}

/// What the deception prompt receives as its discussion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscussionWindow {
    /// The whole transcript of the utterance's meeting.
    #[default]
    Meeting,
    /// The meeting transcript up to and including the utterance.
    MeetingSoFar,
    /// Every meeting of the game up to and including the utterance's.
    Game,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub key: UtteranceKey,
    #[serde(flatten)]
    pub utterance: UtteranceRecord,
    /// Column `"<task>/<run_id>"` → label name.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

/// Labels one backend produced for one task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRun {
    pub run_id: String,
    pub backend: String,
    pub task: Task,
    pub labels: BTreeMap<UtteranceKey, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub run_id: String,
    pub backend: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedCorpus {
    pub runs: Vec<RunInfo>,
    pub rows: Vec<AnnotatedUtterance>,
}

impl AnnotatedCorpus {
    /// Rows for every non-abstention utterance, unlabelled.
    pub fn from_records(records: &[GameRecord]) -> Self {
        let rows = records
            .iter()
            .flat_map(|r| r.utterances())
            .filter(|u| !u.is_abstention())
            .map(|u| AnnotatedUtterance {
                key: UtteranceKey::of(u),
                utterance: u.clone(),
                labels: BTreeMap::new(),
            })
            .collect();
        AnnotatedCorpus { runs: Vec::new(), rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn run_ids(&self) -> Vec<String> {
        self.runs.iter().map(|r| r.run_id.clone()).collect()
    }

    /// The labels of one (task, run) column.
    pub fn run(&self, task: Task, run_id: &str) -> AnnotationRun {
        let column = task.column(run_id);
        let backend = self
            .runs
            .iter()
            .find(|r| r.run_id == run_id)
            .map(|r| r.backend.clone())
            .unwrap_or_default();
        AnnotationRun {
            run_id: run_id.to_string(),
            backend,
            task,
            labels: self
                .rows
                .iter()
                .filter_map(|r| r.labels.get(&column).map(|l| (r.key.clone(), l.clone())))
                .collect(),
        }
    }

    /// Labels every row with `backend` under `run_id`, in parallel.
    pub fn annotate(
        &mut self,
        records: &[GameRecord],
        backend: &dyn Backend,
        run_id: &str,
        tasks: &[Task],
        window: DiscussionWindow,
    ) {
        let contexts = DiscussionIndex::new(records);
        let sa_col = Task::SpeechAct.column(run_id);
        let de_col = Task::Deception.column(run_id);
        self.rows.par_iter_mut().for_each(|row| {
            let discussion = if tasks.contains(&Task::Deception) {
                contexts.discussion(&row.utterance, window)
            } else {
                String::new()
            };
            let req = ClassifyRequest {
                key: &row.key,
                text: &row.utterance.text,
                discussion: &discussion,
            };
            if tasks.contains(&Task::SpeechAct) {
                let label = backend
                    .speech_act(&req)
                    .map(|l| l.as_str().to_string())
                    .unwrap_or_else(|| UNCLASSIFIABLE.to_string());
                row.labels.insert(sa_col.clone(), label);
            }
            if tasks.contains(&Task::Deception) {
                row.labels
                    .insert(de_col.clone(), backend.deception(&req).as_str().to_string());
            }
        });
        self.runs.retain(|r| r.run_id != run_id);
        self.runs.push(RunInfo {
            run_id: run_id.to_string(),
            backend: backend.id(),
        });
    }

    /// Writes rows as JSONL and run metadata to `<path>.runs.json`.
    pub fn write(&self, path: &Path) -> Result<(), AnnotateError> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        for row in &self.rows {
            serde_json::to_writer(&mut out, row)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        std::fs::write(runs_path(path), serde_json::to_string_pretty(&self.runs)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, AnnotateError> {
        let file = BufReader::new(std::fs::File::open(path)?);
        let mut rows = Vec::new();
        for (i, line) in file.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: AnnotatedUtterance = serde_json::from_str(&line).map_err(|e| AnnotateError::Corpus {
                line: i + 1,
                reason: e.to_string(),
            })?;
            rows.push(row);
        }
        let runs_file = runs_path(path);
        let runs = if runs_file.exists() {
            serde_json::from_str(&std::fs::read_to_string(runs_file)?)?
        } else {
            let mut ids: Vec<String> = rows
                .iter()
                .flat_map(|r| r.labels.keys())
                .filter_map(|c| c.split_once('/').map(|(_, id)| id.to_string()))
                .collect();
            ids.sort();
            ids.dedup();
            ids.into_iter()
                .map(|run_id| RunInfo {
                    run_id,
                    backend: String::new(),
                })
                .collect()
        };
        Ok(AnnotatedCorpus { runs, rows })
    }
}

fn runs_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".runs.json");
    path.with_file_name(name)
}

/// Meeting transcripts of each game, for building discussion context.
struct DiscussionIndex<'a> {
    games: BTreeMap<&'a str, &'a GameRecord>,
}

impl<'a> DiscussionIndex<'a> {
    fn new(records: &'a [GameRecord]) -> Self {
        DiscussionIndex {
            games: records.iter().map(|r| (r.game_id.as_str(), r)).collect(),
        }
    }

    fn discussion(&self, u: &UtteranceRecord, window: DiscussionWindow) -> String {
        let Some(record) = self.games.get(u.game_id.as_str()) else {
            return String::new();
        };
        let name = |id: PlayerId| {
            record
                .players
                .iter()
                .find(|p| p.id == id)
                .map(|p| p.name.clone())
                .unwrap_or_else(|| id.to_string())
        };
        let position = |x: &UtteranceRecord| (x.meeting_index, x.discussion_round);
        record
            .utterances()
            .filter(|x| !x.is_abstention())
            .filter(|x| match window {
                DiscussionWindow::Meeting => x.meeting_index == u.meeting_index,
                DiscussionWindow::MeetingSoFar => x.meeting_index == u.meeting_index && position(x) <= position(u),
                DiscussionWindow::Game => x.meeting_index <= u.meeting_index,
            })
            .map(|x| format!("{}: {}", name(x.speaker_id), x.text))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
