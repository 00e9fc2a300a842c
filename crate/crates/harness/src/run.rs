//! Runs an experiment plan into a corpus directory.
//!
//! Layout of a corpus directory:
//!
//! ```text
//! games/<label>/<rep>.json    one game per file, written atomically
//! failed/<label>/<rep>.json   error report for a game that crashed
//! <label>.jsonl               every finished game of a configuration, in repetition order
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use deceit_agents::{scripted_roster, ChatClient, LlmAgent, RoleInstructions, ScriptedProfile};
use deceit_core::engine::{new_game_with_id, play};
use deceit_core::{GameConfig, GameRecord, Outcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plan::{game_seed, ExperimentPlan, PlanEntry, RosterSpec};
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedGame {
    pub label: String,
    pub repetition: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub crew_wins: usize,
    pub impostor_wins: usize,
    pub timeouts: usize,
}

impl OutcomeCounts {
    pub fn add(&mut self, outcome: &Outcome) {
        match outcome {
            Outcome::CrewWin(_) => self.crew_wins += 1,
            Outcome::ImpostorWin(_) => self.impostor_wins += 1,
            Outcome::Timeout => self.timeouts += 1,
        }
    }

    pub fn games(&self) -> usize {
        self.crew_wins + self.impostor_wins + self.timeouts
    }
}

/// What one call to [`run_experiment`] did.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub planned: usize,
    pub generated: usize,
    /// Games whose file already existed.
    pub skipped: usize,
    pub failed: Vec<FailedGame>,
    /// Outcomes of every game now on disk, by configuration label.
    pub outcomes: BTreeMap<String, OutcomeCounts>,
}

enum Roster {
    Scripted(ScriptedProfile),
    Chat {
        client: ChatClient,
        instructions: Arc<RoleInstructions>,
        window: usize,
    },
}

impl Roster {
    fn build(spec: &RosterSpec) -> Result<Roster, HarnessError> {
        Ok(match spec {
            RosterSpec::Scripted { profile } => Roster::Scripted(*profile),
            RosterSpec::Chat {
                endpoint,
                history_window,
            } => Roster::Chat {
                client: ChatClient::new(endpoint.clone()).map_err(|e| HarnessError::Agents(e.to_string()))?,
                instructions: Arc::new(RoleInstructions::default()),
                window: *history_window,
            },
        })
    }

    fn play(&self, config: GameConfig, game_id: String) -> Result<GameRecord, deceit_core::CoreError> {
        let mut state = new_game_with_id(config, game_id)?;
        let players = state.config.num_players();
        match self {
            Roster::Scripted(profile) => {
                let mut agents = scripted_roster(*profile, &state.config.map, players, state.config.seed);
                play(&mut state, &mut agents)?;
            }
            Roster::Chat {
                client,
                instructions,
                window,
            } => {
                let mut agents: Vec<_> = (0..players)
                    .map(|_| LlmAgent::new(client.clone(), instructions.clone(), *window))
                    .collect();
                play(&mut state, &mut agents)?;
            }
        }
        Ok(state.into_record())
    }
}

pub fn game_path(dir: &Path, label: &str, repetition: usize) -> PathBuf {
    dir.join("games").join(label).join(format!("{repetition:04}.json"))
}

fn failed_path(dir: &Path, label: &str, repetition: usize) -> PathBuf {
    dir.join("failed").join(label).join(format!("{repetition:04}.json"))
}

pub fn consolidated_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("{label}.jsonl"))
}

/// Writes through a temporary sibling and renames, so an interrupted run
/// never leaves a half-written file that a resume would trust.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
    }
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(HarnessError::io(&tmp))?;
    std::fs::rename(&tmp, path).map_err(HarnessError::io(path))
}

fn ensure_writable(dir: &Path) -> Result<(), HarnessError> {
    let unwritable = |source| HarnessError::Unwritable {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(unwritable)?;
    std::fs::remove_file(&probe).map_err(unwritable)
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".to_string()
    }
}

struct Job<'a> {
    index: usize,
    entry: &'a PlanEntry,
    repetition: usize,
}

enum JobResult {
    Skipped,
    Generated,
    Failed(FailedGame),
}

/// Plays every game of `plan` that is not already on disk, on `workers`
/// threads (0 = one per core), then rebuilds the per-configuration files.
pub fn run_experiment(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentSummary, HarnessError> {
    let roster = Roster::build(&plan.roster)?;
    run_experiment_with(plan, workers, |config, game_id| roster.play(config, game_id))
}

/// [`run_experiment`] with a caller-supplied way to play one game; the
/// plan's roster is ignored.
pub fn run_experiment_with<F>(plan: &ExperimentPlan, workers: usize, play_game: F) -> Result<ExperimentSummary, HarnessError>
where
    F: Fn(GameConfig, String) -> Result<GameRecord, deceit_core::CoreError> + Sync,
{
    plan.validate()?;
    let dir = plan.output_dir.as_path();
    ensure_writable(dir)?;

    let jobs: Vec<Job> = plan
        .configs
        .iter()
        .enumerate()
        .flat_map(|(index, entry)| {
            (0..entry.repetitions).map(move |repetition| Job {
                index,
                entry,
                repetition,
            })
        })
        .collect();

    let run_job = |job: &Job| -> Result<JobResult, HarnessError> {
        let label = job.entry.label();
        let path = game_path(dir, &label, job.repetition);
        if path.exists() {
            return Ok(JobResult::Skipped);
        }
        let seed = game_seed(plan.base_seed, job.index, job.repetition);
        let config = job.entry.config.clone().with_seed(seed);
        let game_id = format!("{label}-{:04}", job.repetition);
        let played = catch_unwind(AssertUnwindSafe(|| play_game(config, game_id)));
        let failure = match played {
            Ok(Ok(record)) => {
                let mut line = record.to_json_line()?;
                line.push('\n');
                write_atomic(&path, line.as_bytes())?;
                let stale = failed_path(dir, &label, job.repetition);
                if stale.exists() {
                    std::fs::remove_file(&stale).map_err(HarnessError::io(&stale))?;
                }
                return Ok(JobResult::Generated);
            }
            Ok(Err(e)) => e.to_string(),
            Err(payload) => panic_message(payload),
        };
        let failed = FailedGame {
            label: label.clone(),
            repetition: job.repetition,
            seed,
            error: failure,
        };
        write_atomic(
            &failed_path(dir, &label, job.repetition),
            serde_json::to_string_pretty(&failed)?.as_bytes(),
        )?;
        Ok(JobResult::Failed(failed))
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Plan(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<JobResult, HarnessError>> = pool.install(|| jobs.par_iter().map(run_job).collect());

    let mut summary = ExperimentSummary {
        planned: jobs.len(),
        ..Default::default()
    };
    for r in results {
        match r? {
            JobResult::Skipped => summary.skipped += 1,
            JobResult::Generated => summary.generated += 1,
            JobResult::Failed(f) => summary.failed.push(f),
        }
    }

    for entry in &plan.configs {
        let label = entry.label();
        let mut bytes = Vec::new();
        let mut counts = OutcomeCounts::default();
        for rep in 0..entry.repetitions {
            let path = game_path(dir, &label, rep);
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
            let record = GameRecord::from_json_line(text.trim_end()).map_err(|e| HarnessError::Corpus {
                path: path.clone(),
                line: 1,
                reason: e.to_string(),
            })?;
            counts.add(&record.outcome);
            bytes.extend_from_slice(text.as_bytes());
        }
        write_atomic(&consolidated_path(dir, &label), &bytes)?;
        summary.outcomes.insert(label, counts);
    }
    Ok(summary)
}

fn read_records(path: &Path) -> Result<Vec<GameRecord>, HarnessError> {
    let file = std::fs::File::open(path).map_err(HarnessError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(HarnessError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(GameRecord::from_json_line(&line).map_err(|e| HarnessError::Corpus {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Every record in the per-configuration files of a corpus directory, in
/// file-name order. A path to a single `.jsonl` or `.json` file is read
/// directly.
pub fn load_corpus(path: &Path) -> Result<Vec<GameRecord>, HarnessError> {
    if path.is_file() {
        return read_records(path);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(HarnessError::io(path))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_records(&f)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::PlanEntry;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("deceit-run-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn small_plan_writes_one_file_per_config() {
        let dir = tmp("small");
        let plan = ExperimentPlan::new(
            vec![
                PlanEntry::new(GameConfig::new(3, 1), 3),
                PlanEntry::new(GameConfig::new(5, 2), 2),
            ],
            9,
            &dir,
        );
        let summary = run_experiment(&plan, 2).unwrap();
        assert_eq!((summary.planned, summary.generated, summary.skipped), (5, 5, 0));
        assert!(summary.failed.is_empty());
        assert_eq!(summary.outcomes["3v1"].games(), 3);
        let records = load_corpus(&dir).unwrap();
        assert_eq!(records.len(), 5);
        assert_eq!(records[0].game_id, "3v1-0000");
        assert_eq!(records[4].game_id, "5v2-0001");

        let again = run_experiment(&plan, 1).unwrap();
        assert_eq!((again.generated, again.skipped), (0, 5));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn crashed_games_are_recorded_and_retried_on_resume() {
        let dir = tmp("failed");
        let plan = ExperimentPlan::new(vec![PlanEntry::new(GameConfig::new(3, 1), 3)], 0, &dir);
        let scripted = Roster::Scripted(ScriptedProfile::default());
        let summary = run_experiment_with(&plan, 2, |config, id| {
            if id.ends_with("0001") {
                panic!("seat exploded");
            }
            if id.ends_with("0002") {
                return Err(deceit_core::CoreError::ReplayDiverged("injected".into()));
            }
            scripted.play(config, id)
        })
        .unwrap();
        assert_eq!(summary.generated, 1);
        assert_eq!(summary.failed.len(), 2);
        assert!(summary.failed.iter().any(|f| f.error == "panic: seat exploded"));
        assert!(failed_path(&dir, "3v1", 1).exists());
        assert_eq!(load_corpus(&dir).unwrap().len(), 1);

        let resumed = run_experiment(&plan, 2).unwrap();
        assert_eq!((resumed.generated, resumed.skipped), (2, 1));
        assert!(!failed_path(&dir, "3v1", 1).exists());
        assert_eq!(load_corpus(&dir).unwrap().len(), 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn panic_payloads_are_described() {
        assert_eq!(panic_message(Box::new("boom")), "panic: boom");
        assert_eq!(panic_message(Box::new(String::from("bad"))), "panic: bad");
        assert_eq!(panic_message(Box::new(3)), "panic");
    }
}
