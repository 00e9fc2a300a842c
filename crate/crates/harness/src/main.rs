use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use deceit_agents::ChatEndpointConfig;
use deceit_annotate::DiscussionWindow;
use deceit_harness::{analyze_dirs, annotate_corpus, load_corpus, pretty, run_experiment, BackendSpec, ExperimentPlan, HarnessError};

#[derive(Parser)]
#[command(name = "deceit", about = "Run, annotate and analyze deduction-game experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Chat,
    Rules,
    Replay,
}

#[derive(Clone, Copy, ValueEnum)]
enum Window {
    Meeting,
    MeetingSoFar,
    Game,
}

#[derive(Subcommand)]
enum Command {
    /// Play every game of a plan into a corpus directory.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Label the utterances of a corpus.
    Annotate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        backend: BackendKind,
        #[arg(long, default_value_t = 3)]
        runs: usize,
        /// Defaults to `<corpus>/annotations`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON chat endpoint config, for `--backend chat`.
        #[arg(long)]
        endpoint: Option<PathBuf>,
        /// Annotation file to replay, for `--backend replay`.
        #[arg(long)]
        replay_from: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Window::Meeting)]
        window: Window,
    },
    /// Compute the report tables and figures.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the event log of a game file.
    Replay {
        #[arg(long)]
        game: PathBuf,
    },
}

fn backend_spec(kind: BackendKind, endpoint: Option<&Path>, replay_from: Option<&Path>) -> Result<BackendSpec, HarnessError> {
    Ok(match kind {
        BackendKind::Rules => BackendSpec::Rules,
        BackendKind::Replay => BackendSpec::Replay {
            source: replay_from
                .ok_or_else(|| HarnessError::Plan("--backend replay needs --replay-from".into()))?
                .to_path_buf(),
        },
        BackendKind::Chat => {
            let path = endpoint.ok_or_else(|| HarnessError::Plan("--backend chat needs --endpoint".into()))?;
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            BackendSpec::Chat {
                endpoint: serde_json::from_str::<ChatEndpointConfig>(&text)?,
            }
        }
    })
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { plan, out, workers } => {
            let mut plan = ExperimentPlan::load(&plan)?;
            if let Some(out) = out {
                plan.output_dir = out;
            }
            eprintln!("playing {} games into {}", plan.total_games(), plan.output_dir.display());
            let summary = run_experiment(&plan, workers)?;
            println!(
                "planned {}, generated {}, skipped {}, failed {}",
                summary.planned,
                summary.generated,
                summary.skipped,
                summary.failed.len()
            );
            for (label, c) in &summary.outcomes {
                println!(
                    "  {label}: crew {} impostor {} timeout {}",
                    c.crew_wins, c.impostor_wins, c.timeouts
                );
            }
            for f in &summary.failed {
                println!("  failed {} #{} (seed {}): {}", f.label, f.repetition, f.seed, f.error);
            }
        }
        Command::Annotate {
            corpus,
            backend,
            runs,
            out,
            endpoint,
            replay_from,
            window,
        } => {
            let spec = backend_spec(backend, endpoint.as_deref(), replay_from.as_deref())?;
            let out = out.unwrap_or_else(|| corpus.join("annotations"));
            let window = match window {
                Window::Meeting => DiscussionWindow::Meeting,
                Window::MeetingSoFar => DiscussionWindow::MeetingSoFar,
                Window::Game => DiscussionWindow::Game,
            };
            let outcome = annotate_corpus(&corpus, &out, &spec, runs, window)?;
            println!("labels in {}", outcome.path.display());
            if !outcome.resumed.is_empty() {
                println!("kept existing {}", outcome.resumed.join(", "));
            }
            if let Some(notice) = &outcome.notice {
                println!("{notice}");
            }
            if let Some(reports) = &outcome.stability {
                for (task, r) in reports {
                    println!(
                        "{}: identical {:.3}, two of three {:.3}, all differ {:.3}",
                        task.as_str(),
                        r.identical_fraction,
                        r.two_of_three_fraction,
                        r.all_differ_fraction
                    );
                }
            }
        }
        Command::Analyze { corpus, annotations, out } => {
            let report = analyze_dirs(&corpus, annotations.as_deref(), &out)?;
            println!(
                "{} games ({} crew, {} impostor, {} timeout); report in {}",
                report.games.games,
                report.games.crew_wins,
                report.games.impostor_wins,
                report.games.timeouts,
                out.display()
            );
            for w in &report.warnings {
                println!("warning: {w}");
            }
        }
        Command::Replay { game } => {
            for record in load_corpus(&game)? {
                print!("{}", pretty::render(&record));
                match deceit_core::replay::replay(&record) {
                    Ok(_) => println!("replay check: log reproduces"),
                    Err(e) => println!("replay check: {e}"),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
