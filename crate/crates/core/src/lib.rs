//! Domain model, game engine and game log for a text-based hidden-role
//! deduction game in the style of *Among Us*.

pub mod config;
pub mod engine;
pub mod error;
pub mod map;
pub mod model;
pub mod record;
pub mod replay;
pub mod text;

pub use config::{validate_config, GameConfig, Severity, Violation};
pub use engine::{new_game, run_game, Agent, GameState, Observation, Phase, Reply};
pub use error::CoreError;
pub use map::MapSpec;
pub use model::{
    Action, CrewWinReason, ImpostorWinReason, MeetingCause, Outcome, PlayerId, PlayerInfo, Role,
    UtteranceRecord, VoteTarget,
};
pub use record::{AgentTrace, Event, EventKind, GameRecord, Stage};
pub use text::word_count;
