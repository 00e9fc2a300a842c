use thiserror::Error;

use crate::config::Violation;
use crate::model::{Action, PlayerId};

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid game configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("player {0} is dead")]
    DeadPlayer(PlayerId),
    #[error("illegal action {action:?} for player {player}: {reason}")]
    IllegalAction {
        player: PlayerId,
        action: Action,
        reason: String,
    },
    #[error("agent roster has {got} agents but the game has {expected} players")]
    RosterSize { expected: usize, got: usize },
    #[error("replay diverged: {0}")]
    ReplayDiverged(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
