//! The append-only game log and its JSONL encoding.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::GameConfig;
use crate::error::CoreError;
use crate::model::{
    Action, MeetingCause, Outcome, PlayerId, PlayerInfo, Role, UtteranceRecord, VoteTarget,
};

/// Which decision an agent was asked to make.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Task,
    Discussion,
    Vote,
}

/// Everything an agent produced for one decision, kept for the log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTrace {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensed_memory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinking: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    GameStarted {
        players: Vec<PlayerInfo>,
        turn_order: Vec<PlayerId>,
        tasks: Vec<Vec<String>>,
    },
    AgentTurn {
        player: PlayerId,
        stage: Stage,
        #[serde(flatten)]
        trace: AgentTrace,
        choice: Option<Action>,
    },
    NoOp {
        player: PlayerId,
        stage: Stage,
        reason: String,
    },
    Moved {
        player: PlayerId,
        from: String,
        to: String,
    },
    Vented {
        player: PlayerId,
        from: String,
        to: String,
    },
    TaskCompleted {
        player: PlayerId,
        task: usize,
        room: String,
    },
    Killed {
        killer: PlayerId,
        victim: PlayerId,
        room: String,
    },
    MeetingCalled {
        meeting_index: usize,
        cause: MeetingCause,
    },
    Utterance(UtteranceRecord),
    VoteCast {
        voter: PlayerId,
        target: VoteTarget,
    },
    VoteTally {
        meeting_index: usize,
        counts: Vec<(VoteTarget, usize)>,
        ejected: Option<PlayerId>,
    },
    /// Public role reveal of the ejected player.
    Ejected {
        player: PlayerId,
        role: Role,
    },
    BodiesCleared {
        count: usize,
    },
    GameEnded {
        outcome: Outcome,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub timestep: u32,
    pub round: u32,
    pub event: EventKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameCounters {
    pub rounds_played: u32,
    pub discussions: usize,
    pub ejections: usize,
    pub kills: usize,
    /// 1-based round in which each meeting was held.
    pub meeting_rounds: Vec<u32>,
    /// 1-based round of each ejection.
    pub ejection_rounds: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_id: String,
    pub config: GameConfig,
    pub seed: u64,
    pub players: Vec<PlayerInfo>,
    pub events: Vec<Event>,
    pub outcome: Outcome,
    pub counters: GameCounters,
}

impl GameRecord {
    pub fn utterances(&self) -> impl Iterator<Item = &UtteranceRecord> {
        self.events.iter().filter_map(|e| match &e.event {
            EventKind::Utterance(u) => Some(u),
            _ => None,
        })
    }

    pub fn role_of(&self, id: PlayerId) -> Option<Role> {
        self.players.iter().find(|p| p.id == id).map(|p| p.role)
    }

    pub fn to_json_line(&self) -> Result<String, CoreError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_line(line: &str) -> Result<Self, CoreError> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Writes one record per line.
pub fn write_jsonl<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a GameRecord>,
) -> Result<(), CoreError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads every non-blank line as a record.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<GameRecord>, CoreError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(GameRecord::from_json_line(&line)?);
    }
    Ok(out)
}
