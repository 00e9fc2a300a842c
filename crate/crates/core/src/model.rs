//! Plain domain values shared by the engine, the agents and the analysis.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::word_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Crewmate,
    Impostor,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Crewmate => "Crewmate",
            Role::Impostor => "Impostor",
        })
    }
}

/// Seat index of a player, stable for the whole game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

const COLORS: [&str; 18] = [
    "Red", "Blue", "Green", "Pink", "Orange", "Yellow", "Black", "White", "Purple", "Brown",
    "Cyan", "Lime", "Maroon", "Rose", "Banana", "Gray", "Tan", "Coral",
];

/// Display name for a seat: a color, or `PlayerN` past the palette.
pub fn player_name(id: PlayerId) -> String {
    COLORS
        .get(id.0)
        .map(|c| c.to_string())
        .unwrap_or_else(|| format!("Player{}", id.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteTarget {
    Player(PlayerId),
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Move(String),
    CompleteTask(usize),
    Kill(PlayerId),
    Vent(String),
    ReportBody,
    CallEmergencyMeeting,
    Speak(String),
    Vote(VoteTarget),
}

impl Action {
    /// Whether two actions are the same menu entry. `Speak` carries free text,
    /// so any utterance matches the `Speak` entry.
    pub fn same_entry(&self, other: &Action) -> bool {
        match (self, other) {
            (Action::Speak(_), Action::Speak(_)) => true,
            _ => self == other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub room: String,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub id: PlayerId,
    pub name: String,
    pub role: Role,
    pub location: String,
    pub alive: bool,
    pub tasks: Vec<Task>,
    pub kill_ready_at: u32,
    pub emergency_calls_left: u32,
}

/// Public identity of a seat as written to the game log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerInfo {
    pub id: PlayerId,
    pub name: String,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetingCause {
    BodyReport { reporter: PlayerId, victim: PlayerId },
    Emergency { caller: PlayerId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrewWinReason {
    AllTasksDone,
    AllImpostorsEjected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpostorWinReason {
    Parity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    CrewWin(CrewWinReason),
    ImpostorWin(ImpostorWinReason),
    Timeout,
}

impl Outcome {
    /// `Some(true)` for a crew win, `Some(false)` for an impostor win, `None` on timeout.
    pub fn crew_won(&self) -> Option<bool> {
        match self {
            Outcome::CrewWin(_) => Some(true),
            Outcome::ImpostorWin(_) => Some(false),
            Outcome::Timeout => None,
        }
    }
}

/// One discussion turn. An empty `text` is an abstention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub game_id: String,
    pub meeting_index: usize,
    pub discussion_round: usize,
    pub speaker_id: PlayerId,
    pub speaker_role: Role,
    pub text: String,
    pub word_count: usize,
}

impl UtteranceRecord {
    pub fn new(
        game_id: impl Into<String>,
        meeting_index: usize,
        discussion_round: usize,
        speaker_id: PlayerId,
        speaker_role: Role,
        text: &str,
    ) -> Self {
        let text = text.trim().to_string();
        Self {
            game_id: game_id.into(),
            meeting_index,
            discussion_round,
            speaker_id,
            speaker_role,
            word_count: word_count(&text),
            text,
        }
    }

    pub fn is_abstention(&self) -> bool {
        self.text.is_empty()
    }
}
