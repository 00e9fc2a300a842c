use std::fmt;
use std::str::FromStr;

use deceit_core::UtteranceRecord;
use serde::{Deserialize, Serialize};

/// Stable identifier of one utterance: `game:meeting:round:speaker`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtteranceKey(String);

impl UtteranceKey {
    pub fn new(game_id: &str, meeting: usize, round: usize, speaker: usize) -> Self {
        UtteranceKey(format!("{game_id}:{meeting}:{round}:{speaker}"))
    }

    pub fn of(u: &UtteranceRecord) -> Self {
        Self::new(&u.game_id, u.meeting_index, u.discussion_round, u.speaker_id.0)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The game id part.
    pub fn game_id(&self) -> &str {
        self.0.rsplitn(4, ':').last().unwrap_or("")
    }
}

impl fmt::Display for UtteranceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for UtteranceKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.rsplitn(4, ':').collect();
        if parts.len() != 4 || parts[..3].iter().any(|p| p.parse::<usize>().is_err()) {
            return Err(format!("malformed utterance key '{s}'"));
        }
        Ok(UtteranceKey(s.to_string()))
    }
}
