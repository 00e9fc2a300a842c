use serde::{Deserialize, Serialize};

use super::{GameState, MeetingStage, Phase};
use crate::error::CoreError;
use crate::model::{Action, MeetingCause, PlayerId, Role, UtteranceRecord};
use crate::record::Stage;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerRef {
    pub id: PlayerId,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub index: usize,
    pub room: String,
    pub done: bool,
}

/// Information every player receives, regardless of location.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicEvent {
    MeetingCalled {
        meeting_index: usize,
        cause: MeetingCause,
    },
    Ejected {
        meeting_index: usize,
        player: PlayerId,
        name: String,
        was_impostor: bool,
    },
    NoEjection {
        meeting_index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingContext {
    pub meeting_index: usize,
    pub cause: MeetingCause,
    pub discussion_round: usize,
    pub transcript: Vec<UtteranceRecord>,
}

/// What one player is shown before a decision. Never contains another
/// player's role, except fellow impostors for an impostor viewer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub viewer: PlayerId,
    pub viewer_name: String,
    pub viewer_role: Role,
    pub stage: Stage,
    pub timestep: u32,
    pub round: u32,
    pub current_room: String,
    pub alive_players: Vec<PlayerRef>,
    pub visible_players: Vec<PlayerRef>,
    pub visible_bodies: Vec<PlayerRef>,
    pub own_tasks: Vec<TaskView>,
    pub teammates: Vec<PlayerRef>,
    pub legal_actions: Vec<Action>,
    pub public_events: Vec<PublicEvent>,
    pub meeting: Option<MeetingContext>,
}

impl Observation {
    pub fn name_of(&self, id: PlayerId) -> String {
        self.alive_players
            .iter()
            .chain(&self.visible_bodies)
            .find(|p| p.id == id)
            .map(|p| p.name.clone())
            .unwrap_or_else(|| crate::model::player_name(id))
    }
}

impl GameState {
    fn player_ref(&self, id: PlayerId) -> PlayerRef {
        PlayerRef {
            id,
            name: self.players[id.0].name.clone(),
        }
    }

    /// Builds the observation for `viewer` without marking public events as seen.
    pub fn peek_observation(&self, viewer: PlayerId) -> Result<Observation, CoreError> {
        let me = self.player(viewer)?;
        let legal_actions = self.legal_actions(viewer)?;
        let (stage, meeting) = match &self.phase {
            Phase::Meeting(m) => (
                match m.stage {
                    MeetingStage::Discussion => Stage::Discussion,
                    MeetingStage::Voting => Stage::Vote,
                },
                Some(MeetingContext {
                    meeting_index: m.index,
                    cause: m.cause.clone(),
                    discussion_round: m.discussion_round,
                    transcript: m.transcript.clone(),
                }),
            ),
            _ => (Stage::Task, None),
        };
        let in_meeting = meeting.is_some();

        let alive_players: Vec<PlayerRef> = self
            .players
            .iter()
            .filter(|p| p.alive)
            .map(|p| self.player_ref(p.id))
            .collect();
        let visible_players = self
            .players
            .iter()
            .filter(|p| p.alive && p.id != viewer && (in_meeting || p.location == me.location))
            .map(|p| self.player_ref(p.id))
            .collect();
        let visible_bodies = self
            .bodies()
            .into_iter()
            .filter(|(_, room)| *room == me.location)
            .map(|(v, _)| self.player_ref(v))
            .collect();
        let teammates = if me.role == Role::Impostor {
            self.players
                .iter()
                .filter(|p| p.role == Role::Impostor && p.id != viewer)
                .map(|p| self.player_ref(p.id))
                .collect()
        } else {
            Vec::new()
        };

        Ok(Observation {
            viewer,
            viewer_name: me.name.clone(),
            viewer_role: me.role,
            stage,
            timestep: self.timestep,
            round: self.round,
            current_room: me.location.clone(),
            alive_players,
            visible_players,
            visible_bodies,
            own_tasks: me
                .tasks
                .iter()
                .enumerate()
                .map(|(index, t)| TaskView {
                    index,
                    room: t.room.clone(),
                    done: t.done,
                })
                .collect(),
            teammates,
            legal_actions,
            public_events: self.public_log[self.public_cursor[viewer.0]..].to_vec(),
            meeting,
        })
    }

    /// Builds the observation and marks the public events in it as delivered.
    pub fn observe(&mut self, viewer: PlayerId) -> Result<Observation, CoreError> {
        let obs = self.peek_observation(viewer)?;
        self.public_cursor[viewer.0] = self.public_log.len();
        Ok(obs)
    }
}
