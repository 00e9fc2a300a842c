//! Re-executes a logged game from its recorded agent decisions.

use std::collections::VecDeque;

use crate::engine::{new_game_with_id, play, Agent, GameState, Observation, Reply};
use crate::error::CoreError;
use crate::model::{Action, VoteTarget};
use crate::record::{AgentTrace, EventKind, GameRecord, Stage};

type Turn = (AgentTrace, Option<Action>);

/// Feeds back the decisions one seat made in a recorded game.
#[derive(Debug, Default)]
pub struct RecordedAgent {
    task: VecDeque<Turn>,
    discussion: VecDeque<Turn>,
    vote: VecDeque<Turn>,
}

impl RecordedAgent {
    /// One agent per seat, in seat order.
    pub fn from_record(record: &GameRecord) -> Vec<RecordedAgent> {
        let mut agents: Vec<RecordedAgent> =
            (0..record.players.len()).map(|_| RecordedAgent::default()).collect();
        for e in &record.events {
            if let EventKind::AgentTurn {
                player,
                stage,
                trace,
                choice,
            } = &e.event
            {
                let Some(agent) = agents.get_mut(player.0) else {
                    continue;
                };
                let turn = (trace.clone(), choice.clone());
                match stage {
                    Stage::Task => agent.task.push_back(turn),
                    Stage::Discussion => agent.discussion.push_back(turn),
                    Stage::Vote => agent.vote.push_back(turn),
                }
            }
        }
        agents
    }
}

impl Agent for RecordedAgent {
    fn decide(&mut self, _obs: &Observation) -> Reply<Action> {
        match self.task.pop_front() {
            Some((trace, choice)) => Reply {
                value: choice,
                trace,
            },
            None => Reply::abstain(),
        }
    }

    fn speak(&mut self, _obs: &Observation) -> Reply<String> {
        match self.discussion.pop_front() {
            Some((trace, choice)) => Reply {
                value: match choice {
                    Some(Action::Speak(t)) => Some(t),
                    _ => None,
                },
                trace,
            },
            None => Reply::abstain(),
        }
    }

    fn vote(&mut self, _obs: &Observation) -> Reply<VoteTarget> {
        match self.vote.pop_front() {
            Some((trace, choice)) => Reply {
                value: match choice {
                    Some(Action::Vote(t)) => Some(t),
                    _ => None,
                },
                trace,
            },
            None => Reply::abstain(),
        }
    }
}

/// Replays `record` on a fresh engine and returns the final state. Fails if
/// the regenerated log differs from the recorded one.
pub fn replay(record: &GameRecord) -> Result<GameState, CoreError> {
    let mut state = new_game_with_id(record.config.clone(), record.game_id.clone())?;
    let mut agents = RecordedAgent::from_record(record);
    play(&mut state, &mut agents)?;

    if let Some(i) = state
        .events
        .iter()
        .zip(&record.events)
        .position(|(a, b)| a != b)
    {
        return Err(CoreError::ReplayDiverged(format!(
            "event {i}: replayed {:?}, recorded {:?}",
            state.events[i], record.events[i]
        )));
    }
    if state.events.len() != record.events.len() {
        return Err(CoreError::ReplayDiverged(format!(
            "replayed {} events, recorded {}",
            state.events.len(),
            record.events.len()
        )));
    }
    Ok(state)
}
