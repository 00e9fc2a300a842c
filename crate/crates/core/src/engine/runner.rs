use super::{new_game_with_id, GameState, MeetingState, MeetingStage, Observation, Phase};
use crate::config::GameConfig;
use crate::error::CoreError;
use crate::model::{Action, PlayerId, VoteTarget};
use crate::record::{AgentTrace, EventKind, GameRecord, Stage};

/// An agent's answer to one decision. `value: None` is an abstention: a no-op
/// in the task phase, an empty utterance in discussion, Skip in a vote.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reply<T> {
    pub value: Option<T>,
    pub trace: AgentTrace,
}

impl<T> Reply<T> {
    pub fn new(value: T) -> Self {
        Self {
            value: Some(value),
            trace: AgentTrace::default(),
        }
    }

    pub fn abstain() -> Self {
        Self {
            value: None,
            trace: AgentTrace::default(),
        }
    }

    pub fn with_trace(mut self, trace: AgentTrace) -> Self {
        self.trace = trace;
        self
    }
}

/// A player controller. One instance per seat; called sequentially.
pub trait Agent: Send {
    fn decide(&mut self, obs: &Observation) -> Reply<Action>;
    fn speak(&mut self, obs: &Observation) -> Reply<String>;
    fn vote(&mut self, obs: &Observation) -> Reply<VoteTarget>;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn decide(&mut self, obs: &Observation) -> Reply<Action> {
        (**self).decide(obs)
    }
    fn speak(&mut self, obs: &Observation) -> Reply<String> {
        (**self).speak(obs)
    }
    fn vote(&mut self, obs: &Observation) -> Reply<VoteTarget> {
        (**self).vote(obs)
    }
}

impl GameState {
    fn log_turn(&mut self, player: PlayerId, stage: Stage, trace: AgentTrace, choice: Option<Action>) {
        self.emit(EventKind::AgentTurn {
            player,
            stage,
            trace,
            choice,
        });
    }

    fn log_noop(&mut self, player: PlayerId, stage: Stage, reason: String) {
        self.emit(EventKind::NoOp {
            player,
            stage,
            reason,
        });
    }
}

fn agent_for<A: Agent>(agents: &mut [A], p: PlayerId) -> Result<&mut A, CoreError> {
    let len = agents.len();
    agents.get_mut(p.0).ok_or(CoreError::RosterSize {
        expected: p.0 + 1,
        got: len,
    })
}

/// One sweep of the task phase. Each alive player acts once in turn order;
/// the sweep stops early when an action starts a meeting or ends the game.
pub fn run_task_phase<A: Agent>(state: &mut GameState, agents: &mut [A]) -> Result<(), CoreError> {
    if !matches!(state.phase, Phase::Task) {
        return Ok(());
    }
    for p in state.turn_order.clone() {
        if !matches!(state.phase, Phase::Task) {
            break;
        }
        if !state.players[p.0].alive {
            continue;
        }
        let obs = state.observe(p)?;
        let reply = agent_for(agents, p)?.decide(&obs);
        state.log_turn(p, Stage::Task, reply.trace, reply.value.clone());
        match reply.value {
            Some(action) => {
                if let Err(e) = state.apply_action(p, action) {
                    state.log_noop(p, Stage::Task, e.to_string());
                }
            }
            None => state.log_noop(p, Stage::Task, "abstained".into()),
        }
    }
    state.end_task_sweep();
    Ok(())
}

/// Runs the current meeting to completion: discussion rounds, then votes,
/// then the tally. Returns the concluded meeting.
pub fn run_meeting<A: Agent>(
    state: &mut GameState,
    agents: &mut [A],
) -> Result<Option<MeetingState>, CoreError> {
    while let Some(p) = state.next_meeting_actor() {
        let stage = state.meeting().map(|m| m.stage);
        let obs = state.observe(p)?;
        match stage {
            Some(MeetingStage::Discussion) => {
                let reply = agent_for(agents, p)?.speak(&obs);
                let text = reply.value.clone().unwrap_or_default();
                state.log_turn(p, Stage::Discussion, reply.trace, reply.value.map(Action::Speak));
                state.apply_action(p, Action::Speak(text))?;
            }
            Some(MeetingStage::Voting) => {
                let reply = agent_for(agents, p)?.vote(&obs);
                state.log_turn(p, Stage::Vote, reply.trace, reply.value.map(Action::Vote));
                let target = match reply.value {
                    Some(t) if obs.legal_actions.contains(&Action::Vote(t)) => t,
                    Some(t) => {
                        state.log_noop(p, Stage::Vote, format!("illegal vote {t:?}; counted as skip"));
                        VoteTarget::Skip
                    }
                    None => {
                        state.log_noop(p, Stage::Vote, "abstained; counted as skip".into());
                        VoteTarget::Skip
                    }
                };
                state.apply_action(p, Action::Vote(target))?;
            }
            None => break,
        }
    }
    Ok(state.last_meeting().cloned())
}

/// Drives a game until it finishes.
pub fn play<A: Agent>(state: &mut GameState, agents: &mut [A]) -> Result<(), CoreError> {
    if agents.len() != state.players.len() {
        return Err(CoreError::RosterSize {
            expected: state.players.len(),
            got: agents.len(),
        });
    }
    loop {
        match state.phase {
            Phase::Task => run_task_phase(state, agents)?,
            Phase::Meeting(_) => {
                run_meeting(state, agents)?;
            }
            Phase::Finished(_) => return Ok(()),
        }
    }
}

/// Plays a full game with one agent per seat.
pub fn run_game<A: Agent>(config: GameConfig, agents: &mut [A]) -> Result<GameRecord, CoreError> {
    let id = super::default_game_id(config.seed);
    let mut state = new_game_with_id(config, id)?;
    play(&mut state, agents)?;
    Ok(state.into_record())
}
