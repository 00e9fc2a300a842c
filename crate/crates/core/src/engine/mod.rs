//! The game state machine.
//!
//! A game alternates between task sweeps, where every alive player acts once
//! in a fixed seeded order, and meetings, where players talk for a fixed
//! number of discussion rounds and then cast private votes. All randomness
//! comes from a generator seeded by the config, so a game is a pure function
//! of its config and the agents' choices.

mod observe;
mod rules;
mod runner;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{validate_config, GameConfig};
use crate::error::CoreError;
use crate::model::{
    player_name, MeetingCause, Outcome, PlayerId, PlayerInfo, PlayerState, Role, Task,
    UtteranceRecord, VoteTarget,
};
use crate::record::{Event, EventKind, GameCounters, GameRecord};

pub use observe::{MeetingContext, Observation, PlayerRef, PublicEvent, TaskView};
pub use rules::{tally_votes, termination_rule};
pub use runner::{play, run_game, run_meeting, run_task_phase, Agent, Reply};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetingStage {
    Discussion,
    Voting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetingState {
    pub index: usize,
    pub cause: MeetingCause,
    pub discussion_round: usize,
    pub stage: MeetingStage,
    pub transcript: Vec<UtteranceRecord>,
    pub votes: BTreeMap<PlayerId, VoteTarget>,
    pub ejected: Option<PlayerId>,
    spoken: BTreeSet<PlayerId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase {
    Task,
    Meeting(MeetingState),
    Finished(Outcome),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Body {
    pub victim: PlayerId,
    pub room_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    pub config: GameConfig,
    pub game_id: String,
    /// Advances once per task sweep and once per meeting; kill cooldowns count in timesteps.
    pub timestep: u32,
    /// 0-based index of the current round (a task sweep plus the meeting it triggered).
    pub round: u32,
    pub phase: Phase,
    pub players: Vec<PlayerState>,
    pub turn_order: Vec<PlayerId>,
    pub events: Vec<Event>,
    bodies: BTreeSet<Body>,
    rng: ChaCha8Rng,
    public_log: Vec<PublicEvent>,
    public_cursor: Vec<usize>,
    meetings_held: usize,
    counters: GameCounters,
    last_meeting: Option<MeetingState>,
}

/// Game id derived from the seed when the caller does not supply one.
pub fn default_game_id(seed: u64) -> String {
    format!("{seed:016x}")
}

/// Builds the initial state: seeded role assignment, seeded task rooms,
/// everyone in the cafeteria.
pub fn new_game(config: GameConfig) -> Result<GameState, CoreError> {
    let id = default_game_id(config.seed);
    new_game_with_id(config, id)
}

pub fn new_game_with_id(config: GameConfig, game_id: String) -> Result<GameState, CoreError> {
    let errors: Vec<_> = validate_config(&config)
        .into_iter()
        .filter(|v| v.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(CoreError::InvalidConfig(errors));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.num_players();

    let mut seats: Vec<usize> = (0..n).collect();
    seats.shuffle(&mut rng);
    let impostor_seats: BTreeSet<usize> = seats[..config.num_impostors].iter().copied().collect();

    let task_rooms: Vec<&String> = config
        .map
        .rooms
        .iter()
        .filter(|r| **r != config.map.cafeteria)
        .collect();
    let task_rooms = if task_rooms.is_empty() {
        config.map.rooms.iter().collect()
    } else {
        task_rooms
    };

    let mut players = Vec::with_capacity(n);
    for seat in 0..n {
        let id = PlayerId(seat);
        let role = if impostor_seats.contains(&seat) {
            Role::Impostor
        } else {
            Role::Crewmate
        };
        let tasks = match role {
            Role::Crewmate => (0..config.tasks_per_crew)
                .map(|_| Task {
                    room: task_rooms[rng.random_range(0..task_rooms.len())].clone(),
                    done: false,
                })
                .collect(),
            Role::Impostor => Vec::new(),
        };
        players.push(PlayerState {
            id,
            name: player_name(id),
            role,
            location: config.map.cafeteria.clone(),
            alive: true,
            tasks,
            kill_ready_at: match role {
                Role::Impostor => config.kill_cooldown,
                Role::Crewmate => 0,
            },
            emergency_calls_left: config.emergency_meetings_per_player,
        });
    }

    let mut turn_order: Vec<PlayerId> = (0..n).map(PlayerId).collect();
    turn_order.shuffle(&mut rng);

    let mut state = GameState {
        config,
        game_id,
        timestep: 0,
        round: 0,
        phase: Phase::Task,
        players,
        turn_order,
        events: Vec::new(),
        bodies: BTreeSet::new(),
        rng,
        public_log: Vec::new(),
        public_cursor: vec![0; n],
        meetings_held: 0,
        counters: GameCounters::default(),
        last_meeting: None,
    };
    let started = EventKind::GameStarted {
        players: state.player_infos(),
        turn_order: state.turn_order.clone(),
        tasks: state
            .players
            .iter()
            .map(|p| p.tasks.iter().map(|t| t.room.clone()).collect())
            .collect(),
    };
    state.emit(started);
    Ok(state)
}

impl GameState {
    pub fn player(&self, id: PlayerId) -> Result<&PlayerState, CoreError> {
        self.players.get(id.0).ok_or(CoreError::UnknownPlayer(id))
    }

    pub fn player_infos(&self) -> Vec<PlayerInfo> {
        self.players
            .iter()
            .map(|p| PlayerInfo {
                id: p.id,
                name: p.name.clone(),
                role: p.role,
            })
            .collect()
    }

    pub fn alive_count(&self, role: Role) -> usize {
        self.players
            .iter()
            .filter(|p| p.alive && p.role == role)
            .count()
    }

    pub fn all_tasks_done(&self) -> bool {
        self.players
            .iter()
            .filter(|p| p.role == Role::Crewmate)
            .flat_map(|p| &p.tasks)
            .all(|t| t.done)
    }

    pub fn total_tasks(&self) -> usize {
        self.players.iter().map(|p| p.tasks.len()).sum()
    }

    /// Bodies as (victim, room) pairs.
    pub fn bodies(&self) -> Vec<(PlayerId, &str)> {
        self.bodies
            .iter()
            .map(|b| (b.victim, self.config.map.rooms[b.room_index].as_str()))
            .collect()
    }

    pub fn meeting(&self) -> Option<&MeetingState> {
        match &self.phase {
            Phase::Meeting(m) => Some(m),
            _ => None,
        }
    }

    /// The most recently concluded meeting.
    pub fn last_meeting(&self) -> Option<&MeetingState> {
        self.last_meeting.as_ref()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.phase {
            Phase::Finished(o) => Some(o),
            _ => None,
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Finished(_))
    }

    pub fn counters(&self) -> &GameCounters {
        &self.counters
    }

    /// Alive players in turn order.
    pub fn alive_in_turn_order(&self) -> Vec<PlayerId> {
        self.turn_order
            .iter()
            .copied()
            .filter(|p| self.players[p.0].alive)
            .collect()
    }

    /// The player whose meeting turn is next, if a meeting is running.
    pub fn next_meeting_actor(&self) -> Option<PlayerId> {
        let m = self.meeting()?;
        self.alive_in_turn_order().into_iter().find(|p| match m.stage {
            MeetingStage::Discussion => !m.spoken.contains(p),
            MeetingStage::Voting => !m.votes.contains_key(p),
        })
    }

    /// Consumes a finished (or abandoned) game into its log.
    pub fn into_record(self) -> GameRecord {
        let outcome = self.outcome().unwrap_or(Outcome::Timeout);
        GameRecord {
            game_id: self.game_id.clone(),
            seed: self.config.seed,
            players: self.player_infos(),
            config: self.config,
            events: self.events,
            outcome,
            counters: self.counters,
        }
    }

    fn emit(&mut self, event: EventKind) {
        self.events.push(Event {
            timestep: self.timestep,
            round: self.round,
            event,
        });
    }

    fn room_index(&self, room: &str) -> usize {
        self.config
            .map
            .rooms
            .iter()
            .position(|r| r == room)
            .expect("player locations are always map rooms")
    }

    /// Closes the current task sweep. A sweep that did not trigger a meeting
    /// also closes the round.
    pub fn end_task_sweep(&mut self) {
        if self.is_finished() {
            return;
        }
        self.timestep += 1;
        if matches!(self.phase, Phase::Task) {
            self.end_round();
        }
    }

    fn end_round(&mut self) {
        self.round += 1;
        if let Some(outcome) = self.check_termination() {
            self.finish(outcome);
        }
    }

    fn finish(&mut self, outcome: Outcome) {
        self.counters.rounds_played = match outcome {
            Outcome::Timeout => self.round,
            _ => self.round + 1,
        };
        self.phase = Phase::Finished(outcome);
        self.emit(EventKind::GameEnded { outcome });
    }
}
