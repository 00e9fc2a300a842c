//! Deterministic rule-based players for tests and desk-scale experiments.

use std::collections::BTreeMap;
use std::sync::Arc;

use deceit_core::engine::PublicEvent;
use deceit_core::{Action, Agent, MapSpec, MeetingCause, Observation, PlayerId, Reply, Role, VoteTarget};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Task-phase behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskPolicy {
    /// Any legal action except calling an emergency meeting, uniformly.
    RandomWalker,
    /// Reports bodies, does co-located tasks, otherwise heads for the
    /// nearest undone task.
    TaskRusher,
    /// Always abstains.
    StandStill,
    /// Kills when legal, waits beside crewmates during cooldown, otherwise
    /// heads to where a crewmate was last seen.
    Hunter,
    /// Wanders without killing.
    Pacifist,
}

/// Meeting behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetingScript {
    /// Names a suspect each round.
    Accuser,
    /// Protests innocence and deflects onto whoever accused it.
    Defender,
    /// Abstains from speaking and skips the vote.
    Silent,
}

/// Policies for each role. A seat applies the one matching its role.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScriptedProfile {
    pub crew_policy: TaskPolicy,
    pub impostor_policy: TaskPolicy,
    pub crew_script: MeetingScript,
    pub impostor_script: MeetingScript,
}

impl Default for ScriptedProfile {
    fn default() -> Self {
        ScriptedProfile {
            crew_policy: TaskPolicy::TaskRusher,
            impostor_policy: TaskPolicy::Hunter,
            crew_script: MeetingScript::Accuser,
            impostor_script: MeetingScript::Defender,
        }
    }
}

#[derive(Clone, Debug)]
struct Sighting {
    room: String,
    timestep: u32,
}

#[derive(Clone, Debug)]
pub struct ScriptedAgent {
    profile: ScriptedProfile,
    map: Arc<MapSpec>,
    rng: ChaCha8Rng,
    sightings: BTreeMap<PlayerId, Sighting>,
    distances: BTreeMap<String, BTreeMap<String, usize>>,
    ejected: Vec<PlayerId>,
}

impl ScriptedAgent {
    pub fn new(profile: ScriptedProfile, map: Arc<MapSpec>, seed: u64) -> Self {
        ScriptedAgent {
            profile,
            map,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sightings: BTreeMap::new(),
            distances: BTreeMap::new(),
            ejected: Vec::new(),
        }
    }

    pub fn profile(&self) -> ScriptedProfile {
        self.profile
    }

    fn policy(&self, role: Role) -> TaskPolicy {
        match role {
            Role::Crewmate => self.profile.crew_policy,
            Role::Impostor => self.profile.impostor_policy,
        }
    }

    fn script(&self, role: Role) -> MeetingScript {
        match role {
            Role::Crewmate => self.profile.crew_script,
            Role::Impostor => self.profile.impostor_script,
        }
    }

    fn observe(&mut self, obs: &Observation) {
        if obs.meeting.is_none() {
            for p in &obs.visible_players {
                self.sightings.insert(
                    p.id,
                    Sighting {
                        room: obs.current_room.clone(),
                        timestep: obs.timestep,
                    },
                );
            }
        }
        for e in &obs.public_events {
            if let PublicEvent::Ejected { player, .. } = e {
                self.ejected.push(*player);
            }
        }
    }

    fn distance(&mut self, from: &str, to: &str) -> usize {
        if !self.distances.contains_key(from) {
            let d = self.map.distances_from(from);
            self.distances.insert(from.to_string(), d);
        }
        self.distances[from].get(to).copied().unwrap_or(usize::MAX)
    }

    /// The legal move that gets closest to any of `targets`, ties broken by
    /// the seeded RNG. `None` when there is nowhere to go.
    fn step_toward(&mut self, obs: &Observation, targets: &[String]) -> Option<Action> {
        let moves: Vec<String> = obs
            .legal_actions
            .iter()
            .filter_map(|a| match a {
                Action::Move(r) => Some(r.clone()),
                _ => None,
            })
            .collect();
        if targets.is_empty() || moves.is_empty() {
            return None;
        }
        let scored: Vec<(usize, String)> = moves
            .into_iter()
            .map(|m| {
                let d = targets.iter().map(|t| self.distance(&m, t)).min().unwrap_or(usize::MAX);
                (d, m)
            })
            .collect();
        let best = scored.iter().map(|s| s.0).min()?;
        let tied: Vec<&String> = scored.iter().filter(|s| s.0 == best).map(|s| &s.1).collect();
        tied.choose(&mut self.rng).map(|r| Action::Move((*r).clone()))
    }

    fn random_move(&mut self, obs: &Observation) -> Option<Action> {
        let moves: Vec<&Action> = obs
            .legal_actions
            .iter()
            .filter(|a| matches!(a, Action::Move(_)))
            .collect();
        moves.choose(&mut self.rng).map(|a| (*a).clone())
    }

    fn task_rusher(&mut self, obs: &Observation) -> Option<Action> {
        if obs.legal_actions.contains(&Action::ReportBody) {
            return Some(Action::ReportBody);
        }
        if let Some(a) = obs
            .legal_actions
            .iter()
            .find(|a| matches!(a, Action::CompleteTask(_)))
        {
            return Some(a.clone());
        }
        let undone: Vec<String> = obs
            .own_tasks
            .iter()
            .filter(|t| !t.done)
            .map(|t| t.room.clone())
            .collect();
        if undone.contains(&obs.current_room) {
            return None;
        }
        self.step_toward(obs, &undone).or_else(|| self.random_move(obs))
    }

    fn hunter(&mut self, obs: &Observation) -> Option<Action> {
        let kills: Vec<&Action> = obs
            .legal_actions
            .iter()
            .filter(|a| matches!(a, Action::Kill(_)))
            .collect();
        if let Some(k) = kills.choose(&mut self.rng) {
            return Some((*k).clone());
        }
        let is_crew = |id: &PlayerId| id != &obs.viewer && !obs.teammates.iter().any(|t| t.id == *id);
        if obs.visible_players.iter().any(|p| is_crew(&p.id)) {
            return None;
        }
        let alive: Vec<PlayerId> = obs.alive_players.iter().map(|p| p.id).filter(is_crew).collect();
        let latest = self
            .sightings
            .iter()
            .filter(|(id, _)| alive.contains(id))
            .map(|(_, s)| s.timestep)
            .max();
        let targets: Vec<String> = match latest {
            Some(t) => self
                .sightings
                .iter()
                .filter(|(id, s)| alive.contains(id) && s.timestep == t && s.room != obs.current_room)
                .map(|(_, s)| s.room.clone())
                .collect(),
            None => Vec::new(),
        };
        self.step_toward(obs, &targets).or_else(|| self.random_move(obs))
    }

    fn random_walker(&mut self, obs: &Observation) -> Option<Action> {
        let options: Vec<&Action> = obs
            .legal_actions
            .iter()
            .filter(|a| !matches!(a, Action::CallEmergencyMeeting))
            .collect();
        options.choose(&mut self.rng).map(|a| (*a).clone())
    }

    /// Alive players other than the viewer (and, for an impostor, its team).
    fn others(obs: &Observation, exclude_team: bool) -> Vec<PlayerId> {
        obs.alive_players
            .iter()
            .map(|p| p.id)
            .filter(|id| *id != obs.viewer)
            .filter(|id| !exclude_team || !obs.teammates.iter().any(|t| t.id == *id))
            .collect()
    }

    fn suspect(&mut self, obs: &Observation) -> Option<PlayerId> {
        let impostor = obs.viewer_role == Role::Impostor;
        let candidates = Self::others(obs, impostor);
        if impostor {
            if let Some(p) = most_accused(obs, &candidates) {
                return Some(p);
            }
            return candidates.choose(&mut self.rng).copied();
        }
        let latest = candidates
            .iter()
            .filter_map(|id| self.sightings.get(id).map(|s| s.timestep))
            .max();
        let recent: Vec<PlayerId> = match latest {
            Some(t) => candidates
                .iter()
                .copied()
                .filter(|id| self.sightings.get(id).is_some_and(|s| s.timestep == t))
                .collect(),
            None => candidates,
        };
        recent.choose(&mut self.rng).copied()
    }

    fn accuse(&mut self, obs: &Observation) -> String {
        let Some(meeting) = &obs.meeting else {
            return String::new();
        };
        let Some(suspect) = self.suspect(obs) else {
            return "I have nothing to add.".into();
        };
        let name = obs.name_of(suspect);
        let place = self
            .sightings
            .get(&suspect)
            .map(|s| format!("in {}", s.room))
            .unwrap_or_else(|| "nowhere near their tasks".into());
        match meeting.discussion_round {
            0 => {
                let opener = match &meeting.cause {
                    MeetingCause::BodyReport { victim, .. } => format!("{} is dead. ", obs.name_of(*victim)),
                    MeetingCause::Emergency { .. } => String::new(),
                };
                format!("{opener}I think {name} is suspicious. I last saw them {place}.")
            }
            1 => format!("{name} has not explained where they were. We should vote {name}."),
            _ => format!("My vote is on {name}."),
        }
    }

    fn defend(&mut self, obs: &Observation) -> String {
        let Some(meeting) = &obs.meeting else {
            return String::new();
        };
        let me = &obs.viewer_name;
        let accuser = meeting
            .transcript
            .iter()
            .rev()
            .find(|u| u.speaker_id != obs.viewer && mentions(&u.text, me))
            .map(|u| obs.name_of(u.speaker_id));
        match (meeting.discussion_round, accuser) {
            (_, Some(a)) => format!("It was not me. {a} is pushing a story that does not add up."),
            (0, None) => format!("I was in {} doing my tasks. It was not me.", obs.current_room),
            (1, None) => "I have been with the group. Let's not rush the vote.".into(),
            _ => "I will skip unless someone has proof.".into(),
        }
    }

    fn choose_vote(&mut self, obs: &Observation) -> VoteTarget {
        let legal: Vec<PlayerId> = obs
            .legal_actions
            .iter()
            .filter_map(|a| match a {
                Action::Vote(VoteTarget::Player(p)) if *p != obs.viewer => Some(*p),
                _ => None,
            })
            .collect();
        let impostor = obs.viewer_role == Role::Impostor;
        let candidates: Vec<PlayerId> = legal
            .into_iter()
            .filter(|id| !impostor || !obs.teammates.iter().any(|t| t.id == *id))
            .collect();
        if let Some(p) = most_accused_tiebreak(obs, &candidates, &mut self.rng) {
            return VoteTarget::Player(p);
        }
        if impostor {
            if let Some(p) = candidates.choose(&mut self.rng) {
                return VoteTarget::Player(*p);
            }
        }
        VoteTarget::Skip
    }
}

/// Whether `text` mentions `name` as a whole word.
fn mentions(text: &str, name: &str) -> bool {
    text.split(|c: char| !c.is_alphanumeric())
        .any(|w| w.eq_ignore_ascii_case(name))
}

fn accusation_counts(obs: &Observation, candidates: &[PlayerId]) -> Vec<(PlayerId, usize)> {
    let Some(m) = &obs.meeting else {
        return Vec::new();
    };
    candidates
        .iter()
        .map(|id| {
            let name = obs.name_of(*id);
            let n = m
                .transcript
                .iter()
                .filter(|u| u.speaker_id != *id && mentions(&u.text, &name))
                .count();
            (*id, n)
        })
        .filter(|(_, n)| *n > 0)
        .collect()
}

fn most_accused(obs: &Observation, candidates: &[PlayerId]) -> Option<PlayerId> {
    let counts = accusation_counts(obs, candidates);
    let max = counts.iter().map(|c| c.1).max()?;
    counts.iter().find(|c| c.1 == max).map(|c| c.0)
}

fn most_accused_tiebreak(obs: &Observation, candidates: &[PlayerId], rng: &mut ChaCha8Rng) -> Option<PlayerId> {
    let counts = accusation_counts(obs, candidates);
    let max = counts.iter().map(|c| c.1).max()?;
    let tied: Vec<PlayerId> = counts.iter().filter(|c| c.1 == max).map(|c| c.0).collect();
    tied.choose(rng).copied()
}

impl Agent for ScriptedAgent {
    fn decide(&mut self, obs: &Observation) -> Reply<Action> {
        self.observe(obs);
        let action = match self.policy(obs.viewer_role) {
            TaskPolicy::RandomWalker => self.random_walker(obs),
            TaskPolicy::TaskRusher => self.task_rusher(obs),
            TaskPolicy::StandStill => None,
            TaskPolicy::Hunter => self.hunter(obs),
            TaskPolicy::Pacifist => self.random_move(obs),
        };
        match action {
            Some(a) => Reply::new(a),
            None => Reply::abstain(),
        }
    }

    fn speak(&mut self, obs: &Observation) -> Reply<String> {
        self.observe(obs);
        let text = match self.script(obs.viewer_role) {
            MeetingScript::Accuser => self.accuse(obs),
            MeetingScript::Defender => self.defend(obs),
            MeetingScript::Silent => String::new(),
        };
        if text.is_empty() {
            Reply::abstain()
        } else {
            Reply::new(text)
        }
    }

    fn vote(&mut self, obs: &Observation) -> Reply<VoteTarget> {
        self.observe(obs);
        match self.script(obs.viewer_role) {
            MeetingScript::Silent => Reply::new(VoteTarget::Skip),
            _ => Reply::new(self.choose_vote(obs)),
        }
    }
}

/// Per-seat seed derived from a game seed, so seats draw independent streams.
pub fn seat_seed(game_seed: u64, seat: usize) -> u64 {
    let mut z = game_seed ^ (seat as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One scripted agent per seat.
pub fn scripted_roster(profile: ScriptedProfile, map: &MapSpec, players: usize, game_seed: u64) -> Vec<ScriptedAgent> {
    let map = Arc::new(map.clone());
    (0..players)
        .map(|seat| ScriptedAgent::new(profile, map.clone(), seat_seed(game_seed, seat)))
        .collect()
}
