use std::collections::{BTreeMap, BTreeSet};

use super::{Body, GameState, MeetingStage, MeetingState, Phase, PublicEvent};
use crate::error::CoreError;
use crate::model::{
    Action, CrewWinReason, ImpostorWinReason, MeetingCause, Outcome, PlayerId, Role,
    UtteranceRecord, VoteTarget,
};
use crate::record::{Event, EventKind};

/// Plurality ejection: the unique player with strictly more votes than every
/// other player and than Skip. Skip never ejects anyone.
pub fn tally_votes(votes: &BTreeMap<PlayerId, VoteTarget>) -> Option<PlayerId> {
    let mut counts: BTreeMap<PlayerId, usize> = BTreeMap::new();
    let mut skips = 0usize;
    for target in votes.values() {
        match target {
            VoteTarget::Player(p) => *counts.entry(*p).or_default() += 1,
            VoteTarget::Skip => skips += 1,
        }
    }
    let best = counts.values().copied().max()?;
    let mut leaders = counts.iter().filter(|(_, c)| **c == best);
    let (leader, _) = leaders.next()?;
    if leaders.next().is_some() || best <= skips {
        return None;
    }
    Some(*leader)
}

/// Win rule over alive counts. At most one condition can newly hold after a
/// single action, so the fixed order below never changes which one fires.
pub fn termination_rule(
    impostors_alive: usize,
    crew_alive: usize,
    all_tasks_done: bool,
    round: u32,
    max_rounds: u32,
) -> Option<Outcome> {
    if impostors_alive == 0 {
        Some(Outcome::CrewWin(CrewWinReason::AllImpostorsEjected))
    } else if impostors_alive >= crew_alive {
        Some(Outcome::ImpostorWin(ImpostorWinReason::Parity))
    } else if all_tasks_done {
        Some(Outcome::CrewWin(CrewWinReason::AllTasksDone))
    } else if round >= max_rounds {
        Some(Outcome::Timeout)
    } else {
        None
    }
}

impl GameState {
    pub fn check_termination(&self) -> Option<Outcome> {
        if let Phase::Finished(o) = self.phase {
            return Some(o);
        }
        termination_rule(
            self.alive_count(Role::Impostor),
            self.alive_count(Role::Crewmate),
            self.all_tasks_done(),
            self.round,
            self.config.max_rounds,
        )
    }

    /// The action menu for `player` in the current phase.
    pub fn legal_actions(&self, player: PlayerId) -> Result<Vec<Action>, CoreError> {
        let me = self.player(player)?;
        if !me.alive {
            return Err(CoreError::DeadPlayer(player));
        }
        let mut out = Vec::new();
        match &self.phase {
            Phase::Finished(_) => {}
            Phase::Task => {
                let map = &self.config.map;
                let room = me.location.as_str();
                out.extend(map.neighbors(room).into_iter().map(|r| Action::Move(r.into())));
                if me.role == Role::Crewmate {
                    out.extend(
                        me.tasks
                            .iter()
                            .enumerate()
                            .filter(|(_, t)| !t.done && t.room == room)
                            .map(|(i, _)| Action::CompleteTask(i)),
                    );
                }
                if me.role == Role::Impostor {
                    if self.timestep >= me.kill_ready_at {
                        out.extend(
                            self.players
                                .iter()
                                .filter(|p| {
                                    p.alive && p.role == Role::Crewmate && p.location == room
                                })
                                .map(|p| Action::Kill(p.id)),
                        );
                    }
                    out.extend(map.vent_targets(room).into_iter().map(|r| Action::Vent(r.into())));
                }
                if self.bodies().iter().any(|(_, r)| *r == room) {
                    out.push(Action::ReportBody);
                }
                if room == map.cafeteria && me.emergency_calls_left > 0 {
                    out.push(Action::CallEmergencyMeeting);
                }
            }
            Phase::Meeting(m) => match m.stage {
                MeetingStage::Discussion => {
                    if !m.spoken.contains(&player) {
                        out.push(Action::Speak(String::new()));
                    }
                }
                MeetingStage::Voting => {
                    if !m.votes.contains_key(&player) {
                        out.extend(
                            self.players
                                .iter()
                                .filter(|p| p.alive)
                                .map(|p| Action::Vote(VoteTarget::Player(p.id))),
                        );
                        out.push(Action::Vote(VoteTarget::Skip));
                    }
                }
            },
        }
        Ok(out)
    }

    /// Applies one action. On error the state is untouched.
    pub fn apply_action(
        &mut self,
        player: PlayerId,
        action: Action,
    ) -> Result<Vec<Event>, CoreError> {
        let menu = self.legal_actions(player)?;
        if !menu.iter().any(|a| a.same_entry(&action)) {
            return Err(CoreError::IllegalAction {
                player,
                action,
                reason: "not in the current action menu".into(),
            });
        }
        let start = self.events.len();
        match action {
            Action::Move(to) => {
                let from = std::mem::replace(&mut self.players[player.0].location, to.clone());
                self.emit(EventKind::Moved { player, from, to });
            }
            Action::Vent(to) => {
                let from = std::mem::replace(&mut self.players[player.0].location, to.clone());
                self.emit(EventKind::Vented { player, from, to });
            }
            Action::CompleteTask(task) => {
                let t = &mut self.players[player.0].tasks[task];
                t.done = true;
                let room = t.room.clone();
                self.emit(EventKind::TaskCompleted { player, task, room });
                self.finish_if_over();
            }
            Action::Kill(victim) => {
                let room = self.players[player.0].location.clone();
                self.players[victim.0].alive = false;
                self.bodies.insert(Body {
                    victim,
                    room_index: self.room_index(&room),
                });
                self.players[player.0].kill_ready_at = self.timestep + self.config.kill_cooldown;
                self.counters.kills += 1;
                self.emit(EventKind::Killed {
                    killer: player,
                    victim,
                    room,
                });
                self.finish_if_over();
            }
            Action::ReportBody => {
                let room = self.room_index(&self.players[player.0].location);
                let victim = self
                    .bodies
                    .iter()
                    .find(|b| b.room_index == room)
                    .map(|b| b.victim)
                    .expect("menu only offers a report when a body is present");
                self.start_meeting(MeetingCause::BodyReport {
                    reporter: player,
                    victim,
                });
            }
            Action::CallEmergencyMeeting => {
                self.players[player.0].emergency_calls_left -= 1;
                self.start_meeting(MeetingCause::Emergency { caller: player });
            }
            Action::Speak(text) => self.record_speech(player, &text),
            Action::Vote(target) => self.record_vote(player, target),
        }
        Ok(self.events[start..].to_vec())
    }

    fn finish_if_over(&mut self) {
        if let Some(outcome) = self.check_termination() {
            self.finish(outcome);
        }
    }

    fn start_meeting(&mut self, cause: MeetingCause) {
        let index = self.meetings_held;
        self.meetings_held += 1;
        self.counters.discussions += 1;
        self.counters.meeting_rounds.push(self.round + 1);
        self.public_log.push(PublicEvent::MeetingCalled {
            meeting_index: index,
            cause: cause.clone(),
        });
        self.emit(EventKind::MeetingCalled {
            meeting_index: index,
            cause: cause.clone(),
        });
        self.phase = Phase::Meeting(MeetingState {
            index,
            cause,
            discussion_round: 0,
            stage: MeetingStage::Discussion,
            transcript: Vec::new(),
            votes: BTreeMap::new(),
            ejected: None,
            spoken: BTreeSet::new(),
        });
    }

    fn record_speech(&mut self, player: PlayerId, text: &str) {
        let alive = self.alive_in_turn_order();
        let role = self.players[player.0].role;
        let game_id = self.game_id.clone();
        let k = self.config.discussion_rounds;
        let Phase::Meeting(m) = &mut self.phase else {
            unreachable!("speech is only legal in meetings")
        };
        let utterance =
            UtteranceRecord::new(game_id, m.index, m.discussion_round, player, role, text);
        m.transcript.push(utterance.clone());
        m.spoken.insert(player);
        if alive.iter().all(|p| m.spoken.contains(p)) {
            m.spoken.clear();
            m.discussion_round += 1;
            if m.discussion_round >= k {
                m.stage = MeetingStage::Voting;
            }
        }
        self.emit(EventKind::Utterance(utterance));
    }

    fn record_vote(&mut self, voter: PlayerId, target: VoteTarget) {
        let alive = self.alive_in_turn_order();
        let Phase::Meeting(m) = &mut self.phase else {
            unreachable!("votes are only legal in meetings")
        };
        m.votes.insert(voter, target);
        let complete = alive.iter().all(|p| m.votes.contains_key(p));
        self.emit(EventKind::VoteCast { voter, target });
        if complete {
            self.resolve_meeting();
        }
    }

    fn resolve_meeting(&mut self) {
        let Phase::Meeting(mut meeting) = std::mem::replace(&mut self.phase, Phase::Task) else {
            unreachable!()
        };
        let ejected = tally_votes(&meeting.votes);
        meeting.ejected = ejected;

        let mut counts: BTreeMap<VoteTarget, usize> = BTreeMap::new();
        for t in meeting.votes.values() {
            *counts.entry(*t).or_default() += 1;
        }
        self.emit(EventKind::VoteTally {
            meeting_index: meeting.index,
            counts: counts.into_iter().collect(),
            ejected,
        });

        match ejected {
            Some(p) => {
                self.players[p.0].alive = false;
                let role = self.players[p.0].role;
                self.counters.ejections += 1;
                self.counters.ejection_rounds.push(self.round + 1);
                self.public_log.push(PublicEvent::Ejected {
                    meeting_index: meeting.index,
                    player: p,
                    name: self.players[p.0].name.clone(),
                    was_impostor: role == Role::Impostor,
                });
                self.emit(EventKind::Ejected { player: p, role });
            }
            None => self.public_log.push(PublicEvent::NoEjection {
                meeting_index: meeting.index,
            }),
        }

        let cleared = self.bodies.len();
        self.bodies.clear();
        self.emit(EventKind::BodiesCleared { count: cleared });
        self.last_meeting = Some(meeting);

        if let Some(outcome) = self.check_termination() {
            self.finish(outcome);
            return;
        }
        self.timestep += 1;
        self.end_round();
    }
}
