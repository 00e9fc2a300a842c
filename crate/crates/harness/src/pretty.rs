//! Human-readable rendering of a game log.

use deceit_core::model::player_name;
use deceit_core::{Event, EventKind, GameRecord, MeetingCause, PlayerId, Stage, VoteTarget};

fn name(record: &GameRecord, id: PlayerId) -> String {
    record
        .players
        .iter()
        .find(|p| p.id == id)
        .map(|p| p.name.clone())
        .unwrap_or_else(|| player_name(id))
}

fn target(record: &GameRecord, t: &VoteTarget) -> String {
    match t {
        VoteTarget::Player(p) => name(record, *p),
        VoteTarget::Skip => "skip".into(),
    }
}

fn stage(s: Stage) -> &'static str {
    match s {
        Stage::Task => "task",
        Stage::Discussion => "discussion",
        Stage::Vote => "vote",
    }
}

/// One line per event, or `None` for agent bookkeeping that the other
/// events already describe.
pub fn describe(record: &GameRecord, event: &Event) -> Option<String> {
    let n = |id: PlayerId| name(record, id);
    let body = match &event.event {
        EventKind::GameStarted { players, .. } => {
            let roster: Vec<String> = players.iter().map(|p| format!("{} ({})", p.name, p.role)).collect();
            format!("game started: {}", roster.join(", "))
        }
        EventKind::AgentTurn { .. } => return None,
        EventKind::NoOp { player, stage: s, reason } => format!("{} did nothing during {} ({reason})", n(*player), stage(*s)),
        EventKind::Moved { player, from, to } => format!("{} moved {from} -> {to}", n(*player)),
        EventKind::Vented { player, from, to } => format!("{} vented {from} -> {to}", n(*player)),
        EventKind::TaskCompleted { player, task, room } => format!("{} completed task {task} in {room}", n(*player)),
        EventKind::Killed { killer, victim, room } => format!("{} killed {} in {room}", n(*killer), n(*victim)),
        EventKind::MeetingCalled { meeting_index, cause } => match cause {
            MeetingCause::BodyReport { reporter, victim } => {
                format!("meeting {meeting_index}: {} reported the body of {}", n(*reporter), n(*victim))
            }
            MeetingCause::Emergency { caller } => format!("meeting {meeting_index}: emergency called by {}", n(*caller)),
        },
        EventKind::Utterance(u) if u.is_abstention() => {
            format!("  [{}] {}: (no reply)", u.discussion_round, n(u.speaker_id))
        }
        EventKind::Utterance(u) => format!("  [{}] {}: {}", u.discussion_round, n(u.speaker_id), u.text),
        EventKind::VoteCast { voter, target: t } => format!("  {} voted {}", n(*voter), target(record, t)),
        EventKind::VoteTally { counts, ejected, .. } => {
            let tally: Vec<String> = counts.iter().map(|(t, c)| format!("{}={c}", target(record, t))).collect();
            let result = ejected.map(n).unwrap_or_else(|| "nobody".into());
            format!("votes {} -> ejected {result}", tally.join(" "))
        }
        EventKind::Ejected { player, role } => format!("{} was ejected and was a {role}", n(*player)),
        EventKind::BodiesCleared { count } => format!("{count} bodies cleared"),
        EventKind::GameEnded { outcome } => format!("game over: {outcome:?}"),
    };
    Some(format!("t={:<3} r={:<3} {body}", event.timestep, event.round))
}

/// The whole log, headed by the game id, configuration and outcome.
pub fn render(record: &GameRecord) -> String {
    let mut out = format!(
        "game {} ({}, seed {}): {:?}\n",
        record.game_id,
        record.config.label(),
        record.seed,
        record.outcome
    );
    for e in &record.events {
        if let Some(line) = describe(record, e) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}
