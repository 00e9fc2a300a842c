use std::sync::Arc;

use deceit_agents::scripted::{scripted_roster, ScriptedAgent, ScriptedProfile};
use deceit_core::engine::new_game;
use deceit_core::{run_game, Action, Agent, EventKind, GameConfig, MeetingCause, Role, Stage};

fn seat_of(state: &deceit_core::GameState, role: Role) -> usize {
    state.players.iter().position(|p| p.role == role).unwrap()
}

#[test]
fn task_rusher_completes_colocated_task() {
    let mut state = new_game(GameConfig::new(3, 1).with_seed(4)).unwrap();
    let crew = seat_of(&state, Role::Crewmate);
    let room = state.players[crew].tasks[0].room.clone();
    state.players[crew].location = room;
    let obs = state.peek_observation(state.players[crew].id).unwrap();
    let mut agent = ScriptedAgent::new(ScriptedProfile::default(), Arc::new(state.config.map.clone()), 1);
    assert_eq!(agent.decide(&obs).value, Some(Action::CompleteTask(0)));
}

#[test]
fn task_rusher_steps_toward_nearest_task() {
    let state = new_game(GameConfig::new(3, 1).with_seed(9)).unwrap();
    let crew = seat_of(&state, Role::Crewmate);
    let map = state.config.map.clone();
    let start = state.players[crew].location.clone();
    let obs = state.peek_observation(state.players[crew].id).unwrap();
    let mut agent = ScriptedAgent::new(ScriptedProfile::default(), Arc::new(map.clone()), 1);
    let Some(Action::Move(next)) = agent.decide(&obs).value else {
        panic!("expected a move");
    };
    let nearest = |from: &str| {
        let d = map.distances_from(from);
        state.players[crew].tasks.iter().map(|t| d[&t.room]).min().unwrap()
    };
    assert_eq!(nearest(&next) + 1, nearest(&start));
}

#[test]
fn hunter_kills_when_ready() {
    let mut state = new_game(GameConfig::new(3, 1).with_seed(2)).unwrap();
    let imp = seat_of(&state, Role::Impostor);
    state.timestep = state.players[imp].kill_ready_at;
    let obs = state.peek_observation(state.players[imp].id).unwrap();
    let mut agent = ScriptedAgent::new(ScriptedProfile::default(), Arc::new(state.config.map.clone()), 3);
    assert!(matches!(agent.decide(&obs).value, Some(Action::Kill(_))));
}

#[test]
fn hunter_waits_beside_crew_during_cooldown() {
    let state = new_game(GameConfig::new(3, 1).with_seed(2)).unwrap();
    let imp = seat_of(&state, Role::Impostor);
    let obs = state.peek_observation(state.players[imp].id).unwrap();
    let mut agent = ScriptedAgent::new(ScriptedProfile::default(), Arc::new(state.config.map.clone()), 3);
    assert_eq!(agent.decide(&obs).value, None);
}

#[test]
fn scripted_games_are_deterministic() {
    for seed in 0..5 {
        let config = GameConfig::new(5, 2).with_seed(seed);
        let run = || {
            let mut agents = scripted_roster(ScriptedProfile::default(), &config.map, 7, seed);
            run_game(config.clone(), &mut agents).unwrap().to_json_line().unwrap()
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn accuser_names_a_player_after_body_report() {
    let mut found = None;
    for seed in 0..50u64 {
        let config = GameConfig::new(5, 1).with_seed(seed);
        let mut agents = scripted_roster(ScriptedProfile::default(), &config.map, 6, seed);
        let record = run_game(config, &mut agents).unwrap();
        let report = record.events.iter().find_map(|e| match &e.event {
            EventKind::MeetingCalled {
                cause: MeetingCause::BodyReport { victim, .. },
                ..
            } => Some(*victim),
            _ => None,
        });
        let Some(victim) = report else { continue };
        let first = record
            .utterances()
            .into_iter()
            .find(|u| u.speaker_role == Role::Crewmate && u.meeting_index == 0)
            .unwrap();
        found = Some((seed, victim, first.text.clone()));
        break;
    }
    let (seed, victim, text) = found.expect("some seed produces a body report");
    let victim = deceit_core::model::player_name(victim);
    assert!(text.starts_with(&format!("{victim} is dead. I think ")), "{text}");
    let named = deceit_core::model::player_name;
    assert!((0..6).any(|i| text.contains(&format!("I think {} is suspicious", named(deceit_core::PlayerId(i))))));
    // Rerunning the same seed reproduces the utterance exactly.
    let config = GameConfig::new(5, 1).with_seed(seed);
    let mut agents = scripted_roster(ScriptedProfile::default(), &config.map, 6, seed);
    let again = run_game(config, &mut agents).unwrap();
    assert!(again.utterances().any(|u| u.text == text));
}

#[test]
fn standard_grid_terminates_without_timeouts() {
    for (x, y) in [(3, 1), (6, 1), (5, 2), (5, 3)] {
        let mut timeouts = 0;
        for seed in 0..20 {
            let config = GameConfig::new(x, y).with_seed(seed);
            let mut agents = scripted_roster(ScriptedProfile::default(), &config.map, x + y, seed);
            let record = run_game(config, &mut agents).unwrap();
            if record.outcome == deceit_core::Outcome::Timeout {
                timeouts += 1;
            }
            assert!(record
                .events
                .iter()
                .any(|e| matches!(e.event, EventKind::AgentTurn { stage: Stage::Task, .. })));
        }
        assert!(timeouts <= 1, "{x}v{y}: {timeouts} timeouts");
    }
}
