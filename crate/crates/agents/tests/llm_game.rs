use std::sync::Arc;

use deceit_agents::chat::{ChatClient, ChatEndpointConfig};
use deceit_agents::llm::{LlmAgent, DEFAULT_HISTORY_WINDOW};
use deceit_agents::mock::{MockChatServer, MockMode};
use deceit_agents::prompt::RoleInstructions;
use deceit_core::model::player_name;
use deceit_core::{run_game, EventKind, GameConfig, GameRecord, Role};

fn llm_game(config: GameConfig, malformed_every: usize) -> GameRecord {
    let server = MockChatServer::start(MockMode::AutoPlayer { malformed_every }).unwrap();
    let mut endpoint = ChatEndpointConfig::new(server.base_url(), "mock");
    endpoint.retry_backoff_ms = 1;
    let client = ChatClient::new(endpoint).unwrap();
    let instructions = Arc::new(RoleInstructions::default());
    let mut agents: Vec<_> = (0..config.num_players())
        .map(|_| LlmAgent::new(client.clone(), instructions.clone(), DEFAULT_HISTORY_WINDOW))
        .collect();
    run_game(config, &mut agents).unwrap()
}

#[test]
fn mock_backed_game_terminates_and_logs_abstentions() {
    let record = llm_game(GameConfig::new(3, 1).with_seed(11), 5);
    assert!(matches!(
        record.events.last().unwrap().event,
        EventKind::GameEnded { .. }
    ));
    let abstained = record
        .events
        .iter()
        .filter(|e| matches!(&e.event, EventKind::NoOp { reason, .. } if reason == "abstained"))
        .count();
    assert!(abstained > 0, "malformed replies should become abstentions");
    let traced = record.events.iter().find_map(|e| match &e.event {
        EventKind::AgentTurn { trace, .. } => Some(trace.clone()),
        _ => None,
    });
    let trace = traced.unwrap();
    assert!(trace.prompt.unwrap().contains("[Condensed Memory]"));
    assert!(trace.raw.is_some());
}

#[test]
fn prompts_never_leak_hidden_roles() {
    for seed in [1u64, 2, 3] {
        let record = llm_game(GameConfig::new(4, 2).with_seed(seed), 7);
        let revealed: Vec<String> = record
            .events
            .iter()
            .filter_map(|e| match &e.event {
                EventKind::Ejected { player, .. } => Some(player_name(*player)),
                _ => None,
            })
            .collect();
        for e in &record.events {
            let EventKind::AgentTurn { player, trace, .. } = &e.event else {
                continue;
            };
            if record.role_of(*player) != Some(Role::Crewmate) {
                continue;
            }
            let prompt = trace.prompt.as_deref().unwrap();
            for info in &record.players {
                if info.id == *player || revealed.contains(&info.name) {
                    continue;
                }
                for line in prompt.lines() {
                    let named = line
                        .split(|c: char| !c.is_alphanumeric())
                        .any(|w| w == info.name);
                    let spoken = line.trim_start().starts_with("Round ");
                    assert!(
                        !(named && !spoken && line.contains("Impostor")),
                        "role of {} leaked to {player}: {line}",
                        info.name
                    );
                }
            }
        }
    }
}
