use deceit_agents::response::{parse_response, render_response, ActionMenu, AgentResponse, Parsed};
use deceit_core::model::player_name;
use deceit_core::{Action, PlayerId, VoteTarget};
use proptest::prelude::*;

fn rooms() -> Vec<String> {
    ["Cafeteria", "Weapons", "Navigation", "Admin", "Storage", "Electrical", "Medbay", "O2"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn task_menu() -> impl Strategy<Value = Vec<Action>> {
    let rooms = rooms();
    (
        proptest::sample::subsequence(rooms.clone(), 1..4),
        proptest::sample::subsequence((0usize..3).collect::<Vec<_>>(), 0..3),
        proptest::sample::subsequence((0usize..8).collect::<Vec<_>>(), 0..3),
        proptest::sample::subsequence(rooms, 0..2),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(moves, tasks, kills, vents, report, emergency)| {
            let mut m: Vec<Action> = moves.into_iter().map(Action::Move).collect();
            m.extend(tasks.into_iter().map(Action::CompleteTask));
            m.extend(kills.into_iter().map(|p| Action::Kill(PlayerId(p))));
            m.extend(vents.into_iter().map(Action::Vent));
            if report {
                m.push(Action::ReportBody);
            }
            if emergency {
                m.push(Action::CallEmergencyMeeting);
            }
            m
        })
}

fn vote_menu() -> impl Strategy<Value = Vec<Action>> {
    proptest::sample::subsequence((0usize..8).collect::<Vec<_>>(), 1..8).prop_map(|ps| {
        let mut m: Vec<Action> = ps
            .into_iter()
            .map(|p| Action::Vote(VoteTarget::Player(PlayerId(p))))
            .collect();
        m.push(Action::Vote(VoteTarget::Skip));
        m
    })
}

/// Section text: anything without brackets, trimmed and non-empty.
fn section_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 ,.'!?\n-]{1,80}"
        .prop_map(|s| s.trim().to_string())
        .prop_filter("non-empty", |s| !s.is_empty())
}

fn speech() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 ,.'!?-]{1,120}"
        .prop_map(|s| s.trim().to_string())
        .prop_filter("non-empty", |s| !s.is_empty())
}

proptest! {
    #[test]
    fn task_and_vote_responses_round_trip(
        menu in prop_oneof![task_menu(), vote_menu()],
        pick in any::<prop::sample::Index>(),
        memory in section_text(),
        thinking in section_text(),
    ) {
        let action = pick.get(&menu).clone();
        let menu = ActionMenu::new(&menu, player_name);
        let resp = AgentResponse { condensed_memory: memory, thinking, action };
        let raw = render_response(&resp, &menu).unwrap();
        prop_assert_eq!(parse_response(&raw, &menu), Parsed::Response(resp));
    }

    #[test]
    fn speech_round_trips(memory in section_text(), thinking in section_text(), text in speech()) {
        let menu = ActionMenu::new(&[Action::Speak(String::new())], player_name);
        let resp = AgentResponse { condensed_memory: memory, thinking, action: Action::Speak(text) };
        let raw = render_response(&resp, &menu).unwrap();
        prop_assert_eq!(parse_response(&raw, &menu), Parsed::Response(resp));
    }

    #[test]
    fn parser_never_invents_actions(raw in "\\PC{0,200}", menu in task_menu()) {
        let m = ActionMenu::new(&menu, player_name);
        if let Parsed::Response(r) = parse_response(&raw, &m) {
            prop_assert!(menu.iter().any(|a| a.same_entry(&r.action)));
        }
    }
}
