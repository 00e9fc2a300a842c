//! Agents backed by a chat-completion model.

use std::collections::VecDeque;
use std::sync::Arc;

use deceit_core::{Action, Agent, AgentTrace, Observation, Reply, Stage, VoteTarget};

use crate::chat::{ChatClient, Completion};
use crate::prompt::{build_prompt, describe_event, PromptContext, RoleInstructions};
use crate::response::{parse_response, ActionMenu, Parsed};

pub const DEFAULT_HISTORY_WINDOW: usize = 20;

/// Anything that answers a system + user message pair.
pub trait Completer: Send + Sync {
    fn complete(&self, system: &str, user: &str) -> Completion;
}

impl Completer for ChatClient {
    fn complete(&self, system: &str, user: &str) -> Completion {
        ChatClient::complete(self, system, user)
    }
}

impl<C: Completer + ?Sized> Completer for Arc<C> {
    fn complete(&self, system: &str, user: &str) -> Completion {
        (**self).complete(system, user)
    }
}

/// One seat controlled by a chat model. The previous condensed memory is fed
/// back verbatim, along with the last `window` history lines the seat has
/// observed.
pub struct LlmAgent<C: Completer = ChatClient> {
    client: C,
    instructions: Arc<RoleInstructions>,
    window: usize,
    memory: String,
    history: VecDeque<String>,
}

impl<C: Completer> LlmAgent<C> {
    pub fn new(client: C, instructions: Arc<RoleInstructions>, window: usize) -> Self {
        LlmAgent {
            client,
            instructions,
            window,
            memory: String::new(),
            history: VecDeque::new(),
        }
    }

    pub fn memory(&self) -> &str {
        &self.memory
    }

    pub fn history(&self) -> impl Iterator<Item = &String> {
        self.history.iter()
    }

    fn remember(&mut self, line: String) {
        self.history.push_back(line);
        while self.history.len() > self.window {
            self.history.pop_front();
        }
    }

    fn ask(&mut self, obs: &Observation) -> (Parsed, AgentTrace) {
        let history: Vec<String> = self.history.iter().cloned().collect();
        let prompt = build_prompt(
            obs,
            &self.instructions,
            &PromptContext {
                previous_memory: &self.memory,
                history: &history,
            },
        );
        for e in &obs.public_events {
            self.remember(describe_event(e, obs));
        }
        if obs.stage == Stage::Task {
            let seen: Vec<&str> = obs.visible_players.iter().map(|p| p.name.as_str()).collect();
            let mut line = format!("Timestep {}: in {}", obs.timestep, obs.current_room);
            if !seen.is_empty() {
                line.push_str(&format!(" with {}", seen.join(", ")));
            }
            if !obs.visible_bodies.is_empty() {
                let bodies: Vec<&str> = obs.visible_bodies.iter().map(|p| p.name.as_str()).collect();
                line.push_str(&format!("; body of {}", bodies.join(", ")));
            }
            self.remember(line);
        }

        let completion = self.client.complete(&prompt.system, &prompt.user);
        let menu = ActionMenu::from_observation(obs);
        let parsed = parse_response(&completion.text, &menu);
        let (memory, thinking) = match &parsed {
            Parsed::Response(r) => (Some(r.condensed_memory.clone()), Some(r.thinking.clone())),
            Parsed::Abstention(a) => (a.condensed_memory.clone(), a.thinking.clone()),
        };
        if let Parsed::Response(r) = &parsed {
            self.memory = r.condensed_memory.clone();
            if let Some(label) = menu.label(&r.action) {
                self.remember(format!("Timestep {}: you chose {label}", obs.timestep));
            }
        }
        let trace = AgentTrace {
            prompt: Some(prompt.text()),
            raw: Some(completion.text),
            condensed_memory: memory,
            thinking,
        };
        (parsed, trace)
    }
}

impl<C: Completer> Agent for LlmAgent<C> {
    fn decide(&mut self, obs: &Observation) -> Reply<Action> {
        let (parsed, trace) = self.ask(obs);
        match parsed {
            Parsed::Response(r) => Reply::new(r.action),
            Parsed::Abstention(_) => Reply::abstain(),
        }
        .with_trace(trace)
    }

    fn speak(&mut self, obs: &Observation) -> Reply<String> {
        let (parsed, trace) = self.ask(obs);
        match parsed {
            Parsed::Response(r) => match r.action {
                Action::Speak(text) => Reply::new(text),
                _ => Reply::abstain(),
            },
            Parsed::Abstention(_) => Reply::abstain(),
        }
        .with_trace(trace)
    }

    fn vote(&mut self, obs: &Observation) -> Reply<VoteTarget> {
        let (parsed, trace) = self.ask(obs);
        match parsed {
            Parsed::Response(r) => match r.action {
                Action::Vote(t) => Reply::new(t),
                _ => Reply::abstain(),
            },
            Parsed::Abstention(_) => Reply::abstain(),
        }
        .with_trace(trace)
    }
}
