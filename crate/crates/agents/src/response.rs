//! The structured response format and its parser.
//!
//! A response has three bracketed sections:
//!
//! ```text
//! [Condensed Memory] ...
//! [Thinking Process] ...
//! [Action] Move to Admin
//! ```

use deceit_core::{Action, Observation, PlayerId, VoteTarget};
use serde::{Deserialize, Serialize};

pub const MEMORY_HEADER: &str = "[Condensed Memory]";
pub const THINKING_HEADER: &str = "[Thinking Process]";
pub const ACTION_HEADER: &str = "[Action]";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentResponse {
    pub condensed_memory: String,
    pub thinking: String,
    pub action: Action,
}

/// An unusable generation. The raw text is kept for the log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abstention {
    pub raw: String,
    pub reason: String,
    pub condensed_memory: Option<String>,
    pub thinking: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parsed {
    Response(AgentResponse),
    Abstention(Abstention),
}

impl Parsed {
    pub fn response(&self) -> Option<&AgentResponse> {
        match self {
            Parsed::Response(r) => Some(r),
            Parsed::Abstention(_) => None,
        }
    }
}

/// The legal actions of one decision, each with its exact text form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionMenu {
    entries: Vec<(String, Action)>,
}

impl ActionMenu {
    pub fn new(actions: &[Action], name_of: impl Fn(PlayerId) -> String) -> Self {
        let entries = actions
            .iter()
            .map(|a| (action_label(a, &name_of), a.clone()))
            .collect();
        ActionMenu { entries }
    }

    pub fn from_observation(obs: &Observation) -> Self {
        Self::new(&obs.legal_actions, |id| obs.name_of(id))
    }

    pub fn entries(&self) -> &[(String, Action)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn offers_speak(&self) -> bool {
        self.entries.iter().any(|(_, a)| matches!(a, Action::Speak(_)))
    }

    /// Text form of an action on this menu. `Speak` renders its own text.
    pub fn label(&self, action: &Action) -> Option<String> {
        if let Action::Speak(text) = action {
            return self.offers_speak().then(|| format!("Speak: {text}"));
        }
        self.entries
            .iter()
            .find(|(_, a)| a == action)
            .map(|(l, _)| l.clone())
    }

    /// Resolves an action line: exact match first, then a unique prefix match
    /// in either direction. Case and spacing are ignored.
    pub fn resolve(&self, line: &str) -> Result<Action, String> {
        let line = clean_action_line(line);
        if line.is_empty() {
            return Err("empty action".into());
        }
        let norm = normalize(&line);
        if norm == "speak" || norm.starts_with("speak:") || norm.starts_with("speak ") {
            if !self.offers_speak() {
                return Err("Speak is not on the menu".into());
            }
            let text = line["speak".len()..]
                .trim_start()
                .strip_prefix(':')
                .unwrap_or(&line["speak".len()..])
                .trim();
            if text.is_empty() {
                return Err("empty utterance".into());
            }
            return Ok(Action::Speak(text.to_string()));
        }
        let labelled: Vec<(String, &Action)> = self
            .entries
            .iter()
            .filter(|(_, a)| !matches!(a, Action::Speak(_)))
            .map(|(l, a)| (normalize(l), a))
            .collect();
        if let Some((_, a)) = labelled.iter().find(|(l, _)| *l == norm) {
            return Ok((*a).clone());
        }
        let prefixed: Vec<&Action> = labelled
            .iter()
            .filter(|(l, _)| {
                l.starts_with(&norm) || norm.strip_prefix(l.as_str()).is_some_and(|rest| rest.starts_with(' '))
            })
            .map(|(_, a)| *a)
            .collect();
        match prefixed.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(format!("'{line}' is not on the menu")),
            _ => Err(format!("'{line}' matches {} menu entries", prefixed.len())),
        }
    }
}

/// Canonical text of one action.
pub fn action_label(action: &Action, name_of: impl Fn(PlayerId) -> String) -> String {
    match action {
        Action::Move(room) => format!("Move to {room}"),
        Action::CompleteTask(i) => format!("Complete task {i}"),
        Action::Kill(p) => format!("Kill {}", name_of(*p)),
        Action::Vent(room) => format!("Vent to {room}"),
        Action::ReportBody => "Report body".into(),
        Action::CallEmergencyMeeting => "Call emergency meeting".into(),
        Action::Speak(text) if text.is_empty() => "Speak: <your message>".into(),
        Action::Speak(text) => format!("Speak: {text}"),
        Action::Vote(VoteTarget::Player(p)) => format!("Vote {}", name_of(*p)),
        Action::Vote(VoteTarget::Skip) => "Vote Skip".into(),
    }
}

fn normalize(s: &str) -> String {
    s.replace(['*', '`'], "")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Drops markdown emphasis, quotes and a trailing period around an action.
fn clean_action_line(s: &str) -> String {
    let emphasis = |c: char| matches!(c, '*' | '`' | '"' | '\'');
    let head = s.trim().trim_start_matches(emphasis).trim_start();
    // Utterances are kept verbatim after the tag.
    if head.to_ascii_lowercase().starts_with("speak") {
        return head.trim_end().to_string();
    }
    head.trim_end_matches(emphasis).trim().trim_end_matches('.').trim().to_string()
}

fn find_sections(raw: &str) -> [Option<String>; 3] {
    let lower = raw.to_ascii_lowercase();
    let headers = [MEMORY_HEADER, THINKING_HEADER, ACTION_HEADER];
    let starts: Vec<Option<usize>> = headers
        .iter()
        .map(|h| lower.find(&h.to_ascii_lowercase()))
        .collect();
    let mut out: [Option<String>; 3] = Default::default();
    for (i, start) in starts.iter().enumerate() {
        let Some(start) = *start else { continue };
        let body_start = start + headers[i].len();
        let end = starts
            .iter()
            .flatten()
            .copied()
            .filter(|s| *s > start)
            .min()
            .unwrap_or(raw.len());
        out[i] = Some(raw[body_start..end].trim().to_string());
    }
    out
}

/// Parses a generation against the offered menu. Memory and thinking default
/// to empty when missing; a missing or unresolvable action is an abstention.
pub fn parse_response(raw: &str, menu: &ActionMenu) -> Parsed {
    let [memory, thinking, action] = find_sections(raw);
    let abstain = |reason: String| {
        Parsed::Abstention(Abstention {
            raw: raw.to_string(),
            reason,
            condensed_memory: memory.clone(),
            thinking: thinking.clone(),
        })
    };
    if raw.trim().is_empty() {
        return abstain("empty generation".into());
    }
    let Some(action_text) = action.clone() else {
        return abstain("missing [Action] section".into());
    };
    let line = if normalize(&action_text).starts_with("speak") {
        action_text
    } else {
        action_text.lines().next().unwrap_or("").to_string()
    };
    match menu.resolve(&line) {
        Ok(action) => Parsed::Response(AgentResponse {
            condensed_memory: memory.unwrap_or_default(),
            thinking: thinking.unwrap_or_default(),
            action,
        }),
        Err(reason) => abstain(reason),
    }
}

/// Writes a response in the format `parse_response` reads.
pub fn render_response(resp: &AgentResponse, menu: &ActionMenu) -> Option<String> {
    let action = menu.label(&resp.action)?;
    Some(format!(
        "{MEMORY_HEADER}\n{}\n{THINKING_HEADER}\n{}\n{ACTION_HEADER} {action}",
        resp.condensed_memory, resp.thinking
    ))
}
