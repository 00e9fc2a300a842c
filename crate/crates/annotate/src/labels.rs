use std::fmt;

use serde::{Deserialize, Serialize};

/// Speech-act categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpeechAct {
    Representatives,
    Directives,
    Commissives,
    Expressives,
    Declarations,
}

impl SpeechAct {
    pub const ALL: [SpeechAct; 5] = [
        SpeechAct::Representatives,
        SpeechAct::Directives,
        SpeechAct::Commissives,
        SpeechAct::Expressives,
        SpeechAct::Declarations,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpeechAct::Representatives => "Representatives",
            SpeechAct::Directives => "Directives",
            SpeechAct::Commissives => "Commissives",
            SpeechAct::Expressives => "Expressives",
            SpeechAct::Declarations => "Declarations",
        }
    }

    /// Reads a classifier reply. Case, surrounding whitespace, quotes,
    /// trailing punctuation and singular/plural are ignored; anything else
    /// is `None` (unclassifiable).
    pub fn normalize(reply: &str) -> Option<SpeechAct> {
        let word = canonical_word(reply)?;
        SpeechAct::ALL
            .into_iter()
            .find(|l| singular(&l.as_str().to_ascii_lowercase()) == singular(&word))
    }
}

impl fmt::Display for SpeechAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deception categories. `Missing` marks an absent or uninterpretable reply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeceptionLabel {
    Falsification,
    Concealment,
    Equivocation,
    Missing,
}

impl DeceptionLabel {
    pub const ALL: [DeceptionLabel; 4] = [
        DeceptionLabel::Falsification,
        DeceptionLabel::Concealment,
        DeceptionLabel::Equivocation,
        DeceptionLabel::Missing,
    ];

    /// The three labels a classifier may produce.
    pub const CLASSES: [DeceptionLabel; 3] = [
        DeceptionLabel::Falsification,
        DeceptionLabel::Concealment,
        DeceptionLabel::Equivocation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeceptionLabel::Falsification => "Falsification",
            DeceptionLabel::Concealment => "Concealment",
            DeceptionLabel::Equivocation => "Equivocation",
            DeceptionLabel::Missing => "Missing",
        }
    }

    /// Reads a classifier reply with the same tolerance as
    /// [`SpeechAct::normalize`]. Unmatched replies are `Missing`.
    pub fn normalize(reply: &str) -> DeceptionLabel {
        let Some(word) = canonical_word(reply) else {
            return DeceptionLabel::Missing;
        };
        DeceptionLabel::CLASSES
            .into_iter()
            .find(|l| singular(&l.as_str().to_ascii_lowercase()) == singular(&word))
            .unwrap_or(DeceptionLabel::Missing)
    }

    /// Parses a stored label name, including `Missing`.
    pub fn from_name(name: &str) -> Option<DeceptionLabel> {
        DeceptionLabel::ALL.into_iter().find(|l| l.as_str() == name)
    }
}

impl fmt::Display for DeceptionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower-cased single word with wrapping quotes, markup and trailing
/// punctuation removed. `None` for empty or multi-word replies.
fn canonical_word(reply: &str) -> Option<String> {
    let strip = |c: char| {
        c.is_whitespace()
            || matches!(
                c,
                '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | '`' | '*' | '‘' | '’' | '“' | '”' | '(' | ')'
            )
    };
    let word = reply.trim_matches(strip);
    if word.is_empty() || word.contains(char::is_whitespace) {
        return None;
    }
    Some(word.to_lowercase())
}

fn singular(word: &str) -> &str {
    word.strip_suffix('s').unwrap_or(word)
}
