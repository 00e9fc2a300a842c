use std::fmt;

use serde::{Deserialize, Serialize};

use crate::map::MapSpec;

/// Player counts outside this range are accepted with a warning.
pub const STANDARD_GROUP_SIZES: std::ops::RangeInclusive<usize> = 4..=8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub num_crew: usize,
    pub num_impostors: usize,
    #[serde(default = "defaults::tasks_per_crew")]
    pub tasks_per_crew: usize,
    #[serde(default = "defaults::discussion_rounds")]
    pub discussion_rounds: usize,
    #[serde(default = "defaults::kill_cooldown")]
    pub kill_cooldown: u32,
    #[serde(default = "defaults::emergency_meetings")]
    pub emergency_meetings_per_player: u32,
    #[serde(default = "defaults::max_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub map: MapSpec,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn tasks_per_crew() -> usize {
        3
    }
    pub fn discussion_rounds() -> usize {
        3
    }
    pub fn kill_cooldown() -> u32 {
        3
    }
    pub fn emergency_meetings() -> u32 {
        1
    }
    pub fn max_rounds() -> u32 {
        100
    }
}

impl GameConfig {
    /// A config with the given team sizes and every other field at its default.
    pub fn new(num_crew: usize, num_impostors: usize) -> Self {
        Self {
            num_crew,
            num_impostors,
            tasks_per_crew: defaults::tasks_per_crew(),
            discussion_rounds: defaults::discussion_rounds(),
            kill_cooldown: defaults::kill_cooldown(),
            emergency_meetings_per_player: defaults::emergency_meetings(),
            max_rounds: defaults::max_rounds(),
            map: MapSpec::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn num_players(&self) -> usize {
        self.num_crew + self.num_impostors
    }

    /// Short label such as `5v2`.
    pub fn label(&self) -> String {
        format!("{}v{}", self.num_crew, self.num_impostors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
    pub severity: Severity,
}

impl Violation {
    fn error(field: &str, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
            severity: Severity::Error,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "violation",
        };
        write!(f, "{sev}: {}: {}", self.field, self.rule)
    }
}

/// Checks every configuration rule and returns all problems found.
///
/// Warnings do not prevent a game from starting; errors do.
pub fn validate_config(config: &GameConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if config.num_crew < 1 {
        out.push(Violation::error("num_crew", "must be at least 1"));
    }
    if config.num_impostors < 1 {
        out.push(Violation::error("num_impostors", "must be at least 1"));
    }
    if config.tasks_per_crew < 1 {
        out.push(Violation::error("tasks_per_crew", "must be at least 1"));
    }
    if config.discussion_rounds < 1 {
        out.push(Violation::error("discussion_rounds", "must be at least 1"));
    }
    if config.max_rounds < 1 {
        out.push(Violation::error("max_rounds", "must be at least 1"));
    }

    let total = config.num_players();
    if total < 2 {
        out.push(Violation::error(
            "num_players",
            format!("total players {total} < 2"),
        ));
    } else if !STANDARD_GROUP_SIZES.contains(&total) {
        let bound = if total < *STANDARD_GROUP_SIZES.start() {
            format!("< {}", STANDARD_GROUP_SIZES.start())
        } else {
            format!("> {}", STANDARD_GROUP_SIZES.end())
        };
        out.push(Violation {
            field: "num_players".into(),
            rule: format!("total players {total} {bound}"),
            severity: Severity::Warning,
        });
    }

    if config.num_impostors >= config.num_crew && config.num_impostors >= 1 {
        out.push(Violation::error(
            "num_impostors",
            format!(
                "impostors ({}) must be fewer than crewmates ({}) at start",
                config.num_impostors, config.num_crew
            ),
        ));
    }

    out.extend(config.map.validate());
    out
}
