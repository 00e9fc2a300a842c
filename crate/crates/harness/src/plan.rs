//! Experiment plans: which configurations to play, how often, and with
//! which players.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use deceit_agents::{ChatEndpointConfig, ScriptedProfile, DEFAULT_HISTORY_WINDOW};
use deceit_core::{validate_config, GameConfig};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    /// Directory and file stem for this configuration. Defaults to the
    /// config label, e.g. `5v2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub config: GameConfig,
    pub repetitions: usize,
}

impl PlanEntry {
    pub fn new(config: GameConfig, repetitions: usize) -> Self {
        PlanEntry {
            name: None,
            config,
            repetitions,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.config.label())
    }
}

fn default_window() -> usize {
    DEFAULT_HISTORY_WINDOW
}

/// Who sits at every seat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RosterSpec {
    Scripted {
        #[serde(default)]
        profile: ScriptedProfile,
    },
    Chat {
        endpoint: ChatEndpointConfig,
        #[serde(default = "default_window")]
        history_window: usize,
    },
}

impl Default for RosterSpec {
    fn default() -> Self {
        RosterSpec::Scripted {
            profile: ScriptedProfile::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub configs: Vec<PlanEntry>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub roster: RosterSpec,
}

fn default_output() -> PathBuf {
    PathBuf::from("corpus")
}

impl ExperimentPlan {
    pub fn new(configs: Vec<PlanEntry>, base_seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan {
            configs,
            base_seed,
            output_dir: output_dir.into(),
            roster: RosterSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        let plan: ExperimentPlan = serde_json::from_str(&text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.configs.is_empty() {
            return Err(HarnessError::Plan("no configurations".into()));
        }
        let mut labels = BTreeSet::new();
        for entry in &self.configs {
            let label = entry.label();
            if entry.repetitions == 0 {
                return Err(HarnessError::Plan(format!("{label}: repetitions must be at least 1")));
            }
            if label.is_empty() || label.contains(['/', '\\']) || label.starts_with('.') {
                return Err(HarnessError::Plan(format!("unusable configuration name '{label}'")));
            }
            if !labels.insert(label.clone()) {
                return Err(HarnessError::Plan(format!("duplicate configuration name '{label}'")));
            }
            if let Some(v) = validate_config(&entry.config).into_iter().find(|v| v.is_error()) {
                return Err(HarnessError::Plan(format!("{label}: {v}")));
            }
        }
        Ok(())
    }

    pub fn total_games(&self) -> usize {
        self.configs.iter().map(|c| c.repetitions).sum()
    }

    /// The configurations, each with a name, for sizes 4 to 8.
    pub fn default_grid(repetitions: usize) -> Vec<PlanEntry> {
        [(3, 1), (4, 1), (3, 2), (5, 1), (4, 2), (6, 1), (5, 2), (4, 3), (7, 1), (6, 2), (5, 3)]
            .into_iter()
            .map(|(x, y)| PlanEntry::new(GameConfig::new(x, y), repetitions))
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one game. Depends only on its position in the plan, so resumed or
/// parallel runs reproduce it.
pub fn game_seed(base_seed: u64, config_index: usize, repetition: usize) -> u64 {
    base_seed.wrapping_add(splitmix64(((config_index as u64) << 32) | repetition as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(game_seed(7, 1, 2), game_seed(7, 1, 2));
        let mut seen = BTreeSet::new();
        for c in 0..11 {
            for r in 0..100 {
                assert!(seen.insert(game_seed(0, c, r)));
            }
        }
        assert_eq!(game_seed(5, 0, 0), 5u64.wrapping_add(splitmix64(0)));
    }

    #[test]
    fn plan_json_defaults() {
        let plan: ExperimentPlan = serde_json::from_str(
            r#"{"configs":[{"config":{"num_crew":3,"num_impostors":1},"repetitions":2}]}"#,
        )
        .unwrap();
        assert_eq!(plan.base_seed, 0);
        assert_eq!(plan.roster, RosterSpec::default());
        assert_eq!(plan.configs[0].label(), "3v1");
        plan.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_plans() {
        let mut plan = ExperimentPlan::new(vec![PlanEntry::new(GameConfig::new(3, 1), 0)], 0, "x");
        assert!(plan.validate().is_err());
        plan.configs[0].repetitions = 1;
        plan.configs.push(PlanEntry::new(GameConfig::new(3, 1), 1));
        assert!(matches!(plan.validate(), Err(HarnessError::Plan(m)) if m.contains("duplicate")));
        plan.configs.pop();
        plan.configs.push(PlanEntry::new(GameConfig::new(2, 2), 1));
        assert!(plan.validate().is_err());
    }

    #[test]
    fn default_grid_covers_sizes_four_to_eight() {
        let grid = ExperimentPlan::default_grid(100);
        assert_eq!(grid.len(), 11);
        let sizes: BTreeSet<usize> = grid.iter().map(|e| e.config.num_players()).collect();
        assert_eq!(sizes, (4..=8).collect());
    }
}
