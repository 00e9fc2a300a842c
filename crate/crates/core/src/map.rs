//! Room graph the game is played on.
//!
//! A map is a set of named rooms, an undirected walking graph, an undirected
//! vent graph usable only by impostors, and the designated cafeteria where
//! emergency meetings can be called. Maps are plain JSON so experiments can
//! swap layouts without recompiling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Severity, Violation};
use crate::error::CoreError;

const DEFAULT_MAP_JSON: &str = include_str!("../maps/default.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSpec {
    pub rooms: Vec<String>,
    pub adjacency: Vec<(String, String)>,
    pub vents: Vec<(String, String)>,
    pub cafeteria: String,
}

impl Default for MapSpec {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_MAP_JSON).expect("bundled default map is valid JSON")
    }
}

impl MapSpec {
    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn contains(&self, room: &str) -> bool {
        self.rooms.iter().any(|r| r == room)
    }

    /// Rooms reachable by walking one edge, sorted by name.
    pub fn neighbors(&self, room: &str) -> Vec<&str> {
        edge_targets(&self.adjacency, room)
    }

    /// Rooms reachable through one vent edge, sorted by name.
    pub fn vent_targets(&self, room: &str) -> Vec<&str> {
        edge_targets(&self.vents, room)
    }

    /// Walking distances from `from` to every reachable room.
    pub fn distances_from(&self, from: &str) -> BTreeMap<String, usize> {
        let mut dist = BTreeMap::new();
        if !self.contains(from) {
            return dist;
        }
        dist.insert(from.to_string(), 0);
        let mut queue = VecDeque::from([from.to_string()]);
        while let Some(room) = queue.pop_front() {
            let d = dist[&room];
            for next in self.neighbors(&room) {
                if !dist.contains_key(next) {
                    dist.insert(next.to_string(), d + 1);
                    queue.push_back(next.to_string());
                }
            }
        }
        dist
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut err = |rule: String| {
            out.push(Violation {
                field: "map".into(),
                rule,
                severity: Severity::Error,
            })
        };

        if self.rooms.is_empty() {
            err("map has no rooms".into());
            return out;
        }
        let names: BTreeSet<&str> = self.rooms.iter().map(String::as_str).collect();
        if names.len() != self.rooms.len() {
            err("room names must be unique".into());
        }
        if !names.contains(self.cafeteria.as_str()) {
            err(format!("cafeteria '{}' is not a room", self.cafeteria));
        }
        for (kind, edges) in [("adjacency", &self.adjacency), ("vents", &self.vents)] {
            for (a, b) in edges {
                if a == b {
                    err(format!("{kind} self-edge on '{a}'"));
                }
                for end in [a, b] {
                    if !names.contains(end.as_str()) {
                        err(format!("{kind} edge references unknown room '{end}'"));
                    }
                }
            }
        }
        let reached = self.distances_from(&self.rooms[0]);
        if reached.len() != names.len() {
            let missing: Vec<&str> = names
                .iter()
                .copied()
                .filter(|r| !reached.contains_key(*r))
                .collect();
            err(format!("adjacency graph is disconnected; unreachable: {}", missing.join(", ")));
        }
        out
    }
}

fn edge_targets<'a>(edges: &'a [(String, String)], room: &str) -> Vec<&'a str> {
    let mut out: Vec<&str> = edges
        .iter()
        .filter_map(|(a, b)| {
            if a == room {
                Some(b.as_str())
            } else if b == room {
                Some(a.as_str())
            } else {
                None
            }
        })
        .filter(|r| *r != room)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_map_is_valid() {
        let map = MapSpec::default();
        assert_eq!(map.rooms.len(), 8);
        assert_eq!(map.vents.len(), 2);
        assert!(map.validate().is_empty(), "{:?}", map.validate());
        assert_eq!(map.cafeteria, "Cafeteria");
    }

    #[test]
    fn edges_are_symmetric() {
        let map = MapSpec::default();
        for room in &map.rooms {
            for n in map.neighbors(room) {
                assert!(map.neighbors(n).contains(&room.as_str()));
            }
            for v in map.vent_targets(room) {
                assert!(map.vent_targets(v).contains(&room.as_str()));
            }
        }
        assert_eq!(map.neighbors("Cafeteria"), vec!["Admin", "Medbay", "Weapons"]);
        assert_eq!(map.vent_targets("Electrical"), vec!["Admin"]);
    }

    #[test]
    fn detects_disconnected_and_bad_cafeteria() {
        let map = MapSpec {
            rooms: vec!["A".into(), "B".into(), "C".into()],
            adjacency: vec![("A".into(), "B".into()), ("C".into(), "C".into())],
            vents: vec![],
            cafeteria: "Z".into(),
        };
        let rules: Vec<String> = map.validate().into_iter().map(|v| v.rule).collect();
        assert!(rules.iter().any(|r| r.contains("cafeteria")));
        assert!(rules.iter().any(|r| r.contains("self-edge")));
        assert!(rules.iter().any(|r| r.contains("disconnected")));
    }

    #[test]
    fn distances() {
        let map = MapSpec::default();
        let d = map.distances_from("Cafeteria");
        assert_eq!(d["Cafeteria"], 0);
        assert_eq!(d["Storage"], 2);
        assert_eq!(d["Navigation"], 3);
    }
}
