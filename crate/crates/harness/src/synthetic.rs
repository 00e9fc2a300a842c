//! Synthetic annotated corpora with known structure, for checking that the
//! analysis recovers what was put in.

use std::collections::BTreeMap;

use deceit_annotate::{AnnotatedCorpus, AnnotatedUtterance, DeceptionLabel, RunInfo, SpeechAct, Task, UtteranceKey};
use deceit_core::model::player_name;
use deceit_core::record::GameCounters;
use deceit_core::{
    CrewWinReason, Event, EventKind, GameConfig, GameRecord, ImpostorWinReason, MeetingCause, Outcome, PlayerId,
    PlayerInfo, Role, UtteranceRecord, VoteTarget,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Label shares per 100 utterances, in the order Directives,
/// Representatives, Commissives, Expressives.
pub type ActMix = [usize; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffects {
    pub games: usize,
    pub seed: u64,
    /// Log-odds of a crew win at 4 crew, 1 impostor and no ejections.
    pub intercept: f64,
    pub crew_beta: f64,
    pub impostor_beta: f64,
    pub ejection_beta: f64,
    /// Meetings per game are drawn uniformly from `0..=max_discussions`.
    pub max_discussions: usize,
    /// Every n-th game times out (0 disables).
    pub timeout_every: usize,
    /// Equivocation labels per 100 deception labels; the rest cycle through
    /// Falsification, Concealment and Missing.
    pub equivocation_per_100: usize,
    pub crew_acts: ActMix,
    pub impostor_acts: ActMix,
    /// Every n-th utterance is an abstention (0 disables).
    pub abstain_every: usize,
}

impl Default for PlantedEffects {
    fn default() -> Self {
        PlantedEffects {
            games: 800,
            seed: 17,
            intercept: 0.5,
            crew_beta: 0.4,
            impostor_beta: -1.5,
            ejection_beta: 0.8,
            max_discussions: 5,
            timeout_every: 50,
            equivocation_per_100: 90,
            crew_acts: [97, 1, 1, 1],
            impostor_acts: [95, 3, 1, 1],
            abstain_every: 25,
        }
    }
}

const ACT_ORDER: [SpeechAct; 4] = [
    SpeechAct::Directives,
    SpeechAct::Representatives,
    SpeechAct::Commissives,
    SpeechAct::Expressives,
];

const MINOR_DECEPTION: [DeceptionLabel; 3] = [
    DeceptionLabel::Falsification,
    DeceptionLabel::Concealment,
    DeceptionLabel::Missing,
];

/// Deterministic label for the `i`-th slot of a 100-slot pattern.
fn act_for(mix: &ActMix, i: usize) -> SpeechAct {
    let mut slot = i % 100;
    for (act, share) in ACT_ORDER.iter().zip(mix) {
        if slot < *share {
            return *act;
        }
        slot -= share;
    }
    SpeechAct::Directives
}

fn deception_for(equivocation: usize, i: usize) -> DeceptionLabel {
    let slot = i % 100;
    if slot < equivocation {
        DeceptionLabel::Equivocation
    } else {
        MINOR_DECEPTION[(slot - equivocation) % MINOR_DECEPTION.len()]
    }
}

fn event(round: u32, kind: EventKind) -> Event {
    Event {
        timestep: round,
        round,
        event: kind,
    }
}

/// Builds `p.games` records and a single-run annotation (`run1`) of their
/// utterances. Crew wins follow a logistic model in crew size, impostor
/// count and ejections; labels follow fixed per-role patterns so their
/// shares are exact up to rounding.
pub fn planted_corpus(p: &PlantedEffects) -> (Vec<GameRecord>, AnnotatedCorpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut records = Vec::with_capacity(p.games);
    let mut rows = Vec::new();
    let mut role_counter: BTreeMap<Role, usize> = BTreeMap::new();
    let mut deception_counter = 0usize;
    let mut utterance_counter = 0usize;

    for g in 0..p.games {
        let num_impostors = rng.random_range(1..=3usize);
        let num_crew = rng.random_range((num_impostors + 1).max(3)..=6usize);
        let discussions = rng.random_range(0..=p.max_discussions);
        let ejections = if discussions == 0 {
            0
        } else {
            rng.random_range(0..=discussions)
        };
        let eta = p.intercept
            + p.crew_beta * (num_crew as f64 - 4.0)
            + p.impostor_beta * (num_impostors as f64 - 1.0)
            + p.ejection_beta * ejections as f64;
        let crew_wins = rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp());
        let timed_out = p.timeout_every > 0 && g % p.timeout_every == p.timeout_every - 1;
        let outcome = if timed_out {
            Outcome::Timeout
        } else if crew_wins {
            Outcome::CrewWin(CrewWinReason::AllTasksDone)
        } else {
            Outcome::ImpostorWin(ImpostorWinReason::Parity)
        };

        let game_id = format!("synthetic-{g:04}");
        let config = GameConfig::new(num_crew, num_impostors).with_seed(p.seed.wrapping_add(g as u64));
        let players: Vec<PlayerInfo> = (0..num_crew + num_impostors)
            .map(|i| PlayerInfo {
                id: PlayerId(i),
                name: player_name(PlayerId(i)),
                role: if i < num_impostors { Role::Impostor } else { Role::Crewmate },
            })
            .collect();

        let mut events = Vec::new();
        let mut counters = GameCounters::default();
        for m in 0..discussions {
            let round = 2 * m as u32 + 2;
            counters.meeting_rounds.push(round);
            events.push(event(
                round,
                EventKind::MeetingCalled {
                    meeting_index: m,
                    cause: MeetingCause::Emergency { caller: PlayerId(num_impostors) },
                },
            ));
            for r in 0..2usize {
                for info in &players {
                    utterance_counter += 1;
                    let abstain = p.abstain_every > 0 && utterance_counter.is_multiple_of(p.abstain_every);
                    let text = if abstain {
                        String::new()
                    } else {
                        format!("{} speaks in meeting {m} round {r}.", info.name)
                    };
                    let u = UtteranceRecord::new(game_id.clone(), m, r, info.id, info.role, &text);
                    if !abstain {
                        let n = role_counter.entry(info.role).or_default();
                        let mix = match info.role {
                            Role::Crewmate => &p.crew_acts,
                            Role::Impostor => &p.impostor_acts,
                        };
                        let act = act_for(mix, *n);
                        *n += 1;
                        let deception = deception_for(p.equivocation_per_100, deception_counter);
                        deception_counter += 1;
                        let labels = BTreeMap::from([
                            (Task::SpeechAct.column("run1"), act.as_str().to_string()),
                            (Task::Deception.column("run1"), deception.as_str().to_string()),
                        ]);
                        rows.push(AnnotatedUtterance {
                            key: UtteranceKey::of(&u),
                            utterance: u.clone(),
                            labels,
                        });
                    }
                    events.push(event(round, EventKind::Utterance(u)));
                }
            }
            // The first `ejections` meetings eject the last crewmate seat.
            let ejected = (m < ejections).then_some(PlayerId(num_crew + num_impostors - 1));
            events.push(event(
                round,
                EventKind::VoteTally {
                    meeting_index: m,
                    counts: vec![(VoteTarget::Skip, 1)],
                    ejected,
                },
            ));
            if let Some(player) = ejected {
                counters.ejection_rounds.push(round);
                events.push(event(
                    round,
                    EventKind::Ejected {
                        player,
                        role: Role::Crewmate,
                    },
                ));
            }
        }
        counters.discussions = discussions;
        counters.ejections = ejections;
        counters.rounds_played = 2 * discussions as u32 + 3;
        events.push(event(counters.rounds_played, EventKind::GameEnded { outcome }));
        records.push(GameRecord {
            game_id,
            config,
            seed: p.seed.wrapping_add(g as u64),
            players,
            events,
            outcome,
            counters,
        });
    }
    let corpus = AnnotatedCorpus {
        runs: vec![RunInfo {
            run_id: "run1".into(),
            backend: "planted".into(),
        }],
        rows,
    };
    (records, corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_hit_their_shares() {
        let crew = [97, 1, 1, 1];
        let n = (0..100).filter(|i| act_for(&crew, *i) == SpeechAct::Directives).count();
        assert_eq!(n, 97);
        let e = (0..100)
            .filter(|i| deception_for(90, *i) == DeceptionLabel::Equivocation)
            .count();
        assert_eq!(e, 90);
    }

    #[test]
    fn corpus_is_deterministic_and_consistent() {
        let p = PlantedEffects {
            games: 30,
            ..Default::default()
        };
        let (a, ca) = planted_corpus(&p);
        let (b, cb) = planted_corpus(&p);
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let utterances: usize = a.iter().map(|r| r.utterances().filter(|u| !u.is_abstention()).count()).sum();
        assert_eq!(utterances, ca.len());
        for r in &a {
            assert!(r.config.num_impostors < r.config.num_crew);
            assert!(r.counters.ejections <= r.counters.discussions);
        }
    }
}
