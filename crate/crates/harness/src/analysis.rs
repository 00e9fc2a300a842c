//! Turns a corpus and its annotations into every table and figure series of
//! the report. Pure and single-threaded: the same inputs give the same
//! report, down to the bytes of its serialization.

use std::collections::{BTreeMap, BTreeSet};

use deceit_annotate::{AnnotatedCorpus, DeceptionLabel, SpeechAct, Task, UtteranceKey};
use deceit_core::{EventKind, GameRecord, Role};
use deceit_stats::{
    chi_squared, logistic_fit, logit_prop_interval, odds_ratio, pearson, spearman, two_prop_z, ChiSquaredResult,
    CorrelationResult, Design, Ecdf, LogitProportion, OddsRatioResult, RegressionFit, StatsError, ZTestResult,
};
use serde::{Deserialize, Serialize};

use crate::run::OutcomeCounts;
use crate::HarnessError;

/// Annotation run used for the labels when several exist.
pub const PRIMARY_RUN: &str = "run1";

/// Predictors of the game-level outcome model, in report order.
pub const GAME_PREDICTORS: [&str; 6] = [
    "num_crew",
    "num_impostors",
    "num_discussions",
    "num_ejects",
    "words_per_discussion",
    "words_per_utterance",
];

/// Acts shown in role contrasts, in report order.
pub const CONTRAST_ACTS: [SpeechAct; 4] = [
    SpeechAct::Representatives,
    SpeechAct::Directives,
    SpeechAct::Commissives,
    SpeechAct::Expressives,
];

/// Acts entered as predictors of the outcome; Expressives is the baseline.
pub const OUTCOME_ACTS: [SpeechAct; 3] = [
    SpeechAct::Directives,
    SpeechAct::Representatives,
    SpeechAct::Commissives,
];

const COUPLING_ROWS: [DeceptionLabel; 3] = [
    DeceptionLabel::Equivocation,
    DeceptionLabel::Falsification,
    DeceptionLabel::Concealment,
];
const COUPLING_COLUMNS: [SpeechAct; 4] = [
    SpeechAct::Directives,
    SpeechAct::Representatives,
    SpeechAct::Commissives,
    SpeechAct::Expressives,
];
const EJECTION_ROWS: [DeceptionLabel; 3] = [
    DeceptionLabel::Concealment,
    DeceptionLabel::Falsification,
    DeceptionLabel::Equivocation,
];

/// A report section, or the reason it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value")]
pub enum Section<T> {
    #[serde(rename = "ok")]
    Ready(T),
    #[serde(rename = "insufficient data")]
    Insufficient(String),
}

impl<T> Section<T> {
    pub fn ready(&self) -> Option<&T> {
        match self {
            Section::Ready(t) => Some(t),
            Section::Insufficient(_) => None,
        }
    }

    fn from_stats(r: Result<T, StatsError>) -> Self {
        match r {
            Ok(t) => Section::Ready(t),
            Err(e) => Section::Insufficient(e.to_string()),
        }
    }
}

/// Which computation produced a section and from which rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operation: String,
    pub slice: String,
}

fn provenance(operation: &str, slice: impl Into<String>) -> Provenance {
    Provenance {
        operation: operation.to_string(),
        slice: slice.into(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameTotals {
    pub games: usize,
    pub crew_wins: usize,
    pub impostor_wins: usize,
    pub timeouts: usize,
    pub by_config: BTreeMap<String, OutcomeCounts>,
}

/// Utterance opportunities: `classified + unclassifiable + abstentions +
/// unannotated = opportunities`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceTotals {
    pub opportunities: usize,
    pub abstentions: usize,
    pub classified: usize,
    pub unclassifiable: usize,
    pub unannotated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinCurve {
    pub config: String,
    pub role: Role,
    pub wins: usize,
    /// Games with a winner.
    pub decided: usize,
    pub win_rate: f64,
    /// ECDF of game length in rounds over this role's wins.
    pub rounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinSection {
    pub provenance: Provenance,
    pub curves: Vec<WinCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundCurves {
    pub config: String,
    pub games: usize,
    pub discussions_per_game: Vec<(f64, f64)>,
    pub ejections_per_game: Vec<(f64, f64)>,
    /// ECDF of the rounds in which meetings were held, pooled over games.
    pub discussion_rounds: Vec<(f64, f64)>,
    pub ejection_rounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSection {
    pub provenance: Provenance,
    pub curves: Vec<RoundCurves>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OddsRow {
    pub term: String,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub provenance: Provenance,
    pub outcome: String,
    pub n: usize,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
    pub fit: RegressionFit,
    pub odds_ratios: Vec<OddsRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleActTable {
    /// Categories with at least one utterance.
    pub categories: Vec<String>,
    pub crew: Vec<u64>,
    pub impostor: Vec<u64>,
    pub crew_share: Vec<f64>,
    pub impostor_share: Vec<f64>,
    pub test: Section<ChiSquaredResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActContrast {
    pub act: String,
    pub impostor_count: u64,
    pub impostor_total: u64,
    pub crew_count: u64,
    pub crew_total: u64,
    /// Impostor vs crew.
    pub odds_ratio: Section<OddsRatioResult>,
    pub z_test: Section<ZTestResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeechByRole {
    pub provenance: Provenance,
    pub table: RoleActTable,
    pub contrasts: Vec<ActContrast>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeechOutcome {
    pub provenance: Provenance,
    pub categories: Vec<String>,
    pub crew_win: Vec<u64>,
    pub crew_loss: Vec<u64>,
    pub test: Section<ChiSquaredResult>,
    /// Per-game category shares in percentage points; Expressives baseline.
    pub model: Section<ModelSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreEjection {
    pub provenance: Provenance,
    pub meetings: usize,
    pub table: RoleActTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleDelta {
    /// Mean meeting-to-meeting change in representative share.
    pub delta: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRole {
    pub provenance: Provenance,
    pub crew_delta: Section<RoleDelta>,
    pub impostor_delta: Section<RoleDelta>,
    /// Impostor share at meeting m against crew share at m + 1.
    pub impostor_then_crew: Section<CorrelationResult>,
    /// Crew share at meeting m against impostor share at m + 1.
    pub crew_then_impostor: Section<CorrelationResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelShare {
    pub label: String,
    #[serde(flatten)]
    pub share: LogitProportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeceptionGroup {
    pub group: String,
    pub total: u64,
    pub shares: Vec<LabelShare>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeceptionSection {
    pub provenance: Provenance,
    pub overall: DeceptionGroup,
    pub by_outcome: Vec<DeceptionGroup>,
    pub by_role: Vec<DeceptionGroup>,
    pub outcome_test: Section<ChiSquaredResult>,
    pub role_test: Section<ChiSquaredResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCell {
    pub deception: String,
    pub act: String,
    pub result: Section<CorrelationResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub provenance: Provenance,
    pub games: usize,
    pub cells: Vec<CouplingCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectionCorrelation {
    pub deception: String,
    pub result: Section<CorrelationResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeceptionEfficiency {
    pub provenance: Provenance,
    pub correlations: Vec<EjectionCorrelation>,
    pub model: Section<ModelSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub games: GameTotals,
    pub utterances: UtteranceTotals,
    /// Annotation run the labels were taken from.
    pub annotation_run: Option<String>,
    pub win_ecdfs: Section<WinSection>,
    pub round_ecdfs: Section<RoundSection>,
    pub game_model: Section<ModelSection>,
    pub speech_by_role: Section<SpeechByRole>,
    pub speech_outcome: Section<SpeechOutcome>,
    pub pre_ejection: Section<PreEjection>,
    pub cross_role: Section<CrossRole>,
    pub deception: Section<DeceptionSection>,
    pub speech_deception: Section<Coupling>,
    pub deception_efficiency: Section<DeceptionEfficiency>,
    pub warnings: Vec<String>,
}

fn act_index(act: SpeechAct) -> usize {
    SpeechAct::ALL.iter().position(|a| *a == act).unwrap_or(0)
}

fn deception_index(label: DeceptionLabel) -> usize {
    DeceptionLabel::ALL.iter().position(|l| *l == label).unwrap_or(0)
}

/// Labels of one utterance in the primary run.
#[derive(Clone, Copy, Debug, Default)]
struct Labels {
    annotated: bool,
    act: Option<SpeechAct>,
    deception: Option<DeceptionLabel>,
}

#[derive(Clone, Debug)]
struct Spoken {
    game: usize,
    meeting: usize,
    role: Role,
    labels: Labels,
}

#[derive(Clone, Debug, Default)]
struct GameRow {
    config: String,
    crew_won: Option<bool>,
    num_crew: usize,
    num_impostors: usize,
    discussions: usize,
    ejections: usize,
    rounds_played: u32,
    words: usize,
    spoken: usize,
    /// Rows with a speech-act label, classified or not.
    labelled: u64,
    acts: [u64; 5],
    deception: [u64; 4],
}

impl GameRow {
    fn words_per_discussion(&self) -> f64 {
        if self.discussions == 0 {
            0.0
        } else {
            self.words as f64 / self.discussions as f64
        }
    }

    fn words_per_utterance(&self) -> f64 {
        if self.spoken == 0 {
            0.0
        } else {
            self.words as f64 / self.spoken as f64
        }
    }

    fn act_share(&self, act: SpeechAct) -> f64 {
        if self.labelled == 0 {
            0.0
        } else {
            self.acts[act_index(act)] as f64 / self.labelled as f64
        }
    }

    fn deception_rate(&self, label: DeceptionLabel) -> f64 {
        if self.labelled == 0 {
            0.0
        } else {
            self.deception[deception_index(label)] as f64 / self.labelled as f64
        }
    }
}

struct Prepared {
    games: Vec<GameRow>,
    spoken: Vec<Spoken>,
    ejection_meetings: BTreeSet<(usize, usize)>,
    annotated: bool,
}

fn label_map(annotations: &AnnotatedCorpus, run_id: &str) -> BTreeMap<UtteranceKey, Labels> {
    let sa = Task::SpeechAct.column(run_id);
    let de = Task::Deception.column(run_id);
    annotations
        .rows
        .iter()
        .map(|row| {
            let act = row.labels.get(&sa);
            let labels = Labels {
                annotated: act.is_some(),
                act: act.and_then(|a| SpeechAct::normalize(a)),
                deception: row.labels.get(&de).and_then(|d| DeceptionLabel::from_name(d)),
            };
            (row.key.clone(), labels)
        })
        .collect()
}

fn prepare(records: &[GameRecord], labels: &BTreeMap<UtteranceKey, Labels>, annotated: bool) -> (Prepared, UtteranceTotals) {
    let mut totals = UtteranceTotals::default();
    let mut games = Vec::with_capacity(records.len());
    let mut spoken = Vec::new();
    let mut ejection_meetings = BTreeSet::new();
    for (gi, record) in records.iter().enumerate() {
        let mut row = GameRow {
            config: record.config.label(),
            crew_won: record.outcome.crew_won(),
            num_crew: record.config.num_crew,
            num_impostors: record.config.num_impostors,
            discussions: record.counters.discussions,
            ejections: record.counters.ejections,
            rounds_played: record.counters.rounds_played,
            ..Default::default()
        };
        for e in &record.events {
            match &e.event {
                EventKind::VoteTally {
                    meeting_index,
                    ejected: Some(_),
                    ..
                } => {
                    ejection_meetings.insert((gi, *meeting_index));
                }
                EventKind::Utterance(u) => {
                    totals.opportunities += 1;
                    if u.is_abstention() {
                        totals.abstentions += 1;
                        continue;
                    }
                    row.spoken += 1;
                    row.words += u.word_count;
                    let l = labels.get(&UtteranceKey::of(u)).copied().unwrap_or_default();
                    if !l.annotated {
                        totals.unannotated += 1;
                    } else {
                        row.labelled += 1;
                        match l.act {
                            Some(act) => {
                                totals.classified += 1;
                                row.acts[act_index(act)] += 1;
                            }
                            None => totals.unclassifiable += 1,
                        }
                    }
                    if let Some(d) = l.deception {
                        row.deception[deception_index(d)] += 1;
                    }
                    spoken.push(Spoken {
                        game: gi,
                        meeting: u.meeting_index,
                        role: u.speaker_role,
                        labels: l,
                    });
                }
                _ => {}
            }
        }
        games.push(row);
    }
    (
        Prepared {
            games,
            spoken,
            ejection_meetings,
            annotated,
        },
        totals,
    )
}

fn check_alignment(records: &[GameRecord], annotations: &AnnotatedCorpus) -> Result<(), HarnessError> {
    let keys: BTreeSet<UtteranceKey> = records
        .iter()
        .flat_map(|r| r.utterances())
        .filter(|u| !u.is_abstention())
        .map(UtteranceKey::of)
        .collect();
    let stray: Vec<String> = annotations
        .rows
        .iter()
        .filter(|r| !keys.contains(&r.key))
        .map(|r| r.key.as_str().to_string())
        .take(5)
        .collect();
    if stray.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Misaligned(format!(
            "annotated utterances not in the corpus: {}",
            stray.join(", ")
        )))
    }
}

/// Computes the full report. Timeout games count toward the totals but are
/// left out of every outcome comparison.
pub fn analyze(records: &[GameRecord], annotations: Option<&AnnotatedCorpus>) -> Result<AnalysisReport, HarnessError> {
    let mut warnings = Vec::new();
    let run_id = match annotations {
        Some(a) => {
            check_alignment(records, a)?;
            let ids = a.run_ids();
            if ids.iter().any(|r| r == PRIMARY_RUN) {
                Some(PRIMARY_RUN.to_string())
            } else {
                ids.first().cloned()
            }
        }
        None => None,
    };
    let labels = match (annotations, &run_id) {
        (Some(a), Some(id)) => label_map(a, id),
        _ => {
            warnings.push("no annotations: speech-act and deception sections skipped".to_string());
            BTreeMap::new()
        }
    };
    let (prep, utterances) = prepare(records, &labels, run_id.is_some());

    let mut games = GameTotals::default();
    for (r, g) in records.iter().zip(&prep.games) {
        games.by_config.entry(g.config.clone()).or_default().add(&r.outcome);
    }
    for c in games.by_config.values() {
        games.crew_wins += c.crew_wins;
        games.impostor_wins += c.impostor_wins;
        games.timeouts += c.timeouts;
    }
    games.games = records.len();
    if games.timeouts > 0 {
        warnings.push(format!(
            "{} timeout games excluded from win rates and outcome models",
            games.timeouts
        ));
    }
    if prep.annotated && utterances.unannotated > 0 {
        warnings.push(format!("{} utterances have no annotation", utterances.unannotated));
    }

    fn no_labels<T>() -> Section<T> {
        Section::Insufficient("no annotations".to_string())
    }
    let annotated = prep.annotated;
    Ok(AnalysisReport {
        win_ecdfs: win_curves(&prep),
        round_ecdfs: round_curves(records, &prep),
        game_model: game_model(&prep),
        speech_by_role: if annotated { speech_by_role(&prep) } else { no_labels() },
        speech_outcome: if annotated { speech_outcome(&prep) } else { no_labels() },
        pre_ejection: if annotated { pre_ejection(&prep) } else { no_labels() },
        cross_role: if annotated { cross_role(&prep) } else { no_labels() },
        deception: if annotated { deception(&prep) } else { no_labels() },
        speech_deception: if annotated { coupling(&prep) } else { no_labels() },
        deception_efficiency: if annotated { efficiency(&prep) } else { no_labels() },
        games,
        utterances,
        annotation_run: run_id,
        warnings,
    })
}

fn steps(sample: &[f64]) -> Vec<(f64, f64)> {
    Ecdf::new(sample).map(|e| e.steps()).unwrap_or_default()
}

fn by_config(prep: &Prepared) -> BTreeMap<&str, Vec<usize>> {
    let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in prep.games.iter().enumerate() {
        out.entry(g.config.as_str()).or_default().push(i);
    }
    out
}

fn win_curves(prep: &Prepared) -> Section<WinSection> {
    if prep.games.iter().all(|g| g.crew_won.is_none()) {
        return Section::Insufficient("no game with a winner".into());
    }
    let mut curves = Vec::new();
    for (config, idx) in by_config(prep) {
        let decided: Vec<&GameRow> = idx.iter().map(|i| &prep.games[*i]).filter(|g| g.crew_won.is_some()).collect();
        for role in [Role::Crewmate, Role::Impostor] {
            let crew = role == Role::Crewmate;
            let rounds: Vec<f64> = decided
                .iter()
                .filter(|g| g.crew_won == Some(crew))
                .map(|g| g.rounds_played as f64)
                .collect();
            curves.push(WinCurve {
                config: config.to_string(),
                role,
                wins: rounds.len(),
                decided: decided.len(),
                win_rate: if decided.is_empty() {
                    0.0
                } else {
                    rounds.len() as f64 / decided.len() as f64
                },
                rounds: steps(&rounds),
            });
        }
    }
    Section::Ready(WinSection {
        provenance: provenance("ecdf", "games with a winner, by configuration and winning role; x = rounds played"),
        curves,
    })
}

fn round_curves(records: &[GameRecord], prep: &Prepared) -> Section<RoundSection> {
    if records.is_empty() {
        return Section::Insufficient("empty corpus".into());
    }
    let curves = by_config(prep)
        .into_iter()
        .map(|(config, idx)| {
            let rs: Vec<&GameRecord> = idx.iter().map(|i| &records[*i]).collect();
            let per_game = |f: &dyn Fn(&GameRecord) -> usize| steps(&rs.iter().map(|r| f(r) as f64).collect::<Vec<_>>());
            let pooled = |f: &dyn Fn(&GameRecord) -> &Vec<u32>| {
                steps(&rs.iter().flat_map(|r| f(r).iter().map(|v| *v as f64)).collect::<Vec<_>>())
            };
            RoundCurves {
                config: config.to_string(),
                games: rs.len(),
                discussions_per_game: per_game(&|r| r.counters.discussions),
                ejections_per_game: per_game(&|r| r.counters.ejections),
                discussion_rounds: pooled(&|r| &r.counters.meeting_rounds),
                ejection_rounds: pooled(&|r| &r.counters.ejection_rounds),
            }
        })
        .collect();
    Section::Ready(RoundSection {
        provenance: provenance("ecdf", "all games by configuration"),
        curves,
    })
}

/// Fits a crew-win logistic model, first dropping constant predictors and
/// then, while the design is singular, the last predictor named in the
/// dependency.
fn fit_model(operation: &str, slice: String, mut columns: Vec<(String, Vec<f64>)>, y: Vec<bool>) -> Section<ModelSection> {
    if y.is_empty() {
        return Section::Insufficient("no game with a winner".into());
    }
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();
    columns.retain(|(name, col)| {
        let constant = col.iter().all(|v| *v == col[0]);
        if constant {
            warnings.push(format!("dropped constant predictor {name} (always {})", col[0]));
            dropped.push(name.clone());
        }
        !constant
    });
    let fit = loop {
        let design = if columns.is_empty() {
            Design::intercept_only(y.len())
        } else {
            Design::new(&columns)
        };
        let design = match design {
            Ok(d) => d,
            Err(e) => return Section::Insufficient(e.to_string()),
        };
        match logistic_fit(&design, &y) {
            Ok(fit) => break fit,
            Err(StatsError::Collinear(names)) => {
                let Some(victim) = names.iter().rev().find(|n| columns.iter().any(|(c, _)| c == *n)).cloned() else {
                    return Section::Insufficient(StatsError::Collinear(names).to_string());
                };
                warnings.push(format!(
                    "dropped collinear predictor {victim} (linearly dependent on {})",
                    names.iter().filter(|n| **n != victim).cloned().collect::<Vec<_>>().join(", ")
                ));
                dropped.push(victim.clone());
                columns.retain(|(c, _)| *c != victim);
            }
            Err(e) => return Section::Insufficient(e.to_string()),
        }
    };
    let odds_ratios = fit
        .coefficients
        .iter()
        .map(|c| OddsRow {
            term: c.name.clone(),
            odds_ratio: c.estimate.exp(),
            ci_low: c.ci_low.exp(),
            ci_high: c.ci_high.exp(),
        })
        .collect();
    Section::Ready(ModelSection {
        provenance: provenance(operation, slice),
        outcome: "crew_win".into(),
        n: y.len(),
        dropped,
        warnings,
        fit,
        odds_ratios,
    })
}

fn decided(prep: &Prepared) -> Vec<&GameRow> {
    prep.games.iter().filter(|g| g.crew_won.is_some()).collect()
}

fn game_model(prep: &Prepared) -> Section<ModelSection> {
    let games = decided(prep);
    let values = |f: &dyn Fn(&GameRow) -> f64| games.iter().map(|g| f(g)).collect::<Vec<f64>>();
    let columns = vec![
        values(&|g| g.num_crew as f64),
        values(&|g| g.num_impostors as f64),
        values(&|g| g.discussions as f64),
        values(&|g| g.ejections as f64),
        values(&|g| g.words_per_discussion()),
        values(&|g| g.words_per_utterance()),
    ];
    let columns = GAME_PREDICTORS.iter().map(|n| n.to_string()).zip(columns).collect();
    let y = games.iter().filter_map(|g| g.crew_won).collect();
    fit_model(
        "logistic_fit",
        format!("games with a winner (n={}), one row per game", games.len()),
        columns,
        y,
    )
}

fn act_counts<'a>(rows: impl Iterator<Item = &'a Spoken>) -> [u64; 5] {
    let mut out = [0u64; 5];
    for s in rows {
        if let Some(a) = s.labels.act {
            out[act_index(a)] += 1;
        }
    }
    out
}

fn shares(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .map(|c| if total == 0 { 0.0 } else { *c as f64 / total as f64 })
        .collect()
}

/// Chi-squared over the columns that have any count.
fn observed_test(rows: &[&[u64]]) -> Section<ChiSquaredResult> {
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    let keep: Vec<usize> = (0..width).filter(|c| rows.iter().any(|r| r[*c] > 0)).collect();
    let table: Vec<Vec<f64>> = rows.iter().map(|r| keep.iter().map(|c| r[*c] as f64).collect()).collect();
    Section::from_stats(chi_squared(&table))
}

fn role_table(crew: [u64; 5], impostor: [u64; 5]) -> Result<RoleActTable, String> {
    let keep: Vec<usize> = (0..5).filter(|i| crew[*i] + impostor[*i] > 0).collect();
    if keep.is_empty() {
        return Err("no classified utterances".into());
    }
    let crew: Vec<u64> = keep.iter().map(|i| crew[*i]).collect();
    let impostor: Vec<u64> = keep.iter().map(|i| impostor[*i]).collect();
    Ok(RoleActTable {
        categories: keep.iter().map(|i| SpeechAct::ALL[*i].as_str().to_string()).collect(),
        test: observed_test(&[&crew, &impostor]),
        crew_share: shares(&crew),
        impostor_share: shares(&impostor),
        crew,
        impostor,
    })
}

fn by_role(rows: &[Spoken], role: Role) -> impl Iterator<Item = &Spoken> {
    rows.iter().filter(move |s| s.role == role)
}

fn speech_by_role(prep: &Prepared) -> Section<SpeechByRole> {
    let crew = act_counts(by_role(&prep.spoken, Role::Crewmate));
    let impostor = act_counts(by_role(&prep.spoken, Role::Impostor));
    let table = match role_table(crew, impostor) {
        Ok(t) => t,
        Err(e) => return Section::Insufficient(e),
    };
    let crew_total: u64 = crew.iter().sum();
    let impostor_total: u64 = impostor.iter().sum();
    let contrasts = CONTRAST_ACTS
        .iter()
        .map(|act| {
            let i = act_index(*act);
            let (a, c) = (impostor[i], crew[i]);
            ActContrast {
                act: act.as_str().to_string(),
                impostor_count: a,
                impostor_total,
                crew_count: c,
                crew_total,
                odds_ratio: Section::from_stats(odds_ratio(a, impostor_total - a, c, crew_total - c)),
                z_test: Section::from_stats(two_prop_z(a, impostor_total, c, crew_total)),
            }
        })
        .collect();
    Section::Ready(SpeechByRole {
        provenance: provenance(
            "chi_squared; odds_ratio; two_prop_z",
            "classified utterances of all games, by speaker role",
        ),
        table,
        contrasts,
    })
}

fn speech_outcome(prep: &Prepared) -> Section<SpeechOutcome> {
    let outcome_of = |s: &Spoken| prep.games[s.game].crew_won;
    let win = act_counts(prep.spoken.iter().filter(|s| outcome_of(s) == Some(true)));
    let loss = act_counts(prep.spoken.iter().filter(|s| outcome_of(s) == Some(false)));
    let keep: Vec<usize> = (0..5).filter(|i| win[*i] + loss[*i] > 0).collect();
    if keep.is_empty() {
        return Section::Insufficient("no classified utterances in games with a winner".into());
    }
    let crew_win: Vec<u64> = keep.iter().map(|i| win[*i]).collect();
    let crew_loss: Vec<u64> = keep.iter().map(|i| loss[*i]).collect();

    let games: Vec<&GameRow> = decided(prep).into_iter().filter(|g| g.acts.iter().sum::<u64>() > 0).collect();
    let columns = OUTCOME_ACTS
        .iter()
        .map(|act| {
            let col = games
                .iter()
                .map(|g| {
                    let classified: u64 = g.acts.iter().sum();
                    100.0 * g.acts[act_index(*act)] as f64 / classified as f64
                })
                .collect();
            (format!("{}_pct", act.as_str().to_ascii_lowercase()), col)
        })
        .collect();
    let y = games.iter().filter_map(|g| g.crew_won).collect();
    Section::Ready(SpeechOutcome {
        provenance: provenance(
            "chi_squared; logistic_fit",
            "classified utterances of games with a winner, by outcome; model rows are games",
        ),
        categories: keep.iter().map(|i| SpeechAct::ALL[*i].as_str().to_string()).collect(),
        test: observed_test(&[&crew_win, &crew_loss]),
        crew_win,
        crew_loss,
        model: fit_model(
            "logistic_fit",
            format!("games with a winner and classified utterances (n={})", games.len()),
            columns,
            y,
        ),
    })
}

fn pre_ejection(prep: &Prepared) -> Section<PreEjection> {
    if prep.ejection_meetings.is_empty() {
        return Section::Insufficient("no meeting ended in an ejection".into());
    }
    let in_scope = |s: &&Spoken| prep.ejection_meetings.contains(&(s.game, s.meeting));
    let crew = act_counts(by_role(&prep.spoken, Role::Crewmate).filter(in_scope));
    let impostor = act_counts(by_role(&prep.spoken, Role::Impostor).filter(in_scope));
    match role_table(crew, impostor) {
        Ok(table) => Section::Ready(PreEjection {
            provenance: provenance("chi_squared", "classified utterances of meetings that ejected a player, by speaker role"),
            meetings: prep.ejection_meetings.len(),
            table,
        }),
        Err(e) => Section::Insufficient(e),
    }
}

fn cross_role(prep: &Prepared) -> Section<CrossRole> {
    // (game, meeting) -> [crew, impostor] of (representatives, classified)
    let mut per_meeting: BTreeMap<(usize, usize), [(u64, u64); 2]> = BTreeMap::new();
    for s in &prep.spoken {
        let Some(act) = s.labels.act else { continue };
        let slot = &mut per_meeting.entry((s.game, s.meeting)).or_default()[s.role as usize];
        slot.1 += 1;
        if act == SpeechAct::Representatives {
            slot.0 += 1;
        }
    }
    if per_meeting.is_empty() {
        return Section::Insufficient("no classified utterances".into());
    }
    let share = |key: (usize, usize), role: usize| {
        per_meeting
            .get(&key)
            .map(|s| s[role])
            .filter(|(_, n)| *n > 0)
            .map(|(r, n)| r as f64 / n as f64)
    };
    let delta = |role: usize| {
        let diffs: Vec<f64> = per_meeting
            .keys()
            .filter_map(|&(g, m)| Some(share((g, m + 1), role)? - share((g, m), role)?))
            .collect();
        if diffs.is_empty() {
            Section::Insufficient("no consecutive meetings with speech from this role".into())
        } else {
            Section::Ready(RoleDelta {
                delta: diffs.iter().sum::<f64>() / diffs.len() as f64,
                pairs: diffs.len(),
            })
        }
    };
    let lagged = |lead: usize, follow: usize| {
        let (x, y): (Vec<f64>, Vec<f64>) = per_meeting
            .keys()
            .filter_map(|&(g, m)| Some((share((g, m), lead)?, share((g, m + 1), follow)?)))
            .unzip();
        Section::from_stats(pearson(&x, &y))
    };
    let (crew, imp) = (Role::Crewmate as usize, Role::Impostor as usize);
    Section::Ready(CrossRole {
        provenance: provenance("pearson", "representative share per role per meeting; consecutive meetings within a game"),
        crew_delta: delta(crew),
        impostor_delta: delta(imp),
        impostor_then_crew: lagged(imp, crew),
        crew_then_impostor: lagged(crew, imp),
    })
}

fn deception_group(group: &str, rows: &[&Spoken]) -> DeceptionGroup {
    let mut counts = [0u64; 4];
    for s in rows {
        if let Some(d) = s.labels.deception {
            counts[deception_index(d)] += 1;
        }
    }
    let total = counts.iter().sum();
    DeceptionGroup {
        group: group.to_string(),
        total,
        shares: DeceptionLabel::ALL
            .iter()
            .zip(counts)
            .map(|(l, c)| LabelShare {
                label: l.as_str().to_string(),
                share: logit_prop_interval(c, total),
            })
            .collect(),
    }
}

fn group_test(groups: &[DeceptionGroup]) -> Section<ChiSquaredResult> {
    let rows: Vec<Vec<u64>> = groups.iter().map(|g| g.shares.iter().map(|s| s.share.count).collect()).collect();
    let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
    observed_test(&refs)
}

fn deception(prep: &Prepared) -> Section<DeceptionSection> {
    let labelled: Vec<&Spoken> = prep.spoken.iter().filter(|s| s.labels.deception.is_some()).collect();
    if labelled.is_empty() {
        return Section::Insufficient("no deception labels".into());
    }
    let pick = |f: &dyn Fn(&Spoken) -> bool| labelled.iter().copied().filter(|s| f(s)).collect::<Vec<_>>();
    let by_outcome = vec![
        deception_group("crew_win", &pick(&|s| prep.games[s.game].crew_won == Some(true))),
        deception_group("crew_loss", &pick(&|s| prep.games[s.game].crew_won == Some(false))),
    ];
    let by_role = vec![
        deception_group("crewmate", &pick(&|s| s.role == Role::Crewmate)),
        deception_group("impostor", &pick(&|s| s.role == Role::Impostor)),
    ];
    Section::Ready(DeceptionSection {
        provenance: provenance(
            "logit_prop_interval; chi_squared",
            "deception labels of all games; outcome groups exclude games without a winner",
        ),
        overall: deception_group("all", &labelled),
        outcome_test: group_test(&by_outcome),
        role_test: group_test(&by_role),
        by_outcome,
        by_role,
    })
}

fn coupling(prep: &Prepared) -> Section<Coupling> {
    let games: Vec<&GameRow> = prep.games.iter().filter(|g| g.labelled > 0).collect();
    if games.is_empty() {
        return Section::Insufficient("no annotated games".into());
    }
    let mut cells = Vec::new();
    for d in COUPLING_ROWS {
        let x: Vec<f64> = games.iter().map(|g| g.deception_rate(d)).collect();
        for a in COUPLING_COLUMNS {
            let y: Vec<f64> = games.iter().map(|g| g.act_share(a)).collect();
            cells.push(CouplingCell {
                deception: d.as_str().to_string(),
                act: a.as_str().to_string(),
                result: Section::from_stats(spearman(&x, &y)),
            });
        }
    }
    Section::Ready(Coupling {
        provenance: provenance("spearman", "annotated games; per-game label rate against per-game act share"),
        games: games.len(),
        cells,
    })
}

fn efficiency(prep: &Prepared) -> Section<DeceptionEfficiency> {
    let ejections: Vec<f64> = prep.games.iter().map(|g| g.ejections as f64).collect();
    let correlations = EJECTION_ROWS
        .iter()
        .map(|d| {
            let x: Vec<f64> = prep.games.iter().map(|g| g.deception[deception_index(*d)] as f64).collect();
            EjectionCorrelation {
                deception: d.as_str().to_string(),
                result: Section::from_stats(spearman(&x, &ejections)),
            }
        })
        .collect();
    let games = decided(prep);
    let columns = DeceptionLabel::ALL
        .iter()
        .map(|d| {
            (
                format!("{}_count", d.as_str().to_ascii_lowercase()),
                games.iter().map(|g| g.deception[deception_index(*d)] as f64).collect(),
            )
        })
        .collect();
    let y = games.iter().filter_map(|g| g.crew_won).collect();
    Section::Ready(DeceptionEfficiency {
        provenance: provenance("spearman; logistic_fit", "all games for correlations; games with a winner for the model"),
        correlations,
        model: fit_model(
            "logistic_fit",
            format!("games with a winner (n={}), per-game deception label counts", games.len()),
            columns,
            y,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{planted_corpus, PlantedEffects};

    #[test]
    fn empty_corpus_marks_sections_insufficient() {
        let r = analyze(&[], None).unwrap();
        assert_eq!(r.games.games, 0);
        assert!(matches!(r.win_ecdfs, Section::Insufficient(_)));
        assert!(matches!(r.game_model, Section::Insufficient(_)));
        assert!(matches!(r.deception, Section::Insufficient(_)));
        let json = serde_json::to_string(&r.deception).unwrap();
        assert_eq!(json, r#"{"status":"insufficient data","value":"no annotations"}"#);
    }

    #[test]
    fn counts_reconcile() {
        let (records, corpus) = planted_corpus(&PlantedEffects {
            games: 60,
            ..Default::default()
        });
        let r = analyze(&records, Some(&corpus)).unwrap();
        let g = &r.games;
        assert_eq!(g.crew_wins + g.impostor_wins + g.timeouts, g.games);
        let u = &r.utterances;
        assert_eq!(u.unannotated, 0);
        assert_eq!(u.classified + u.unclassifiable + u.abstentions, u.opportunities);
        assert_eq!(r.annotation_run.as_deref(), Some(PRIMARY_RUN));
    }

    #[test]
    fn stray_annotations_are_rejected() {
        let (records, corpus) = planted_corpus(&PlantedEffects {
            games: 10,
            ..Default::default()
        });
        let err = analyze(&records[..5], Some(&corpus)).unwrap_err();
        assert!(matches!(err, HarnessError::Misaligned(_)));
    }

    #[test]
    fn collinear_predictor_is_dropped_with_warning() {
        let x: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let y: Vec<bool> = (0..40).map(|i| (i * 7919) % 13 < 6).collect();
        let m = fit_model(
            "logistic_fit",
            "test".into(),
            vec![("x".into(), x), ("twice".into(), twice), ("flat".into(), vec![1.0; 40])],
            y,
        );
        let m = m.ready().unwrap();
        assert_eq!(m.dropped, vec!["flat".to_string(), "twice".to_string()]);
        assert_eq!(m.warnings.len(), 2);
        assert_eq!(m.fit.coefficients.len(), 2);
    }
}
