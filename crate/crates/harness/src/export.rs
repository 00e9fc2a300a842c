//! Writes a report as `report.json`, one CSV per figure or table, and SVG
//! renderings of the figures.

use std::path::Path;

use deceit_stats::{ChiSquaredResult, CorrelationResult};

use crate::analysis::{AnalysisReport, ModelSection, RoleActTable, Section};
use crate::svg::{interval_plot, step_plot, Interval, Series};
use crate::HarnessError;

/// A CSV table. An insufficient section becomes a header plus one comment
/// line carrying the reason.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    note: Option<String>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
            note: None,
        }
    }

    fn insufficient(header: &[&'static str], reason: &str) -> Self {
        Table {
            note: Some(format!("insufficient data: {reason}")),
            ..Table::new(header)
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let mut bytes = w.into_inner().map_err(|e| HarnessError::Io {
            path: "csv".into(),
            source: e.into_error(),
        })?;
        if let Some(note) = &self.note {
            bytes.extend_from_slice(format!("# {note}\n").as_bytes());
        }
        Ok(bytes)
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn section<'a, T>(s: &'a Section<T>, header: &[&'static str], tables: &mut Vec<(String, Table)>, name: &str) -> Option<&'a T> {
    match s {
        Section::Ready(t) => Some(t),
        Section::Insufficient(reason) => {
            tables.push((name.to_string(), Table::insufficient(header, reason)));
            None
        }
    }
}

const MODEL_HEADER: &[&str] = &[
    "term", "estimate", "se", "ci_low", "ci_high", "z", "p_value", "odds_ratio", "or_ci_low", "or_ci_high",
];

fn model_table(m: &Section<ModelSection>) -> Table {
    match m {
        Section::Ready(m) => {
            let mut t = Table::new(MODEL_HEADER);
            for (c, o) in m.fit.coefficients.iter().zip(&m.odds_ratios) {
                t.push(vec![
                    c.name.clone(),
                    num(c.estimate),
                    num(c.se),
                    num(c.ci_low),
                    num(c.ci_high),
                    num(c.z),
                    num(c.p_value),
                    num(o.odds_ratio),
                    num(o.ci_low),
                    num(o.ci_high),
                ]);
            }
            t
        }
        Section::Insufficient(r) => Table::insufficient(MODEL_HEADER, r),
    }
}

fn model_plot(title: &str, m: &Section<ModelSection>) -> Option<String> {
    let m = m.ready()?;
    let rows: Vec<Interval> = m
        .fit
        .coefficients
        .iter()
        .filter(|c| c.name != deceit_stats::logistic::INTERCEPT)
        .map(|c| Interval {
            label: c.name.clone(),
            estimate: c.estimate,
            low: c.ci_low,
            high: c.ci_high,
        })
        .collect();
    Some(interval_plot(title, "log-odds of crew win (95% CI)", &rows, 0.0, false))
}

fn push_test(t: &mut Table, name: &str, test: &Section<ChiSquaredResult>) {
    match test {
        Section::Ready(c) => t.push(vec![name.into(), num(c.statistic), c.df.to_string(), num(c.p_value), String::new()]),
        Section::Insufficient(r) => t.push(vec![name.into(), String::new(), String::new(), String::new(), r.clone()]),
    }
}

fn push_corr(row: &mut Vec<String>, c: &Section<CorrelationResult>) {
    match c {
        Section::Ready(c) => row.extend([num(c.coefficient), num(c.p_value), c.n.to_string(), String::new()]),
        Section::Insufficient(r) => row.extend([String::new(), String::new(), String::new(), r.clone()]),
    }
}

fn role_rows(t: &mut Table, table: &RoleActTable) {
    for (i, cat) in table.categories.iter().enumerate() {
        t.push(vec![
            cat.clone(),
            table.crew[i].to_string(),
            num(table.crew_share[i]),
            table.impostor[i].to_string(),
            num(table.impostor_share[i]),
        ]);
    }
}

const ROLE_HEADER: &[&str] = &["act", "crew_count", "crew_share", "impostor_count", "impostor_share"];
const CORR_TAIL: [&str; 4] = ["rho", "p_value", "n", "note"];

/// Every CSV table of the report, by file stem.
fn tables(report: &AnalysisReport) -> Vec<(String, Table)> {
    let mut out: Vec<(String, Table)> = Vec::new();

    let mut t = Table::new(&["config", "games", "crew_wins", "impostor_wins", "timeouts"]);
    for (label, c) in &report.games.by_config {
        t.push(vec![
            label.clone(),
            c.games().to_string(),
            c.crew_wins.to_string(),
            c.impostor_wins.to_string(),
            c.timeouts.to_string(),
        ]);
    }
    let g = &report.games;
    t.push(vec![
        "all".into(),
        g.games.to_string(),
        g.crew_wins.to_string(),
        g.impostor_wins.to_string(),
        g.timeouts.to_string(),
    ]);
    out.push(("games".into(), t));

    let u = &report.utterances;
    let mut t = Table::new(&["opportunities", "abstentions", "classified", "unclassifiable", "unannotated"]);
    t.push(
        [u.opportunities, u.abstentions, u.classified, u.unclassifiable, u.unannotated]
            .iter()
            .map(|v| v.to_string())
            .collect(),
    );
    out.push(("utterances".into(), t));

    let header = &["config", "role", "wins", "decided", "win_rate", "rounds", "cumulative_fraction"];
    if let Some(w) = section(&report.win_ecdfs, header, &mut out, "win_ecdf") {
        let mut t = Table::new(header);
        for c in &w.curves {
            let lead = vec![
                c.config.clone(),
                c.role.to_string(),
                c.wins.to_string(),
                c.decided.to_string(),
                num(c.win_rate),
            ];
            if c.rounds.is_empty() {
                t.push([lead.clone(), vec![String::new(), String::new()]].concat());
            }
            for (x, f) in &c.rounds {
                t.push([lead.clone(), vec![num(*x), num(*f)]].concat());
            }
        }
        out.push(("win_ecdf".into(), t));
    }

    let header = &["config", "games", "measure", "value", "cumulative_fraction"];
    if let Some(r) = section(&report.round_ecdfs, header, &mut out, "round_ecdf") {
        let mut t = Table::new(header);
        for c in &r.curves {
            for (measure, pts) in [
                ("discussions_per_game", &c.discussions_per_game),
                ("ejections_per_game", &c.ejections_per_game),
                ("discussion_round", &c.discussion_rounds),
                ("ejection_round", &c.ejection_rounds),
            ] {
                for (x, f) in pts {
                    t.push(vec![c.config.clone(), c.games.to_string(), measure.into(), num(*x), num(*f)]);
                }
            }
        }
        out.push(("round_ecdf".into(), t));
    }

    out.push(("game_model".into(), model_table(&report.game_model)));

    let mut tests = Table::new(&["test", "statistic", "df", "p_value", "note"]);

    if let Some(s) = section(&report.speech_by_role, ROLE_HEADER, &mut out, "speech_acts_by_role") {
        let mut t = Table::new(ROLE_HEADER);
        role_rows(&mut t, &s.table);
        out.push(("speech_acts_by_role".into(), t));
        push_test(&mut tests, "speech_act_by_role", &s.table.test);

        let header = &[
            "act", "impostor_count", "impostor_total", "crew_count", "crew_total", "odds_ratio", "ci_low", "ci_high",
            "z", "z_p_value", "note",
        ];
        let mut t = Table::new(header);
        for c in &s.contrasts {
            let mut row = vec![
                c.act.clone(),
                c.impostor_count.to_string(),
                c.impostor_total.to_string(),
                c.crew_count.to_string(),
                c.crew_total.to_string(),
            ];
            let mut notes = Vec::new();
            match &c.odds_ratio {
                Section::Ready(o) => row.extend([num(o.odds_ratio), num(o.ci_low), num(o.ci_high)]),
                Section::Insufficient(r) => {
                    row.extend([String::new(), String::new(), String::new()]);
                    notes.push(r.clone());
                }
            }
            match &c.z_test {
                Section::Ready(z) => row.extend([num(z.z), num(z.p_value)]),
                Section::Insufficient(r) => {
                    row.extend([String::new(), String::new()]);
                    notes.push(r.clone());
                }
            }
            row.push(notes.join("; "));
            t.push(row);
        }
        out.push(("speech_act_odds_ratios".into(), t));
    }

    let header = &["act", "crew_win_count", "crew_loss_count"];
    if let Some(s) = section(&report.speech_outcome, header, &mut out, "speech_acts_by_outcome") {
        let mut t = Table::new(header);
        for (i, cat) in s.categories.iter().enumerate() {
            t.push(vec![cat.clone(), s.crew_win[i].to_string(), s.crew_loss[i].to_string()]);
        }
        out.push(("speech_acts_by_outcome".into(), t));
        out.push(("speech_act_outcome_model".into(), model_table(&s.model)));
        push_test(&mut tests, "speech_act_by_outcome", &s.test);
    }

    if let Some(p) = section(&report.pre_ejection, ROLE_HEADER, &mut out, "pre_ejection_speech_acts") {
        let mut t = Table::new(ROLE_HEADER);
        role_rows(&mut t, &p.table);
        out.push(("pre_ejection_speech_acts".into(), t));
        push_test(&mut tests, "pre_ejection_speech_act_by_role", &p.table.test);
    }

    let header = &["measure", "value", "pairs", "p_value", "note"];
    if let Some(c) = section(&report.cross_role, header, &mut out, "cross_role") {
        let mut t = Table::new(header);
        for (name, d) in [("crew_delta", &c.crew_delta), ("impostor_delta", &c.impostor_delta)] {
            match d {
                Section::Ready(d) => t.push(vec![name.into(), num(d.delta), d.pairs.to_string(), String::new(), String::new()]),
                Section::Insufficient(r) => t.push(vec![name.into(), String::new(), String::new(), String::new(), r.clone()]),
            }
        }
        for (name, r) in [
            ("impostor_then_crew_r", &c.impostor_then_crew),
            ("crew_then_impostor_r", &c.crew_then_impostor),
        ] {
            match r {
                Section::Ready(r) => t.push(vec![name.into(), num(r.coefficient), r.n.to_string(), num(r.p_value), String::new()]),
                Section::Insufficient(x) => t.push(vec![name.into(), String::new(), String::new(), String::new(), x.clone()]),
            }
        }
        out.push(("cross_role".into(), t));
    }

    let header = &[
        "slice", "group", "label", "count", "total", "proportion", "logit", "se", "ci_low", "ci_high",
    ];
    if let Some(d) = section(&report.deception, header, &mut out, "deception_proportions") {
        let mut t = Table::new(header);
        let slices = std::iter::once(("overall", &d.overall))
            .chain(d.by_outcome.iter().map(|g| ("outcome", g)))
            .chain(d.by_role.iter().map(|g| ("role", g)));
        for (slice, g) in slices {
            for s in &g.shares {
                let p = &s.share;
                t.push(vec![
                    slice.into(),
                    g.group.clone(),
                    s.label.clone(),
                    p.count.to_string(),
                    p.total.to_string(),
                    num(p.proportion),
                    num(p.logit),
                    num(p.se),
                    num(p.ci_low),
                    num(p.ci_high),
                ]);
            }
        }
        out.push(("deception_proportions".into(), t));
        push_test(&mut tests, "deception_by_outcome", &d.outcome_test);
        push_test(&mut tests, "deception_by_role", &d.role_test);
    }

    let header: Vec<&'static str> = ["deception", "act"].into_iter().chain(CORR_TAIL).collect();
    if let Some(c) = section(&report.speech_deception, &header, &mut out, "speech_deception_spearman") {
        let mut t = Table::new(&header);
        for cell in &c.cells {
            let mut row = vec![cell.deception.clone(), cell.act.clone()];
            push_corr(&mut row, &cell.result);
            t.push(row);
        }
        out.push(("speech_deception_spearman".into(), t));
    }

    let header: Vec<&'static str> = ["deception"].into_iter().chain(CORR_TAIL).collect();
    if let Some(e) = section(&report.deception_efficiency, &header, &mut out, "deception_ejections") {
        let mut t = Table::new(&header);
        for c in &e.correlations {
            let mut row = vec![c.deception.clone()];
            push_corr(&mut row, &c.result);
            t.push(row);
        }
        out.push(("deception_ejections".into(), t));
        out.push(("deception_outcome_model".into(), model_table(&e.model)));
    }

    out.push(("tests".into(), tests));
    out
}

fn plots(report: &AnalysisReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Some(w) = report.win_ecdfs.ready() {
        let series: Vec<Series> = w
            .curves
            .iter()
            .map(|c| Series {
                name: format!("{} {}", c.config, c.role),
                points: c.rounds.clone(),
            })
            .collect();
        out.push(("win_ecdf".into(), step_plot("Wins by role and configuration", "rounds played", &series)));
    }
    if let Some(r) = report.round_ecdfs.ready() {
        for (stem, title, pick) in [
            ("discussion_ecdf", "Discussions over rounds", 0),
            ("ejection_ecdf", "Ejections over rounds", 1),
        ] {
            let series: Vec<Series> = r
                .curves
                .iter()
                .map(|c| Series {
                    name: c.config.clone(),
                    points: if pick == 0 { c.discussion_rounds.clone() } else { c.ejection_rounds.clone() },
                })
                .collect();
            out.push((stem.to_string(), step_plot(title, "round", &series)));
        }
    }
    if let Some(svg) = model_plot("Crew win model", &report.game_model) {
        out.push(("game_model".into(), svg));
    }
    if let Some(s) = report.speech_by_role.ready() {
        let rows: Vec<Interval> = s
            .contrasts
            .iter()
            .filter_map(|c| {
                let o = c.odds_ratio.ready()?;
                Some(Interval {
                    label: c.act.clone(),
                    estimate: o.odds_ratio,
                    low: o.ci_low,
                    high: o.ci_high,
                })
            })
            .collect();
        out.push((
            "speech_act_odds_ratios".into(),
            interval_plot("Impostor vs crew odds by speech act", "odds ratio (95% CI)", &rows, 1.0, true),
        ));
    }
    if let Some(s) = report.speech_outcome.ready() {
        if let Some(m) = s.model.ready() {
            let rows: Vec<Interval> = m
                .odds_ratios
                .iter()
                .filter(|o| o.term != deceit_stats::logistic::INTERCEPT)
                .map(|o| Interval {
                    label: o.term.clone(),
                    estimate: o.odds_ratio,
                    low: o.ci_low,
                    high: o.ci_high,
                })
                .collect();
            out.push((
                "speech_act_outcome_model".into(),
                interval_plot("Crew win odds by speech-act share", "odds ratio per percentage point", &rows, 1.0, true),
            ));
        }
    }
    if let Some(d) = report.deception.ready() {
        let rows: Vec<Interval> = d
            .by_outcome
            .iter()
            .chain(&d.by_role)
            .flat_map(|g| {
                g.shares.iter().map(move |s| Interval {
                    label: format!("{} {}", g.group, s.label),
                    estimate: s.share.logit,
                    low: s.share.ci_low,
                    high: s.share.ci_high,
                })
            })
            .collect();
        out.push((
            "deception_logit".into(),
            interval_plot("Deception label shares", "logit proportion (95% CI)", &rows, 0.0, false),
        ));
    }
    if let Some(e) = report.deception_efficiency.ready() {
        if let Some(svg) = model_plot("Crew win by deception counts", &e.model) {
            out.push(("deception_outcome_model".into(), svg));
        }
    }
    out
}

/// The report as pretty JSON with a trailing newline.
pub fn report_json(report: &AnalysisReport) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Writes `report.json`, `csv/<table>.csv` and `svg/<figure>.svg` under `dir`.
pub fn write_report(report: &AnalysisReport, dir: &Path) -> Result<(), HarnessError> {
    let csv_dir = dir.join("csv");
    let svg_dir = dir.join("svg");
    for d in [dir, &csv_dir, &svg_dir] {
        std::fs::create_dir_all(d).map_err(HarnessError::io(d))?;
    }
    let path = dir.join("report.json");
    std::fs::write(&path, report_json(report)?).map_err(HarnessError::io(&path))?;
    for (stem, table) in tables(report) {
        let path = csv_dir.join(format!("{stem}.csv"));
        std::fs::write(&path, table.to_bytes()?).map_err(HarnessError::io(&path))?;
    }
    for (stem, svg) in plots(report) {
        let path = svg_dir.join(format!("{stem}.svg"));
        std::fs::write(&path, svg).map_err(HarnessError::io(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::synthetic::{planted_corpus, PlantedEffects};

    #[test]
    fn every_table_has_its_header() {
        let (records, corpus) = planted_corpus(&PlantedEffects {
            games: 80,
            ..Default::default()
        });
        let report = analyze(&records, Some(&corpus)).unwrap();
        let tables = tables(&report);
        let names: Vec<&str> = tables.iter().map(|(n, _)| n.as_str()).collect();
        for expected in [
            "games",
            "win_ecdf",
            "round_ecdf",
            "game_model",
            "speech_acts_by_role",
            "speech_act_odds_ratios",
            "speech_act_outcome_model",
            "pre_ejection_speech_acts",
            "cross_role",
            "deception_proportions",
            "speech_deception_spearman",
            "deception_ejections",
            "deception_outcome_model",
            "tests",
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
        for (_, t) in &tables {
            for r in &t.rows {
                assert_eq!(r.len(), t.header.len());
            }
        }
    }

    #[test]
    fn insufficient_sections_write_a_note() {
        let report = analyze(&[], None).unwrap();
        let tables = tables(&report);
        let (_, t) = tables.iter().find(|(n, _)| n == "deception_proportions").unwrap();
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert!(text.ends_with("# insufficient data: no annotations\n"));
    }
}
