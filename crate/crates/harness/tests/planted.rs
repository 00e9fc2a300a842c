use deceit_harness::analysis::AnalysisReport;
use deceit_harness::{analyze, planted_corpus, PlantedEffects};

fn report(p: &PlantedEffects) -> AnalysisReport {
    let (records, corpus) = planted_corpus(p);
    analyze(&records, Some(&corpus)).unwrap()
}

#[test]
fn win_model_recovers_planted_signs() {
    let r = report(&PlantedEffects::default());
    let model = r.game_model.ready().expect("game model");
    let imp = model.fit.coefficient("num_impostors").unwrap();
    assert!(imp.estimate < 0.0 && imp.ci_high < 0.0, "{imp:?}");
    let ej = model.fit.coefficient("num_ejects").unwrap();
    assert!(ej.estimate > 0.0 && ej.ci_low > 0.0, "{ej:?}");
    let crew = model.fit.coefficient("num_crew").unwrap();
    assert!(crew.estimate > 0.0, "{crew:?}");
    assert!(model.fit.converged);
}

#[test]
fn shares_match_planted_proportions() {
    let r = report(&PlantedEffects::default());
    let dec = r.deception.ready().expect("deception");
    let eq = dec.overall.shares.iter().find(|s| s.label == "Equivocation").unwrap();
    assert!((eq.share.proportion - 0.90).abs() <= 0.005, "{}", eq.share.proportion);

    let speech = r.speech_by_role.ready().expect("speech by role");
    let t = &speech.table;
    let d = t.categories.iter().position(|c| c == "Directives").unwrap();
    assert!((t.crew_share[d] - 0.97).abs() <= 0.005);
    assert!((t.impostor_share[d] - 0.95).abs() <= 0.005);
    let all = (t.crew[d] + t.impostor[d]) as f64 / (t.crew.iter().sum::<u64>() + t.impostor.iter().sum::<u64>()) as f64;
    assert!(all >= 0.95, "{all}");

    let reps = speech.contrasts.iter().find(|c| c.act == "Representatives").unwrap();
    let or = reps.odds_ratio.ready().unwrap();
    assert!(or.odds_ratio > 1.0 && or.ci_low > 1.0, "{or:?}");
}

#[test]
fn abstentions_and_timeouts_are_counted_but_excluded() {
    let p = PlantedEffects::default();
    let r = report(&p);
    assert_eq!(r.games.timeouts, p.games / p.timeout_every);
    assert!(r.utterances.abstentions > 0);
    assert_eq!(r.utterances.unannotated, 0);
    assert_eq!(r.utterances.classified + r.utterances.abstentions, r.utterances.opportunities);
    let model = r.game_model.ready().unwrap();
    assert_eq!(model.n, p.games - r.games.timeouts);
}

#[test]
fn corpus_without_meetings_degrades_gracefully() {
    let p = PlantedEffects {
        games: 200,
        max_discussions: 0,
        ..Default::default()
    };
    let r = report(&p);
    let rounds = r.round_ecdfs.ready().expect("round curves");
    for c in &rounds.curves {
        assert_eq!(c.discussions_per_game, vec![(0.0, 1.0)], "{}", c.config);
    }
    let model = r.game_model.ready().expect("model still fits");
    for name in ["num_discussions", "num_ejects"] {
        assert!(model.dropped.iter().any(|d| d == name), "{:?}", model.dropped);
        assert!(model.fit.coefficient(name).is_none());
    }
    assert!(!model.warnings.is_empty());
    assert!(r.speech_by_role.ready().is_none());
    assert!(r.deception.ready().is_none());
}
