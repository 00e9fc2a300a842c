use std::collections::BTreeMap;

use deceit_annotate::*;
use proptest::prelude::*;

fn run(id: &str, labels: &[(&str, &str)]) -> AnnotationRun {
    AnnotationRun {
        run_id: id.into(),
        backend: "test".into(),
        task: Task::SpeechAct,
        labels: labels
            .iter()
            .map(|(k, l)| (k.parse::<UtteranceKey>().unwrap(), l.to_string()))
            .collect(),
    }
}

fn key(i: usize) -> String {
    format!("g:0:0:{i}")
}

#[test]
fn stability_fixture_four_five_one() {
    // Items 0-3 unanimous, 4-8 two of three, 9 all different.
    let a = ["D", "D", "R", "C", "D", "D", "R", "D", "E", "D"];
    let b = ["D", "D", "R", "C", "D", "R", "R", "C", "E", "R"];
    let c = ["D", "D", "R", "C", "R", "D", "D", "D", "D", "C"];
    let keys: Vec<String> = (0..10).map(key).collect();
    let mk = |id: &str, labels: &[&str]| {
        let pairs: Vec<(&str, &str)> = keys.iter().map(|k| k.as_str()).zip(labels.iter().copied()).collect();
        run(id, &pairs)
    };
    let report = stability(&[mk("r1", &a), mk("r2", &b), mk("r3", &c)]).unwrap();
    assert_eq!(
        (report.identical_fraction, report.two_of_three_fraction, report.all_differ_fraction),
        (0.4, 0.5, 0.1)
    );
    assert_eq!(report.n, 10);
    assert_eq!(report.pairwise.len(), 3);
    assert_eq!(report.pairwise[0].percent, 0.7);
}

#[test]
fn identical_runs_are_fully_stable() {
    let labels = [(key(0).as_str().to_owned(), "D"), (key(1), "R")];
    let pairs: Vec<(&str, &str)> = labels.iter().map(|(k, l)| (k.as_str(), *l)).collect();
    let r = stability(&[run("a", &pairs), run("b", &pairs), run("c", &pairs)]).unwrap();
    assert_eq!((r.identical_fraction, r.two_of_three_fraction, r.all_differ_fraction), (1.0, 0.0, 0.0));
    assert!(r.pairwise.iter().all(|p| p.kappa == Some(1.0)));
}

#[test]
fn disjoint_runs_are_a_coverage_error() {
    let (k0, k1, k2) = (key(0), key(1), key(2));
    let err = stability(&[
        run("a", &[(k0.as_str(), "D")]),
        run("b", &[(k1.as_str(), "D")]),
        run("c", &[(k2.as_str(), "D")]),
    ])
    .unwrap_err();
    match err {
        AnnotateError::Coverage(missing) => assert_eq!(missing, vec![k0, k1, k2]),
        other => panic!("unexpected {other}"),
    }
    assert!(matches!(stability(&[]), Err(AnnotateError::RunCount(0))));
}

#[test]
fn kappa_hand_example() {
    let a = agreement(&["A", "A", "B", "B"], &["A", "B", "B", "B"]).unwrap();
    assert!((a.kappa.unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(a.percent, 0.75);
}

/// Every documented spelling of every label.
#[test]
fn normalization_table_is_exhaustive() {
    let decorations: [fn(&str) -> String; 8] = [
        |s| s.to_string(),
        |s| s.to_lowercase(),
        |s| s.to_uppercase(),
        |s| format!("{s}."),
        |s| format!("  {s}\n"),
        |s| format!("\"{s}\""),
        |s| format!("**{s}**"),
        |s| format!("{}!", s.to_lowercase()),
    ];
    for label in SpeechAct::ALL {
        let plural = label.as_str();
        let singular = plural.strip_suffix('s').unwrap();
        for form in [plural, singular] {
            for d in decorations {
                assert_eq!(SpeechAct::normalize(&d(form)), Some(label), "{:?}", d(form));
            }
        }
    }
    for label in DeceptionLabel::CLASSES {
        let singular = label.as_str();
        let plural = format!("{singular}s");
        for form in [singular, plural.as_str()] {
            for d in decorations {
                assert_eq!(DeceptionLabel::normalize(&d(form)), label, "{:?}", d(form));
            }
        }
    }
    for junk in ["banana", "", "Directive or Commissive", "lie", "Missing data"] {
        assert_eq!(SpeechAct::normalize(junk), None);
        assert_eq!(DeceptionLabel::normalize(junk), DeceptionLabel::Missing);
    }
}

fn labels() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((0u8..4, 0u8..4, 0u8..4), 1..60)
}

proptest! {
    #[test]
    fn agreement_is_symmetric(v in labels()) {
        let a: Vec<u8> = v.iter().map(|t| t.0).collect();
        let b: Vec<u8> = v.iter().map(|t| t.1).collect();
        let ab = agreement(&a, &b).unwrap();
        let ba = agreement(&b, &a).unwrap();
        prop_assert_eq!(ab.percent, ba.percent);
        match (ab.kappa, ba.kappa) {
            (Some(x), Some(y)) => {
                prop_assert!((x - y).abs() < 1e-12);
                prop_assert!((-1.0..=1.0 + 1e-12).contains(&x));
            }
            (None, None) => {}
            _ => prop_assert!(false, "kappa defined on one side only"),
        }
        let aa = agreement(&a, &a).unwrap();
        prop_assert_eq!(aa.percent, 1.0);
        prop_assert!(aa.kappa.is_none() || aa.kappa == Some(1.0));
    }

    #[test]
    fn stability_fractions_sum_to_one(v in labels()) {
        let mk = |id: &str, f: fn(&(u8, u8, u8)) -> u8| AnnotationRun {
            run_id: id.into(),
            backend: "p".into(),
            task: Task::Deception,
            labels: v.iter().enumerate()
                .map(|(i, t)| (UtteranceKey::new("g", 0, 0, i), f(t).to_string()))
                .collect::<BTreeMap<_, _>>(),
        };
        let r = stability(&[mk("a", |t| t.0), mk("b", |t| t.1), mk("c", |t| t.2)]).unwrap();
        let sum = r.identical_fraction + r.two_of_three_fraction + r.all_differ_fraction;
        prop_assert!((sum - 1.0).abs() < 1e-12);
        for f in [r.identical_fraction, r.two_of_three_fraction, r.all_differ_fraction] {
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
