use io_cli::{parse_instance, serialize, IoError};
use matching_core::{deferred_acceptance, Matching, Side};
use two_stage::ScenarioSource;

const FIXTURES: [(&str, &str); 5] = [
    ("fig1", include_str!("../../../fixtures/fig1.txt")),
    ("fig2", include_str!("../../../fixtures/fig2.txt")),
    ("fig5", include_str!("../../../fixtures/fig5.txt")),
    ("fig6", include_str!("../../../fixtures/fig6.txt")),
    ("ex1", include_str!("../../../fixtures/ex1.txt")),
];

fn line_of(text: &str) -> usize {
    match parse_instance(text) {
        Err(IoError::Parse(e)) => e.line,
        Err(IoError::Sibling(siblings_apps::SiblingError::Parse(e))) => e.line,
        Err(IoError::TwoStage(two_stage::TwoStageError::Parse(e))) => e.line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn fig1_gives_the_two_extreme_matchings() {
    let f = parse_instance(FIXTURES[0].1).unwrap();
    let pairs = |m: &Matching| m.pairs();
    assert_eq!(pairs(&deferred_acceptance(&f.instance, Side::Students)), vec![(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]);
    assert_eq!(pairs(&deferred_acceptance(&f.instance, Side::Schools)), vec![(0, 3), (1, 2), (2, 1), (3, 0), (4, 4)]);
}

#[test]
fn every_fixture_round_trips() {
    for (name, text) in FIXTURES {
        let f = parse_instance(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canon = serialize(&f);
        let g = parse_instance(&canon).unwrap_or_else(|e| panic!("{name} canonical: {e}"));
        assert_eq!(serialize(&g), canon, "{name}");
        assert_eq!(g.instance.students(), f.instance.students());
        assert_eq!(g.instance.quotas(), f.instance.quotas());
        for a in 0..f.instance.num_students() {
            assert_eq!(g.instance.student_pref(a), f.instance.student_pref(a));
        }
        for b in 0..f.instance.num_schools() {
            assert_eq!(g.instance.school_pref(b), f.instance.school_pref(b));
        }
        assert_eq!(g.pairs, f.pairs);
        assert_eq!(g.activities.as_ref().map(|a| &a.classes), f.activities.as_ref().map(|a| &a.classes));
        assert_eq!(g.first, f.first);
        assert_eq!(g.scenarios, f.scenarios);
    }
}

#[test]
fn ex1_scenarios_are_read() {
    let f = parse_instance(FIXTURES[4].1).unwrap();
    let ScenarioSource::Explicit(list) = &f.scenarios else { panic!("{:?}", f.scenarios) };
    assert_eq!(list.len(), 2);
    assert_eq!(list[1].2.students, vec![0, 3, 4]);
    assert!(f.two_stage().unwrap().is_some());
}

#[test]
fn truncations_never_panic() {
    for (name, text) in FIXTURES {
        let mut cut = 0;
        for (i, _) in text.char_indices().chain([(text.len(), ' ')]) {
            if let Err(e) = parse_instance(&text[..i]) {
                assert!(!e.to_string().is_empty(), "{name} at {i}");
                cut += 1;
            }
        }
        assert!(cut > 0, "{name}");
        // Dropping whole lines, one at a time, also only yields diagnostics.
        let lines: Vec<&str> = text.lines().collect();
        for skip in 0..lines.len() {
            let t: Vec<&str> = lines.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, l)| *l).collect();
            let _ = parse_instance(&t.join("\n"));
        }
    }
}

#[test]
fn diagnostics_name_the_line() {
    let base = FIXTURES[0].1;
    assert_eq!(line_of(&base.replace("pref a3: b3 b4", "pref a3: b3 b9")), 6);
    assert_eq!(line_of(&base.replace("pref a3: b3 b4 b1 b2 b5 @", "pref a3: b3 b4 b1 b2 b5")), 6);
    assert_eq!(line_of(&base.replace("pref a3: b3 b4 b1 b2 b5 @", "pref a3: b3 b3 b1 b2 b5 @")), 6);
    assert_eq!(line_of(&format!("{base}pref a3: b3 b4 b1 b2 b5 @\n")), 14);
    assert_eq!(line_of(&format!("{base}pair a1 a9\n")), 14);
    assert_eq!(line_of(&format!("{base}scenario J p=1\nkeep-schools b9\n")), 15);
    assert_eq!(line_of(&format!("{base}frobnicate\n")), 14);
}
