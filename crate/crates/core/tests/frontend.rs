use sitcalc::error::Error;
use sitcalc::fixtures::*;
use sitcalc::frontend::{
    parse_mapping, parse_project, parse_theory, print_mapping, print_theory, run_command, Options,
    Verb, EXIT_OK,
};

const THEORIES: [&str; 9] = [
    LOGISTICS_HIGH,
    LOGISTICS_HIGH_COMPLETE,
    LOGISTICS_HIGH_ONESHOT,
    LOGISTICS_LOW,
    LOGISTICS_LOW_ONESHOT,
    ABPQR_HIGH,
    ABPQR_LOW,
    OVERLAP_HIGH,
    OVERLAP_LOW,
];

#[test]
fn printed_theories_parse_back() {
    for src in THEORIES {
        let t = parse_theory(src).unwrap();
        let text = print_theory(&t);
        assert_eq!(parse_theory(&text).unwrap(), t, "{text}");
        assert_eq!(print_theory(&parse_theory(&text).unwrap()), text);
    }
}

#[test]
fn printed_mappings_parse_back() {
    for src in [LOGISTICS_MAPPING, ABPQR_MAPPING, OVERLAP_MAPPING] {
        let m = parse_mapping(src).unwrap();
        let text = print_mapping(&m);
        assert_eq!(parse_mapping(&text).unwrap(), m, "{text}");
    }
}

#[test]
fn logistics_declarations() {
    let p = logistics().unwrap();
    assert_eq!(p.high.actions().len(), 2);
    assert_eq!(p.low.actions().len(), 3);
    assert_eq!(p.high.domain().len(), 17);
    assert_eq!(p.high.initial_models().len(), 2);
    assert_eq!(p.low.initial_models().len(), 1);
    assert_eq!(p.high.vocab().fluents().len(), 5);
    assert_eq!(p.low.vocab().fluents().len(), 9);
}

#[test]
fn an_empty_fluent_section_is_allowed() {
    let t = parse_theory("domain:\nfluents:\naction go possible when true\n").unwrap();
    assert!(t.fluents.is_empty());
    assert_eq!(t.actions.len(), 1);
}

#[test]
fn every_high_level_fluent_needs_a_mapping() {
    let map: String = LOGISTICS_MAPPING
        .lines()
        .filter(|l| !l.starts_with("map fluent Dest_HL"))
        .collect::<Vec<_>>()
        .join("\n");
    let err = parse_project(LOGISTICS_HIGH, LOGISTICS_LOW, &map).unwrap_err();
    assert_eq!(err, Error::UnmappedSymbol("Dest_HL".into()));
}

#[test]
fn shared_symbols_are_rejected() {
    let low = LOGISTICS_LOW.replace("Express", "Priority");
    let err = parse_project(LOGISTICS_HIGH, &low, LOGISTICS_MAPPING).unwrap_err();
    assert_eq!(err, Error::VocabularyClash("Priority".into()));
}

#[test]
fn mapping_arity_is_checked() {
    let map =
        LOGISTICS_MAPPING.replace("map fluent Delivered(sID)", "map fluent Delivered(sID, x)");
    assert!(matches!(
        parse_project(LOGISTICS_HIGH, LOGISTICS_LOW, &map),
        Err(Error::ArityMismatch {
            expected: 1,
            found: 2,
            ..
        })
    ));
}

#[test]
fn syntax_errors_point_at_the_offending_token() {
    let err =
        parse_theory("domain: A\nfluents: F/1\naction go possible when F(A) &\n").unwrap_err();
    let Error::Syntax { line, .. } = err else {
        panic!("{err:?}");
    };
    assert!(line >= 3);
}

#[test]
fn reports_are_deterministic() {
    let p = logistics().unwrap();
    let opts = Options {
        goal: Some("Delivered(123)".into()),
        trace: Some(
            "takeRoad(123, Rd_a, W, L1), takeRoad(123, Rd_b, L1, L2), takeRoad(123, Rd_f, L2, L4)"
                .into(),
        ),
        ..Options::default()
    };
    for verb in [
        Verb::Validate,
        Verb::CheckSound,
        Verb::CheckComplete,
        Verb::Plan,
        Verb::Explain,
        Verb::Forecast,
    ] {
        let a = run_command(verb, &p, &opts);
        let b = run_command(verb, &logistics().unwrap(), &opts);
        assert_eq!(a, b, "{}", verb.name());
        assert!(!a.text.is_empty());
    }
    assert_eq!(run_command(Verb::Validate, &p, &opts).code, EXIT_OK);
}
