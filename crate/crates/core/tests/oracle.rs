use monotone_iter::finite::oracle::{
    replay, sandwich_suite, verify_theorem_suite, CounterexampleBundle, Family, SuiteConfig,
};
use monotone_iter::finite::{FinitePoset, TableOperator};

#[test]
fn lattice_suite_is_clean_and_reproducible() {
    let cfg = SuiteConfig::new(7, 300);
    let a = verify_theorem_suite(cfg);
    assert!(a.passed(), "{:?}", a.violations);
    assert!(a.clauses.values().all(|t| t.checked > 0));
    let b = verify_theorem_suite(cfg);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn general_posets_and_larger_sizes() {
    let mut cfg = SuiteConfig::new(11, 300);
    cfg.family = Family::Poset;
    let r = verify_theorem_suite(cfg);
    assert!(r.passed(), "{:?}", r.violations);

    let mut cfg = SuiteConfig::new(12, 60);
    cfg.min_size = 9;
    cfg.max_size = 16;
    let r = verify_theorem_suite(cfg);
    assert!(r.passed(), "{:?}", r.violations);
}

#[test]
fn different_seeds_give_different_trials() {
    let a = verify_theorem_suite(SuiteConfig::new(1, 100));
    let b = verify_theorem_suite(SuiteConfig::new(2, 100));
    assert_ne!(a.clauses, b.clauses);
}

#[test]
fn replay_of_a_swap_reports_mixed_monotonicity() {
    // A(x, y) = y on a 2-chain is antitone in x
    let bundle = CounterexampleBundle {
        poset: FinitePoset::chain(2),
        operator: TableOperator::from_fn(2, |_, y| y),
        start: (0, 1),
        violated: "mixed-monotone".into(),
        trace: vec![(0, 1)],
    };
    let text = serde_json::to_string(&bundle).unwrap();
    let back: CounterexampleBundle = serde_json::from_str(&text).unwrap();
    let out = replay(&back).unwrap();
    assert!(out.reproduced);
    assert_eq!(out.observed, vec!["mixed-monotone".to_string()]);

    let mut wrong = back.clone();
    wrong.violated = "sandwich".into();
    assert!(!replay(&wrong).unwrap().reproduced);
    wrong.start = (0, 5);
    assert!(replay(&wrong).is_err());
}

#[test]
fn bundles_reject_unknown_fields() {
    let text = r#"{"poset":{"size":1,"leq":[[true]]},"operator":[[0]],"start":[0,0],"violated":"x","trace":[],"note":1}"#;
    assert!(serde_json::from_str::<CounterexampleBundle>(text).is_err());
}

#[test]
fn sandwich_suite_small() {
    let r = sandwich_suite(3, 200);
    assert_eq!(r.instances, 200);
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert!(r.pairs_checked >= 200);
}
