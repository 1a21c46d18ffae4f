use qmlearn::verify::{run, Suite};

#[test]
fn every_suite_passes() {
    let report = run(Suite::All, 7);
    for c in &report.checks {
        assert!(
            c.passed,
            "{}: {} (value {}, tolerance {})",
            c.suite, c.name, c.value, c.tolerance
        );
    }
    assert!(report.passed);
}

#[test]
fn reports_are_reproducible() {
    assert_eq!(run(Suite::Metrics, 3), run(Suite::Metrics, 3));
}

#[test]
fn suite_names() {
    assert_eq!("combs".parse::<Suite>().unwrap(), Suite::Combs);
    assert!("nope".parse::<Suite>().is_err());
}
