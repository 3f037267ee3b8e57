//! The nine acceptance suites, one test each. Every test prints its
//! one-line verdict and fails with the suite's own account on any miss.

use nil2_cli::suites::{self, SuiteOutcome};

const SEED: u64 = 0;

fn assert_suite(outcome: SuiteOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.pass, "{}", outcome.detail);
}

#[test]
fn criterion_1_worked_example_classification() {
    assert_suite(suites::criterion_1(&suites::default_fixtures_dir()));
}

#[test]
fn criterion_2_submodularity_suite() {
    assert_suite(suites::criterion_2(SEED));
}

#[test]
fn criterion_3_free_pseudosolution_laws() {
    assert_suite(suites::criterion_3(SEED));
}

#[test]
fn criterion_4_decomposable_witness_solver() {
    assert_suite(suites::criterion_4(&suites::default_fixtures_dir(), SEED));
}

#[test]
fn criterion_5_predimension_floor() {
    assert_suite(suites::criterion_5(SEED));
}

#[test]
fn criterion_6_extension_driver() {
    assert_suite(suites::criterion_6(SEED));
}

#[test]
fn criterion_7_cover_automorphisms() {
    assert_suite(suites::criterion_7(SEED));
}

#[test]
fn criterion_8_orbit_probe() {
    assert_suite(suites::criterion_8());
}

#[test]
fn criterion_9_stabilizer_scan() {
    assert_suite(suites::criterion_9());
}
