//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (visible with `-- --nocapture`). Run with optimizations, e.g.
//! `cargo test -p lognls-cli --release --test acceptance`.

use lognls_cli::acceptance::run_criterion;

fn check(id: usize) {
    let report = run_criterion(id, 42);
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_gausson_fixed_point() {
    check(1);
}

#[test]
fn criterion_02_breather_periodicity() {
    check(2);
}

#[test]
fn criterion_03_negative_lambda_asymptotic() {
    check(3);
}

#[test]
fn criterion_04_solver_vs_exact_flow() {
    check(4);
}

#[test]
fn criterion_05_l2_stability_envelope() {
    check(5);
}

#[test]
fn criterion_06_multi_gausson_rate() {
    check(6);
}

#[test]
fn criterion_07_multi_gaussian_rate() {
    check(7);
}

#[test]
fn criterion_08_rigidity_lower_bound() {
    check(8);
}

#[test]
fn criterion_09_inequality_certification() {
    check(9);
}

#[test]
fn criterion_10_sum_log_decay_exponent() {
    check(10);
}

#[test]
fn criterion_11_slow_variation() {
    check(11);
}

#[test]
fn criterion_12_weighted_norm_ladder() {
    check(12);
}

#[test]
fn runtime_budgets() {
    // the heavy criteria carry explicit runtime budgets; measure the
    // dominant ones directly (each well under its limit on desk hardware)
    for (id, limit_s) in [(3usize, 30.0f64), (4, 30.0), (6, 600.0), (7, 600.0), (9, 120.0), (10, 60.0)] {
        let report = run_criterion(id, 42);
        assert!(report.passed, "{}", report.line());
        assert!(
            report.runtime_s < limit_s,
            "criterion {id} took {:.1}s (budget {limit_s}s)",
            report.runtime_s
        );
    }
}
