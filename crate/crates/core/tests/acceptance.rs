//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values (run with `--nocapture` to see passing lines).

use shellwave_core::acceptance::{self, CriterionResult};

fn assert_criterion(r: CriterionResult) {
    println!("{}", acceptance::format_line(&r));
    for c in &r.checks {
        println!(
            "    {} {}: measured {:.6e}, threshold {} {:.3e}",
            if c.pass { "ok " } else { "BAD" },
            c.label,
            c.measured,
            c.cmp,
            c.threshold
        );
    }
    assert!(r.pass, "{}", acceptance::format_line(&r));
}

#[test]
fn criterion_01_s3_oracle_equivalence() {
    assert_criterion(acceptance::criterion_01().unwrap());
}

#[test]
fn criterion_02_s3_antisymmetry() {
    assert_criterion(acceptance::criterion_02().unwrap());
}

#[test]
fn criterion_03_fundamental_integrals() {
    assert_criterion(acceptance::criterion_03().unwrap());
}

#[test]
fn criterion_04_zonal_projections() {
    assert_criterion(acceptance::criterion_04().unwrap());
}

#[test]
fn criterion_05_jacobi_contraction() {
    assert_criterion(acceptance::criterion_05().unwrap());
}

#[test]
fn criterion_06_scattering_rate() {
    assert_criterion(acceptance::criterion_06().unwrap());
}

#[test]
fn criterion_07_parametrix_defect() {
    assert_criterion(acceptance::criterion_07().unwrap());
}

#[test]
fn criterion_08_error_series_decay() {
    assert_criterion(acceptance::criterion_08().unwrap());
}

#[test]
fn criterion_09_born_vs_pde() {
    assert_criterion(acceptance::criterion_09().unwrap());
}

#[test]
fn criterion_10_schrodinger_decay() {
    assert_criterion(acceptance::criterion_10().unwrap());
}

#[test]
fn criterion_11_weighted_algebra() {
    assert_criterion(acceptance::criterion_11().unwrap());
}

#[test]
fn criterion_12_exponential_decay() {
    assert_criterion(acceptance::criterion_12().unwrap());
}
