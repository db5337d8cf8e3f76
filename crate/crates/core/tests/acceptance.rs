//! The release gate: every numbered check of the seeded harness, run at its
//! full case quota with a fixed seed, one test per check. Each test prints a
//! single `ACCEPTANCE k: PASS`/`FAIL` line (visible under
//! `cargo test -- --nocapture`).

use hnpers::harness::{run_check, HarnessConfig};

fn gate(index: usize) {
    let cfg = HarnessConfig {
        seed: 42,
        quick: false,
        mutation: None,
    };
    let report = run_check(index, &cfg).expect("check indices 1..=10 are valid");
    if report.passed {
        println!("ACCEPTANCE {index}: PASS ({}, {} cases)", report.name, report.cases);
    } else {
        println!("ACCEPTANCE {index}: FAIL — {}", report.detail);
    }
    assert!(report.passed, "ACCEPTANCE {index}: FAIL — {}", report.detail);
}

#[test]
fn acceptance_01_oracle_equivalence() {
    gate(1);
}

#[test]
fn acceptance_02_commuting_diagram() {
    gate(2);
}

#[test]
fn acceptance_03_semistability_transfer() {
    gate(3);
}

#[test]
fn acceptance_04_skyscraper_closed_form() {
    gate(4);
}

#[test]
fn acceptance_05_low_threshold_rank() {
    gate(5);
}

#[test]
fn acceptance_06_interleaving_stability() {
    gate(6);
}

#[test]
fn acceptance_07_functoriality() {
    gate(7);
}

#[test]
fn acceptance_08_landscape_chain() {
    gate(8);
}

#[test]
fn acceptance_09_chamber_breakpoints() {
    gate(9);
}

#[test]
fn acceptance_10_validation_guardrails() {
    gate(10);
}
