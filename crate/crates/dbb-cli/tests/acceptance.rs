//! End-to-end acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line. Run with `--nocapture` to see the lines for passing tests.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use dbb_cli::presets::run_preset;
use dbb_cli::verify::{run_all, CheckResult};

/// The certification suite is shared by several criteria; run it once.
fn checks() -> &'static [CheckResult] {
    static CHECKS: OnceLock<Vec<CheckResult>> = OnceLock::new();
    CHECKS.get_or_init(|| run_all(0).expect("certification suite runs"))
}

fn check(name: &str) -> &'static CheckResult {
    checks()
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("{status} {criterion}: {detail}");
    assert!(pass, "{criterion}: {detail}");
}

/// Final opt_err (third column) of the last row of a trace CSV.
fn final_opt_err(path: &Path) -> f64 {
    let body = std::fs::read_to_string(path).expect("trace exists");
    let last = body.lines().last().expect("nonempty trace");
    last.split(',').nth(2).expect("opt_err column").parse().expect("numeric opt_err")
}

#[test]
fn criterion_1_superlinear_exact() {
    let c = check("superlinear-exact");
    // the preset re-runs the same case end to end and carries the time budget
    let dir = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    run_preset("superlinear", dir.path(), 0).expect("superlinear preset runs");
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 1 (superlinear exact case)",
        c.pass && elapsed < 1.0,
        &format!("{} (preset in {elapsed:.2}s)", c.detail),
    );
}

#[test]
fn criterion_2_fig1_gap() {
    let dir = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    run_preset("fig1_centralized", dir.path(), 0).expect("fig1 preset runs");
    let elapsed = start.elapsed().as_secs_f64();
    let bb1 = final_opt_err(&dir.path().join("fig1_bb1.csv"));
    let decay = final_opt_err(&dir.path().join("fig1_decay.csv"));
    let gap = decay / bb1;
    report(
        "criterion 2 (fig1: BB1 vs 1/k decay after 50 iterations)",
        gap >= 1e3 && elapsed < 1.0,
        &format!("BB1 final {bb1:.3e}, decay final {decay:.3e}, gap {gap:.3e} (in {elapsed:.2}s)"),
    );
}

#[test]
fn criterion_3_fig2_ordering() {
    let dir = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    run_preset("fig2_distributed", dir.path(), 0).expect("fig2 preset runs");
    let elapsed = start.elapsed().as_secs_f64();
    let bb1 = final_opt_err(&dir.path().join("fig2_bb1.csv"));
    let inv_l = final_opt_err(&dir.path().join("fig2_inv_l.csv"));
    let inv_mu = final_opt_err(&dir.path().join("fig2_inv_mu.csv"));
    let harm = final_opt_err(&dir.path().join("fig2_harmonic.csv"));
    let bb_smallest = bb1 < inv_l && bb1 < inv_mu && bb1 < harm;
    let harm_between = (inv_l.min(inv_mu)..=inv_l.max(inv_mu)).contains(&harm);
    report(
        "criterion 3 (fig2: rule ordering at round 50)",
        bb_smallest && harm_between && elapsed < 10.0,
        &format!(
            "finals: BB1 {bb1:.3e}, 1/L {inv_l:.3e}, 2/(mu+L) {harm:.3e}, 1/mu {inv_mu:.3e}; \
             BB1 smallest: {bb_smallest}, harmonic between: {harm_between} (in {elapsed:.2}s)"
        ),
    );
}

#[test]
fn criterion_4_step_size_sandwich() {
    let c = check("step-size-sandwich");
    report("criterion 4 (step-size sandwich and BB range)", c.pass, &c.detail);
}

#[test]
fn criterion_5_q_linear_certificate() {
    let c = check("q-linear-certificate");
    report("criterion 5 (centralized Q-linear certificate)", c.pass, &c.detail);
}

#[test]
fn criterion_6_consensus_deviation_bound() {
    let c = check("consensus-deviation-bound");
    report("criterion 6 (consensus-deviation bound, 100-node preset)", c.pass, &c.detail);
}

#[test]
fn criterion_7_reduction_oracle() {
    let c = check("reduction-oracle");
    report("criterion 7 (distributed-to-centralized reduction)", c.pass, &c.detail);
}

#[test]
fn criterion_8_determinism_and_verify_exit() {
    let exe = env!("CARGO_BIN_EXE_dbb");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = Command::new(exe)
            .args(["preset", "fig2_distributed", "--seed", "0", "--out"])
            .arg(dir.path())
            .status()
            .expect("preset subprocess");
        assert!(status.success(), "preset run failed");
    }
    let mut identical = true;
    for file in ["fig2_inv_l.csv", "fig2_inv_mu.csv", "fig2_harmonic.csv", "fig2_bb1.csv"] {
        let a = std::fs::read(dirs[0].path().join(file)).expect("first run trace");
        let b = std::fs::read(dirs[1].path().join(file)).expect("second run trace");
        identical &= a == b;
    }
    let verify_status = Command::new(exe).arg("verify").status().expect("verify subprocess");
    report(
        "criterion 8 (byte-identical reruns, verify exit code)",
        identical && verify_status.code() == Some(0),
        &format!(
            "CSVs byte-identical: {identical}, verify exit code: {:?}",
            verify_status.code()
        ),
    );
}
