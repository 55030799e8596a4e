//! Numerical certification suite: re-runs the key experiments and checks the
//! proved bounds at fixed tolerances, one pass/fail line per check.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dbb_core::diagnostics::{check_consensus_bound, contraction_bound};
use dbb_core::numerics::{norm, sub};
use dbb_core::objectives::{
    random_network_objective, random_spd_with_spectrum, NetworkObjective, Objective,
    QuadraticAgentObjective,
};
use dbb_core::step::{bb1_step, bb2_step, BbOutcome, ClampMode, StepRule, StepVariant};
use dbb_core::topology::{metropolis_weights, Graph, MixingMatrix};
use dbb_core::{run_distributed, solve_centralized};

use crate::config::RuleVariant;
use crate::presets::fig2_config;
use crate::runner::run_distributed_config;

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        superlinear_exact(seed)?,
        step_size_sandwich(seed)?,
        q_linear_certificate(seed)?,
        consensus_deviation(seed)?,
        reduction_oracle(seed)?,
    ])
}

fn identity_agent(p: usize, rng: &mut ChaCha8Rng) -> QuadraticAgentObjective {
    let mut a = vec![0.0; p * p];
    for i in 0..p {
        a[i * p + i] = 1.0;
    }
    let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    QuadraticAgentObjective::new(p, a, b).expect("identity Hessian is SPD")
}

fn seeded_x0(p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = norm(&v).max(1e-9);
    v.iter().map(|x| x * 10.0 / n).collect()
}

/// Identity-Hessian BB1: exact optimum at round 2 centralized, and within 5
/// rounds for 10 identical agents under uniform complete-graph weights.
fn superlinear_exact(seed: u64) -> Result<CheckResult> {
    let p = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule = StepRule::new(StepVariant::Bb1).with_alpha0(0.5);

    let obj = identity_agent(p, &mut rng);
    let x0 = seeded_x0(p, &mut rng);
    let trace = solve_centralized(&obj, &x0, rule, 1e-8, 10)?;
    let x_star = obj.minimizer()?;
    let central_err = if trace.iterates.len() > 2 {
        norm(&sub(&trace.iterates[2], &x_star))
    } else {
        f64::INFINITY
    };

    let agent = identity_agent(p, &mut rng);
    let net = NetworkObjective::new(vec![agent; 10])?;
    let w = metropolis_weights(&Graph::complete(10)?)?;
    let x0s: Vec<Vec<f64>> = (0..10).map(|_| seeded_x0(p, &mut rng)).collect();
    let dtrace = run_distributed(&net, &w, rule, &x0s, 1e-8, 10)?;
    let dist_err = dtrace
        .records
        .iter()
        .filter(|r| r.round <= 5)
        .map(|r| r.opt_err)
        .fold(f64::INFINITY, f64::min);

    let pass = central_err < 1e-12 && dist_err < 1e-10;
    Ok(CheckResult::new(
        "superlinear-exact",
        pass,
        format!("centralized err {central_err:.3e} at round 2, distributed best err {dist_err:.3e} by round 5"),
    ))
}

/// 1/L <= 2/(mu+L) <= 1/mu for 1000 random pairs, and raw BB steps on random
/// quadratics stay inside [1/L, 1/mu] up to 1e-10.
fn step_size_sandwich(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..1000 {
        let mu: f64 = rng.gen_range(1e-6..10.0);
        let l = mu + rng.gen_range(0.0..100.0);
        let h = 2.0 / (mu + l);
        worst_slack = worst_slack.min(h - 1.0 / l).min(1.0 / mu - h);
    }
    let mut bb_ok = true;
    let mut worst_bb = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8);
        let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..30.0)).collect();
        let h = random_spd_with_spectrum(n, &eigs, &mut rng)?;
        let (mu, l) = h.eig_bounds()?;
        let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if norm(&s) < 1e-6 {
            continue;
        }
        let y = h.matvec(&s)?;
        for outcome in [bb1_step(&s, &y), bb2_step(&s, &y)] {
            if let BbOutcome::Step(a) = outcome {
                let violation = (1.0 / l - a).max(a - 1.0 / mu).max(0.0);
                worst_bb = worst_bb.max(violation);
                if violation > 1e-10 {
                    bb_ok = false;
                }
            } else {
                bb_ok = false;
            }
        }
    }
    let pass = worst_slack >= -1e-15 && bb_ok;
    Ok(CheckResult::new(
        "step-size-sandwich",
        pass,
        format!("min sandwich slack {worst_slack:.3e}, max BB range violation {worst_bb:.3e}"),
    ))
}

/// Lemma-range clamped runs contract at least as fast as sqrt(1 - c2/L) on 20
/// seeded quadratics; mu = L gives a zero bound and immediate termination.
fn q_linear_certificate(seed: u64) -> Result<CheckResult> {
    let mut worst_excess = f64::NEG_INFINITY;
    let rule = StepRule::new(StepVariant::Bb1).with_clamp(ClampMode::LemmaRange);
    for k in 0..20 {
        let net = random_network_objective(1, 6, 40.0, seed.wrapping_add(k))?;
        let obj = net.agent(0);
        let (mu, l) = obj.curvature();
        let bound = contraction_bound(mu, l);
        let x_star = obj.minimizer()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000 + k));
        let x0 = seeded_x0(6, &mut rng);
        let trace = solve_centralized(obj, &x0, rule, 1e-10, 300)?;
        let mut prev = norm(&sub(&trace.iterates[0], &x_star));
        for it in &trace.iterates[1..] {
            let err = norm(&sub(it, &x_star));
            if prev >= 1e-14 {
                worst_excess = worst_excess.max(err / prev - bound);
            }
            prev = err;
        }
    }

    // mu == L: the bound is exactly zero and one in-range step terminates
    let p = 4;
    let obj = {
        let mut a = vec![0.0; p * p];
        for i in 0..p {
            a[i * p + i] = 3.0;
        }
        QuadraticAgentObjective::new(p, a, vec![0.5, -1.0, 2.0, 0.25])?
    };
    let (mu, l) = obj.curvature();
    let equal_bound = contraction_bound(mu, l);
    let x_star = obj.minimizer()?;
    let trace = solve_centralized(&obj, &[5.0, -2.0, 1.0, 0.0], rule, 1e-10, 10)?;
    let terminal_err = norm(&sub(&trace.iterates[1], &x_star));

    let pass = worst_excess <= 1e-9 && equal_bound == 0.0 && terminal_err < 1e-12;
    Ok(CheckResult::new(
        "q-linear-certificate",
        pass,
        format!(
            "max ratio excess {worst_excess:.3e}, mu = L bound {equal_bound}, terminal err {terminal_err:.3e}"
        ),
    ))
}

/// Consensus deviation bound on the 100-node fig2 network under BB1.
fn consensus_deviation(seed: u64) -> Result<CheckResult> {
    let mut cfg = fig2_config(seed);
    cfg.rule.variant = RuleVariant::Bb1;
    let trace = run_distributed_config(&cfg)?;
    let check = check_consensus_bound(
        &trace.records,
        trace.grad_bound,
        trace.mu_min,
        trace.lambda,
    )?;
    Ok(CheckResult::new(
        "consensus-deviation-bound",
        check.pass,
        format!(
            "{} rounds, min slack {:.3e} (G {:.3e}, lambda {:.3e})",
            trace.records.len(),
            check.min_slack,
            trace.grad_bound,
            trace.lambda
        ),
    ))
}

/// Largest gap between the distributed average at round k and the centralized
/// iterate x(k), over the rounds both runs completed.
fn trajectory_deviation(averages: &[Vec<f64>], iterates: &[Vec<f64>]) -> f64 {
    averages
        .iter()
        .zip(iterates.iter().skip(1))
        .map(|(a, b)| norm(&sub(a, b)))
        .fold(0.0f64, f64::max)
}

/// The distributed engine degenerates to the centralized solver: exactly for
/// n = 1 with W = [[1]], and within 1e-12 for identical agents under uniform
/// weights started from a common point.
fn reduction_oracle(seed: u64) -> Result<CheckResult> {
    let p = 5;
    let rule = StepRule::new(StepVariant::Bb1);
    let eps = 1e-300;
    let rounds = 30;

    let net1 = random_network_objective(1, p, 15.0, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let x0 = seeded_x0(p, &mut rng);
    let central = solve_centralized(&net1, &x0, rule, eps, rounds)?;
    let dist = run_distributed(
        &net1,
        &MixingMatrix::single(),
        rule,
        &[x0.clone()],
        eps,
        rounds,
    )?;
    let max_dev_single = trajectory_deviation(&dist.averages, &central.iterates);

    let agent = net1.agent(0).clone();
    let n = 8;
    let net = NetworkObjective::new(vec![agent.clone(); n])?;
    let w = metropolis_weights(&Graph::complete(n)?)?;
    let x0s = vec![x0.clone(); n];
    let dist_n = run_distributed(&net, &w, rule, &x0s, eps, rounds)?;
    let central_one = solve_centralized(&agent, &x0, rule, eps, rounds)?;
    let max_dev_multi = trajectory_deviation(&dist_n.averages, &central_one.iterates);

    let pass = max_dev_single <= 1e-12 && max_dev_multi <= 1e-12;
    Ok(CheckResult::new(
        "reduction-oracle",
        pass,
        format!("n=1 max deviation {max_dev_single:.3e}, identical-agent max deviation {max_dev_multi:.3e}"),
    ))
}
