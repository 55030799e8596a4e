//! Canned experiment suites. Each preset writes one CSV (plus sidecar) per
//! step rule into the output directory and returns the CSV paths.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use crate::config::{
    ExperimentConfig, Mode, ObjectiveConfig, ObjectiveKind, RuleConfig, RuleVariant,
    TopologyConfig, TopologyKind, WeightsKind,
};
use crate::runner::run_to_files;

/// Effectively "never stop on gradient norm": presets record every round.
const EPS_RUN_ALL: f64 = 1e-300;

pub const PRESET_NAMES: &[&str] = &["fig1_centralized", "fig2_distributed", "superlinear"];

pub fn run_preset(name: &str, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    match name {
        "fig1_centralized" => fig1_centralized(out_dir, seed),
        "fig2_distributed" => fig2_distributed(out_dir, seed),
        "superlinear" => superlinear(out_dir, seed),
        other => bail!("unknown preset '{other}' (expected one of {PRESET_NAMES:?})"),
    }
}

fn base_config(mode: Mode, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        n: 1,
        p: 10,
        topology: TopologyConfig::default(),
        weights: WeightsKind::Metropolis,
        objective: ObjectiveConfig {
            kind: ObjectiveKind::QuadraticNetwork,
            condition_cap: Some(10.0),
            m: None,
        },
        rule: RuleConfig::default(),
        eps: EPS_RUN_ALL,
        max_iter: 50,
        seed,
        output_path: String::new(),
    }
}

/// BB1 vs 1/k decay on a seeded least-squares instance, 50 iterations each.
fn fig1_centralized(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (variant, file) in [
        (RuleVariant::Bb1, "fig1_bb1.csv"),
        (RuleVariant::Decay, "fig1_decay.csv"),
    ] {
        let mut cfg = base_config(Mode::Centralized, seed);
        cfg.objective = ObjectiveConfig {
            kind: ObjectiveKind::LeastSquares,
            condition_cap: None,
            m: Some(10),
        };
        cfg.rule.variant = variant;
        cfg.output_path = file.into();
        paths.push(run_to_files(&cfg, out_dir)?);
    }
    Ok(paths)
}

/// 100 agents, dimension 10: constant baselines 1/L_i, 1/mu_i, 2/(mu_i+L_i)
/// against BB1 on a random quadratic network.
fn fig2_distributed(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (variant, file) in [
        (RuleVariant::ConstInvL, "fig2_inv_l.csv"),
        (RuleVariant::ConstInvMu, "fig2_inv_mu.csv"),
        (RuleVariant::ConstHarmonic, "fig2_harmonic.csv"),
        (RuleVariant::Bb1, "fig2_bb1.csv"),
    ] {
        let mut cfg = fig2_config(seed);
        cfg.rule.variant = variant;
        cfg.output_path = file.into();
        paths.push(run_to_files(&cfg, out_dir)?);
    }
    Ok(paths)
}

/// Shared network setup of the fig2 preset (also used by `verify` for the
/// consensus bound check). W is a positive symmetric random doubly stochastic
/// matrix, hence sinkhorn weights on the complete graph.
pub fn fig2_config(seed: u64) -> ExperimentConfig {
    let mut cfg = base_config(Mode::Distributed, seed);
    cfg.n = 100;
    cfg.topology = TopologyConfig {
        kind: TopologyKind::Complete,
        prob: None,
    };
    cfg.weights = WeightsKind::Sinkhorn;
    cfg.objective.condition_cap = Some(10.0);
    cfg
}

/// Identity-Hessian exact case, centralized and 10-agent distributed. The
/// centralized run must hit the optimum at round 2 (warm-up 0.5 then a BB
/// step of exactly 1), the distributed average within 5 rounds.
fn superlinear(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();

    let mut central = base_config(Mode::Centralized, seed);
    central.objective.condition_cap = Some(1.0);
    central.rule.alpha0 = Some(0.5);
    central.eps = 1e-8;
    central.output_path = "superlinear_centralized.csv".into();
    let path = run_to_files(&central, out_dir)?;
    assert_superlinear(&path, 2, 1e-12)?;
    paths.push(path);

    let mut dist = base_config(Mode::Distributed, seed);
    dist.n = 10;
    dist.objective.condition_cap = Some(1.0);
    dist.rule.alpha0 = Some(0.5);
    dist.eps = 1e-8;
    dist.output_path = "superlinear_distributed.csv".into();
    let path = run_to_files(&dist, out_dir)?;
    assert_superlinear(&path, 5, 1e-10)?;
    paths.push(path);

    Ok(paths)
}

fn assert_superlinear(csv: &Path, by_round: usize, tol: f64) -> Result<()> {
    let body = std::fs::read_to_string(csv)?;
    for line in body.lines().skip(1) {
        let mut cols = line.split(',');
        let round: usize = cols.next().unwrap_or_default().parse()?;
        let opt_err: f64 = cols.nth(1).unwrap_or_default().parse()?;
        if round <= by_round && opt_err < tol {
            return Ok(());
        }
    }
    bail!(
        "superlinear preset did not reach opt_err < {tol} by round {by_round} ({})",
        csv.display()
    )
}
