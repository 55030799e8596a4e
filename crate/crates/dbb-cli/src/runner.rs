//! Executes a validated config: derives all randomness from the single seed,
//! builds the topology and objective, runs the solver, and writes the CSV
//! plus a TOML metadata sidecar.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use dbb_core::diagnostics::centralized_records;
use dbb_core::numerics::norm;
use dbb_core::objectives::{
    random_network_objective, random_spd_with_spectrum, LeastSquaresObjective, NetworkObjective,
    Objective,
};
use dbb_core::step::{ClampMode, StepRule, StepVariant};
use dbb_core::topology::{make_graph, metropolis_weights, sinkhorn_random_weights, GraphKind, MixingMatrix};
use dbb_core::{run_distributed, solve_centralized, DistributedTrace, IterationRecord};

use crate::config::{
    ClampKind, ExperimentConfig, Mode, ObjectiveKind, RuleVariant, TopologyKind, WeightsKind,
};
use crate::csv::emit_csv;

const X0_NORM: f64 = 10.0;

// Stream tags for deriving independent sub-seeds from the single config seed.
const STREAM_GRAPH: u64 = 1;
const STREAM_WEIGHTS: u64 = 2;
const STREAM_OBJECTIVE: u64 = 3;
const STREAM_X0: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Sub-seed for one randomness stream; distinct streams never share draws.
pub fn derived_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ stream.wrapping_mul(0xA0761D6478BD642F))
}

/// Standard-normal vector rescaled to norm 10.
fn sample_x0(p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-8 {
            return v.iter().map(|x| x * X0_NORM / n).collect();
        }
    }
}

pub fn step_rule(cfg: &ExperimentConfig) -> StepRule {
    let variant = match cfg.rule.variant {
        RuleVariant::Bb1 => StepVariant::Bb1,
        RuleVariant::Bb2 => StepVariant::Bb2,
        RuleVariant::ConstInvL => StepVariant::ConstInvL,
        RuleVariant::ConstInvMu => StepVariant::ConstInvMu,
        RuleVariant::ConstHarmonic => StepVariant::ConstHarmonic,
        RuleVariant::Decay => StepVariant::Decay,
    };
    let clamp = match cfg.rule.clamp {
        ClampKind::Raw => ClampMode::Raw,
        ClampKind::BbRange => ClampMode::BbRange,
        ClampKind::LemmaRange => ClampMode::LemmaRange,
    };
    let mut rule = StepRule::new(variant).with_clamp(clamp);
    rule.alpha0 = cfg.rule.alpha0;
    rule.alternate_period = cfg.rule.alternate_period;
    rule
}

/// Mixing matrix for a distributed run; a single agent needs no graph.
pub fn build_mixing(cfg: &ExperimentConfig) -> Result<MixingMatrix> {
    if cfg.n == 1 {
        return Ok(MixingMatrix::single());
    }
    let kind = match cfg.topology.kind {
        TopologyKind::Complete => GraphKind::Complete,
        TopologyKind::Ring => GraphKind::Ring,
        TopologyKind::ErdosRenyi => GraphKind::ErdosRenyi(
            cfg.topology.prob.expect("validated erdos_renyi prob"),
        ),
    };
    let graph = make_graph(kind, cfg.n, derived_seed(cfg.seed, STREAM_GRAPH))?;
    let w = match cfg.weights {
        WeightsKind::Metropolis => metropolis_weights(&graph)?,
        WeightsKind::Sinkhorn => {
            sinkhorn_random_weights(&graph, derived_seed(cfg.seed, STREAM_WEIGHTS))?
        }
    };
    Ok(w)
}

pub fn build_network_objective(cfg: &ExperimentConfig) -> Result<NetworkObjective> {
    let cap = cfg.objective.condition_cap.unwrap_or(10.0);
    Ok(random_network_objective(
        cfg.n,
        cfg.p,
        cap,
        derived_seed(cfg.seed, STREAM_OBJECTIVE),
    )?)
}

fn build_least_squares(cfg: &ExperimentConfig) -> Result<LeastSquaresObjective> {
    let p = cfg.p;
    let m = cfg.objective.m.unwrap_or(p);
    let seed = derived_seed(cfg.seed, STREAM_OBJECTIVE);
    if m == p {
        // square spectrum-controlled system: singular values of A uniform in
        // [0.1, 1], so cond(2AᵀA) <= 100
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eigs: Vec<f64> = (0..p).map(|_| rng.gen_range(0.1..=1.0)).collect();
        let a = random_spd_with_spectrum(p, &eigs, &mut rng)?;
        let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(LeastSquaresObjective::new(p, p, a.rows().to_vec(), b)?)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..m * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(LeastSquaresObjective::new(m, p, a, b)?)
    }
}

/// Runs the configured experiment and returns the per-round records.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<IterationRecord>> {
    let rule = step_rule(cfg);
    let mut x0_rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, STREAM_X0));
    match cfg.mode {
        Mode::Centralized => {
            let x0 = sample_x0(cfg.p, &mut x0_rng);
            let (records, _) = match cfg.objective.kind {
                ObjectiveKind::LeastSquares => {
                    let obj = build_least_squares(cfg)?;
                    run_centralized_on(&obj, &x0, rule, cfg)?
                }
                ObjectiveKind::QuadraticNetwork => {
                    let net = build_network_objective(cfg)?;
                    run_centralized_on(&net, &x0, rule, cfg)?
                }
            };
            Ok(records)
        }
        Mode::Distributed => Ok(run_distributed_config(cfg)?.records),
    }
}

/// Full distributed trace for a config (used by `verify` for bound checks).
pub fn run_distributed_config(cfg: &ExperimentConfig) -> Result<DistributedTrace> {
    let rule = step_rule(cfg);
    let net = build_network_objective(cfg)?;
    let w = build_mixing(cfg)?;
    let mut x0_rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, STREAM_X0));
    let x0: Vec<Vec<f64>> = (0..cfg.n).map(|_| sample_x0(cfg.p, &mut x0_rng)).collect();
    Ok(run_distributed(&net, &w, rule, &x0, cfg.eps, cfg.max_iter)?)
}

fn run_centralized_on<O: Objective>(
    obj: &O,
    x0: &[f64],
    rule: StepRule,
    cfg: &ExperimentConfig,
) -> Result<(Vec<IterationRecord>, Vec<f64>)> {
    let trace = solve_centralized(obj, x0, rule, cfg.eps, cfg.max_iter)?;
    let x_star = obj.minimizer()?;
    let (mu, l) = obj.curvature();
    Ok((centralized_records(&trace, &x_star, mu, l), x_star))
}

/// Sidecar path: same basename as the CSV, `.toml` extension.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("toml")
}

/// Runs the experiment, writes the CSV to `cfg.output_path` (resolved against
/// `base_dir` when relative) and the normalized config sidecar next to it.
pub fn run_to_files(cfg: &ExperimentConfig, base_dir: &Path) -> Result<PathBuf> {
    let records = execute(cfg)?;
    if records.is_empty() {
        return Err(anyhow!(
            "run terminated at round 0 (initial gradient below eps); nothing to emit"
        ));
    }
    let out = if Path::new(&cfg.output_path).is_absolute() {
        PathBuf::from(&cfg.output_path)
    } else {
        base_dir.join(&cfg.output_path)
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    emit_csv(&records, &out)?;
    let sidecar = sidecar_path(&out);
    std::fs::write(&sidecar, crate::config::serialize_config(cfg)?)
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(out)
}
