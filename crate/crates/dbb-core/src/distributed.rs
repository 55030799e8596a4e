//! Synchronous-round simulator of the distributed BB algorithm: per-agent
//! step sizes, local gradient steps, and consensus mixing over the weight
//! matrix:
//!
//! ```text
//! x_i(k+1) = sum_j w_ij x_j(k) - alpha_i(k) * grad f_i(x_i(k))
//! ```
//!
//! All updates within a round read round-k state only; the round boundary is
//! a full barrier, so traces are independent of agent evaluation order.

use crate::diagnostics::{
    contraction_bound_distributed, IterationRecord, TERMINATION_ERR,
};
use crate::error::{Error, Result};
use crate::numerics::{all_finite, norm, sub};
use crate::objectives::{NetworkObjective, Objective};
use crate::step::{bb1_step, bb2_step, fallback_step, safeguard, BbOutcome, ClampMode, StepChoice, StepRule, StepVariant};
use crate::topology::MixingMatrix;

/// Local solver state of one agent.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub grad: Vec<f64>,
    pub grad_prev: Vec<f64>,
    /// Displacement `x - x_prev`; zero until the first round completes.
    pub s: Vec<f64>,
    /// Gradient difference `grad - grad_prev`.
    pub y: Vec<f64>,
    pub alpha: f64,
}

/// Network snapshot at a round boundary.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub agents: Vec<AgentState>,
    pub round: usize,
    pub x_bar: Vec<f64>,
    pub g_bar: Vec<f64>,
}

impl NetworkState {
    pub fn new(objective: &NetworkObjective, x0: &[Vec<f64>]) -> Result<Self> {
        let n = objective.n_agents();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len(),
            });
        }
        let p = objective.dim();
        let mut agents = Vec::with_capacity(n);
        for (i, x) in x0.iter().enumerate() {
            if x.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: x.len(),
                });
            }
            if !all_finite(x) {
                return Err(Error::NonFinite { context: "x0" });
            }
            let grad = objective.agent(i).gradient(x)?;
            agents.push(AgentState {
                id: i,
                x: x.clone(),
                x_prev: x.clone(),
                grad_prev: grad.clone(),
                grad,
                s: vec![0.0; p],
                y: vec![0.0; p],
                alpha: 0.0,
            });
        }
        let mut state = Self {
            agents,
            round: 0,
            x_bar: vec![0.0; p],
            g_bar: vec![0.0; p],
        };
        state.refresh_averages();
        Ok(state)
    }

    /// Recomputes `x_bar` and `g_bar` as exact arithmetic means.
    pub fn refresh_averages(&mut self) {
        let n = self.agents.len() as f64;
        let p = self.agents[0].x.len();
        let mut x_bar = vec![0.0; p];
        let mut g_bar = vec![0.0; p];
        for a in &self.agents {
            for j in 0..p {
                x_bar[j] += a.x[j];
                g_bar[j] += a.grad[j];
            }
        }
        for j in 0..p {
            x_bar[j] /= n;
            g_bar[j] /= n;
        }
        self.x_bar = x_bar;
        self.g_bar = g_bar;
    }
}

/// Per-agent BB step with safeguarding against the agent's own curvature
/// constants; breaches fall back to `2/(mu_i + L_i)`.
pub fn local_bb_step(
    agent: &AgentState,
    variant: StepVariant,
    mu_i: f64,
    l_i: f64,
    clamp: ClampMode,
) -> StepChoice {
    let outcome = match variant {
        StepVariant::Bb2 => bb2_step(&agent.s, &agent.y),
        _ => bb1_step(&agent.s, &agent.y),
    };
    let (raw, breached) = match outcome {
        BbOutcome::Step(a) => (a, false),
        BbOutcome::Breach => (fallback_step(mu_i, l_i), true),
        BbOutcome::Converged => (fallback_step(mu_i, l_i), false),
    };
    let (alpha, clamped) = safeguard(raw, mu_i, l_i, clamp);
    StepChoice {
        alpha,
        clamped,
        breached,
    }
}

/// Advances the network one synchronous round using the step sizes already
/// stored in each agent's `alpha`. Every agent mixes the round-k iterates of
/// its neighbors and subtracts its own scaled local gradient, then the secant
/// pairs are refreshed.
pub fn consensus_round(
    state: &mut NetworkState,
    w: &MixingMatrix,
    objective: &NetworkObjective,
) -> Result<()> {
    let n = state.agents.len();
    if w.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.n(),
        });
    }
    let p = state.agents[0].x.len();
    let round = state.round + 1;
    let mut new_xs = Vec::with_capacity(n);
    for i in 0..n {
        let mut xi = vec![0.0; p];
        for j in 0..n {
            let wij = w.matrix().get(i, j);
            if wij != 0.0 {
                for d in 0..p {
                    xi[d] += wij * state.agents[j].x[d];
                }
            }
        }
        let a = &state.agents[i];
        for d in 0..p {
            xi[d] -= a.alpha * a.grad[d];
        }
        if !all_finite(&xi) {
            return Err(Error::Divergence {
                round,
                agent: Some(i),
            });
        }
        new_xs.push(xi);
    }
    for (i, xi) in new_xs.into_iter().enumerate() {
        let a = &mut state.agents[i];
        a.x_prev = std::mem::replace(&mut a.x, xi);
        a.grad_prev = std::mem::replace(&mut a.grad, objective.agent(i).gradient(&a.x)?);
        a.s = sub(&a.x, &a.x_prev);
        a.y = sub(&a.grad, &a.grad_prev);
    }
    state.round = round;
    state.refresh_averages();
    Ok(())
}

/// Full output of a distributed run.
#[derive(Debug, Clone)]
pub struct DistributedTrace {
    pub records: Vec<IterationRecord>,
    /// `x_bar` after each recorded round.
    pub averages: Vec<Vec<f64>>,
    /// `x_bar` at round 0.
    pub initial_average: Vec<f64>,
    pub state: NetworkState,
    pub x_star: Vec<f64>,
    /// Largest local gradient norm observed over the whole run.
    pub grad_bound: f64,
    pub mu_min: f64,
    pub lambda: f64,
}

/// Runs the distributed algorithm until `||g_bar|| < eps` or `max_iter`
/// rounds, recording per-round metrics against the network optimum.
pub fn run_distributed(
    objective: &NetworkObjective,
    w: &MixingMatrix,
    rule: StepRule,
    x0: &[Vec<f64>],
    eps: f64,
    max_iter: usize,
) -> Result<DistributedTrace> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    if max_iter < 1 {
        return Err(Error::Invalid("max_iter must be >= 1".into()));
    }
    let mut state = NetworkState::new(objective, x0)?;
    if w.n() != state.agents.len() {
        return Err(Error::DimensionMismatch {
            expected: state.agents.len(),
            got: w.n(),
        });
    }
    let n = state.agents.len();
    let curvatures: Vec<(f64, f64)> = (0..n).map(|i| objective.agent(i).curvature()).collect();
    let x_star = objective.optimal_point()?;
    let (mu_bar, l_bar) = objective.curvature_averages();
    let mu_min = objective.mu_min();
    let lambda = w.lambda();
    let mixing_factor = if lambda < 1.0 {
        1.0 / (1.0 - lambda * lambda).sqrt()
    } else {
        f64::INFINITY
    };
    let bound_ratio = contraction_bound_distributed(mu_bar, l_bar, n);

    let mut grad_bound = state
        .agents
        .iter()
        .map(|a| norm(&a.grad))
        .fold(0.0f64, f64::max);
    let initial_average = state.x_bar.clone();
    let mut prev_opt_err = norm(&sub(&state.x_bar, &x_star));
    let mut records = Vec::new();
    let mut averages = Vec::new();

    for k in 1..=max_iter {
        if norm(&state.g_bar) < eps {
            break;
        }
        let mut clamp_events = 0u64;
        let mut breach_events = 0u64;
        for i in 0..n {
            let (mu_i, l_i) = curvatures[i];
            let a = &state.agents[i];
            let secant = if k >= 2 {
                Some((a.s.as_slice(), a.y.as_slice()))
            } else {
                None
            };
            let choice = rule.step_for_round(k, secant, mu_i, l_i);
            if choice.clamped {
                clamp_events += 1;
            }
            if choice.breached {
                breach_events += 1;
            }
            state.agents[i].alpha = choice.alpha;
        }
        consensus_round(&mut state, w, objective)?;
        for a in &state.agents {
            grad_bound = grad_bound.max(norm(&a.grad));
        }
        let record = record_round(
            &state,
            &x_star,
            prev_opt_err,
            clamp_events,
            breach_events,
            grad_bound * (k as f64).sqrt() / mu_min * mixing_factor,
            bound_ratio,
        );
        prev_opt_err = record.opt_err;
        averages.push(state.x_bar.clone());
        records.push(record);
    }

    Ok(DistributedTrace {
        records,
        averages,
        initial_average,
        state,
        x_star,
        grad_bound,
        mu_min,
        lambda,
    })
}

/// Builds the metric record for the current round. The triangle identity
/// `||x_i - x*|| <= ||x_i - x_bar|| + ||x_bar - x*||` is checked per agent
/// as a sanity invariant.
pub fn record_round(
    state: &NetworkState,
    x_star: &[f64],
    prev_opt_err: f64,
    clamp_events: u64,
    breach_events: u64,
    bound_consensus: f64,
    bound_ratio: f64,
) -> IterationRecord {
    let opt_err = norm(&sub(&state.x_bar, x_star));
    let mut consensus_err = 0.0f64;
    for a in &state.agents {
        let dev = norm(&sub(&a.x, &state.x_bar));
        consensus_err = consensus_err.max(dev);
        debug_assert!(
            norm(&sub(&a.x, x_star)) <= dev + opt_err + 1e-12,
            "triangle identity violated for agent {}",
            a.id
        );
    }
    let (alpha_min, alpha_max) = state.agents.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), a| (lo.min(a.alpha), hi.max(a.alpha)),
    );
    IterationRecord {
        round: state.round,
        consensus_err,
        opt_err,
        ratio: if prev_opt_err < TERMINATION_ERR {
            0.0
        } else {
            opt_err / prev_opt_err
        },
        grad_norm_avg: norm(&state.g_bar),
        alpha_min,
        alpha_max,
        clamp_events,
        breach_events,
        bound_consensus,
        bound_ratio,
    }
}
