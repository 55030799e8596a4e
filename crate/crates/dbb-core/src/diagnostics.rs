//! Per-round metrics and numerical certification of the convergence bounds:
//! consensus deviation, contraction ratios, and empirical rate classification.

use crate::centralized::SolverTrace;
use crate::error::{Error, Result};
use crate::numerics::{norm, sub};

/// Threshold below which the optimality error counts as exact termination;
/// ratios against such an error are excluded to avoid 0/0.
pub const TERMINATION_ERR: f64 = 1e-14;

/// Metrics for one solver round.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub round: usize,
    /// `max_i ||x_i - x_bar||`; zero for centralized runs.
    pub consensus_err: f64,
    /// `||x_bar - x*||`.
    pub opt_err: f64,
    /// `opt_err(k) / opt_err(k-1)`; 0 when the previous error was below
    /// [`TERMINATION_ERR`].
    pub ratio: f64,
    /// Norm of the average gradient.
    pub grad_norm_avg: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub clamp_events: u64,
    pub breach_events: u64,
    /// Right side of the consensus deviation bound,
    /// `G sqrt(k) / mu_min * 1/sqrt(1 - lambda^2)`, with `G` the largest
    /// local gradient norm observed so far in the run.
    pub bound_consensus: f64,
    /// Theoretical contraction constant for the round.
    pub bound_ratio: f64,
}

/// `c1 = 2/(mu + L)`.
pub fn c1(mu: f64, l: f64) -> f64 {
    2.0 / (mu + l)
}

/// `c2 = 2 mu L / (mu + L)`.
pub fn c2(mu: f64, l: f64) -> f64 {
    2.0 * mu * l / (mu + l)
}

/// Centralized contraction constant `sqrt(1 - c2/L)`, evaluated in the
/// algebraically simplified form `sqrt((L - mu)/(L + mu))` so that `mu == L`
/// yields exactly zero.
pub fn contraction_bound(mu: f64, l: f64) -> f64 {
    ((l - mu) / (l + mu)).max(0.0).sqrt()
}

/// Distributed average contraction constant `sqrt(1 - c2/(nL))`, simplified
/// to `sqrt((n(mu + L) - 2 mu) / (n(mu + L)))`.
pub fn contraction_bound_distributed(mu: f64, l: f64, n: usize) -> f64 {
    let n = n as f64;
    let denom = n * (mu + l);
    (((denom - 2.0 * mu) / denom).max(0.0)).sqrt()
}

/// The `1/sqrt(1 - lambda^2)` factor of the consensus bound.
pub fn mixing_factor(lambda: f64) -> Result<f64> {
    if lambda >= 1.0 {
        return Err(Error::InvalidSpectrum { lambda });
    }
    Ok(1.0 / (1.0 - lambda * lambda).sqrt())
}

/// Consensus deviation bound at round `k`.
pub fn consensus_bound(k: usize, g: f64, mu_min: f64, lambda: f64) -> Result<f64> {
    Ok(g * (k as f64).sqrt() / mu_min * mixing_factor(lambda)?)
}

/// Flattens a centralized trace into per-round records. Consensus columns
/// are zero (a single solver has no deviation) and the ratio bound is the
/// centralized contraction constant.
pub fn centralized_records(
    trace: &SolverTrace,
    x_star: &[f64],
    mu: f64,
    l: f64,
) -> Vec<IterationRecord> {
    let bound = contraction_bound(mu, l);
    let mut out = Vec::with_capacity(trace.rounds());
    let mut prev_err = norm(&sub(&trace.iterates[0], x_star));
    for k in 1..=trace.rounds() {
        let err = norm(&sub(&trace.iterates[k], x_star));
        let step = trace.steps[k - 1];
        out.push(IterationRecord {
            round: k,
            consensus_err: 0.0,
            opt_err: err,
            ratio: if prev_err < TERMINATION_ERR {
                0.0
            } else {
                err / prev_err
            },
            grad_norm_avg: trace.grad_norms[k],
            alpha_min: step.alpha,
            alpha_max: step.alpha,
            clamp_events: step.clamped as u64,
            breach_events: step.breached as u64,
            bound_consensus: 0.0,
            bound_ratio: bound,
        });
        prev_err = err;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub pass: bool,
    /// Minimum of `bound + 1e-9 - consensus_err` across rounds.
    pub min_slack: f64,
}

/// Verifies `consensus_err(k) <= G sqrt(k)/mu_min * 1/sqrt(1-lambda^2) + 1e-9`
/// for every recorded round, with `G` the observed gradient bound.
pub fn check_consensus_bound(
    records: &[IterationRecord],
    g: f64,
    mu_min: f64,
    lambda: f64,
) -> Result<BoundCheck> {
    let factor = mixing_factor(lambda)?;
    let mut min_slack = f64::INFINITY;
    for r in records {
        if r.round == 0 {
            continue;
        }
        let rhs = g * (r.round as f64).sqrt() / mu_min * factor + 1e-9;
        min_slack = min_slack.min(rhs - r.consensus_err);
    }
    Ok(BoundCheck {
        pass: min_slack >= 0.0,
        min_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    QLinear,
    Superlinear,
    Sublinear,
    Diverged,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceVerdict {
    pub classification: Classification,
    /// Supremum of the ratios in the inspected tail window.
    pub worst_ratio: f64,
    /// First round with `opt_err < 1e-12`, if any.
    pub rounds_to_eps: Option<usize>,
}

/// Classifies the empirical convergence order from the tail of the error
/// ratio sequence. Ratios whose previous error was already below
/// [`TERMINATION_ERR`] are treated as terminated and excluded.
pub fn classify_convergence(records: &[IterationRecord], window: usize) -> Result<ConvergenceVerdict> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 records to classify, got {}",
            records.len()
        )));
    }
    let initial = records[0].opt_err;
    let final_err = records.last().unwrap().opt_err;
    let rounds_to_eps = records
        .iter()
        .find(|r| r.opt_err < 1e-12)
        .map(|r| r.round);

    if records.iter().any(|r| !r.opt_err.is_finite()) || final_err > initial * 10.0 {
        return Ok(ConvergenceVerdict {
            classification: Classification::Diverged,
            worst_ratio: f64::INFINITY,
            rounds_to_eps,
        });
    }

    // Valid ratios: skip round-0-style entries and terminated transitions.
    let mut ratios = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 && records[i - 1].opt_err < TERMINATION_ERR {
            continue;
        }
        ratios.push(r.ratio);
    }
    let tail: &[f64] = if ratios.len() > window {
        &ratios[ratios.len() - window..]
    } else {
        &ratios
    };
    let worst = tail.iter().copied().fold(0.0f64, f64::max);
    let monotone_down = tail.windows(2).all(|w| w[1] <= w[0]);
    let classification = if !tail.is_empty() && monotone_down && *tail.last().unwrap() < 1e-3 {
        Classification::Superlinear
    } else if worst < 1.0 - 1e-6 {
        Classification::QLinear
    } else {
        Classification::Sublinear
    };
    Ok(ConvergenceVerdict {
        classification,
        worst_ratio: worst,
        rounds_to_eps,
    })
}
