//! Centralized solver loop: `x(k+1) = x(k) - alpha(k) * grad f(x(k))` with a
//! configurable step rule and a gradient-norm stopping test.

use crate::error::{Error, Result};
use crate::numerics::{all_finite, norm, sub};
use crate::objectives::Objective;
use crate::step::StepRule;

/// Per-round step bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub alpha: f64,
    pub clamped: bool,
    pub breached: bool,
}

/// Full trajectory of a centralized run. `iterates[0]` is the initial point;
/// `steps[k-1]` produced `iterates[k]`. Gradient norms are recorded per
/// iterate and are not assumed monotone (BB is nonmonotone by nature).
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub iterates: Vec<Vec<f64>>,
    pub grad_norms: Vec<f64>,
    pub steps: Vec<StepInfo>,
}

impl SolverTrace {
    pub fn clamp_events(&self) -> u64 {
        self.steps.iter().filter(|s| s.clamped).count() as u64
    }

    pub fn curvature_breaches(&self) -> u64 {
        self.steps.iter().filter(|s| s.breached).count() as u64
    }

    pub fn rounds(&self) -> usize {
        self.steps.len()
    }
}

/// Runs the centralized iteration until `||grad f|| < eps` or `max_iter`
/// rounds. The first BB round uses the warm-up step (no secant pair exists
/// yet); curvature breaches fall back to `2/(mu + L)`.
pub fn solve_centralized<O: Objective>(
    obj: &O,
    x0: &[f64],
    rule: StepRule,
    eps: f64,
    max_iter: usize,
) -> Result<SolverTrace> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    if max_iter < 1 {
        return Err(Error::Invalid("max_iter must be >= 1".into()));
    }
    if !all_finite(x0) {
        return Err(Error::NonFinite { context: "x0" });
    }
    let (mu, l) = obj.curvature();
    let mut x = x0.to_vec();
    let mut grad = obj.gradient(&x)?;
    let mut trace = SolverTrace {
        iterates: vec![x.clone()],
        grad_norms: vec![norm(&grad)],
        steps: Vec::new(),
    };
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (x(k-1), grad(k-1))

    for k in 1..=max_iter {
        if *trace.grad_norms.last().unwrap() < eps {
            break;
        }
        let secant = prev
            .as_ref()
            .map(|(xp, gp)| (sub(&x, xp), sub(&grad, gp)));
        let choice = rule.step_for_round(
            k,
            secant.as_ref().map(|(s, y)| (s.as_slice(), y.as_slice())),
            mu,
            l,
        );
        // Converged secant pair with a still-large gradient cannot happen for
        // BB variants here: s == 0 implies grad(k-1) == grad(k), and the guard
        // would have stopped on eps first in practice; the rule already maps
        // that case to the fallback step.
        let x_new: Vec<f64> = x
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - choice.alpha * gi)
            .collect();
        if !all_finite(&x_new) {
            return Err(Error::Divergence {
                round: k,
                agent: None,
            });
        }
        let grad_new = obj.gradient(&x_new)?;
        prev = Some((std::mem::replace(&mut x, x_new), std::mem::replace(&mut grad, grad_new)));
        trace.iterates.push(x.clone());
        trace.grad_norms.push(norm(&grad));
        trace.steps.push(StepInfo {
            alpha: choice.alpha,
            clamped: choice.clamped,
            breached: choice.breached,
        });
    }
    Ok(trace)
}
