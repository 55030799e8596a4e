//! Barzilai-Borwein step sizes, baseline rules, and safeguarding.
//!
//! The two BB formulas come from the secant pair `s = x(k) - x(k-1)`,
//! `y = grad(k) - grad(k-1)`:
//!
//! ```text
//! alpha_1 = sᵀs / sᵀy        alpha_2 = sᵀy / yᵀy
//! ```
//!
//! Both assume `sᵀy > 0`; a breach falls back to `2/(mu + L)` so runs stay
//! alive on inputs that violate the curvature assumption, and the event is
//! counted so the caller can see how often that happened.

use crate::numerics::{dot, norm};

/// Relative threshold for declaring `sᵀy` non-positive.
pub const CURVATURE_BREACH_DELTA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepVariant {
    Bb1,
    Bb2,
    ConstInvL,
    ConstInvMu,
    ConstHarmonic,
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClampMode {
    /// Step used as computed (experiment fidelity).
    #[default]
    Raw,
    /// Clamp into `[1/L, 1/mu]`, the BB range.
    BbRange,
    /// Clamp into `[1/L, 2/(mu+L)]`, the hypothesis of the contraction lemmas.
    LemmaRange,
}

/// Step-size policy for a solver run.
#[derive(Debug, Clone, Copy)]
pub struct StepRule {
    pub variant: StepVariant,
    /// Warm-up step for BB variants at the first round; defaults to `1/L`.
    pub alpha0: Option<f64>,
    pub clamp: ClampMode,
    /// Alternate BB1/BB2 every this many BB rounds; `None` disables.
    pub alternate_period: Option<usize>,
}

impl StepRule {
    pub fn new(variant: StepVariant) -> Self {
        Self {
            variant,
            alpha0: None,
            clamp: ClampMode::Raw,
            alternate_period: None,
        }
    }

    pub fn with_alpha0(mut self, alpha0: f64) -> Self {
        self.alpha0 = Some(alpha0);
        self
    }

    pub fn with_clamp(mut self, clamp: ClampMode) -> Self {
        self.clamp = clamp;
        self
    }
}

/// Outcome of a raw BB formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BbOutcome {
    Step(f64),
    /// `sᵀy` not strictly positive: the caller should fall back.
    Breach,
    /// Zero displacement (or zero gradient difference): iterates converged.
    Converged,
}

/// First BB step, `sᵀs / sᵀy`.
pub fn bb1_step(s: &[f64], y: &[f64]) -> BbOutcome {
    let ns = norm(s);
    if ns == 0.0 {
        return BbOutcome::Converged;
    }
    let sy = dot(s, y);
    if sy <= CURVATURE_BREACH_DELTA * ns * norm(y) {
        return BbOutcome::Breach;
    }
    BbOutcome::Step(dot(s, s) / sy)
}

/// Second BB step, `sᵀy / yᵀy`. Never exceeds `bb1_step` (Cauchy-Schwarz).
pub fn bb2_step(s: &[f64], y: &[f64]) -> BbOutcome {
    let ny = norm(y);
    if norm(s) == 0.0 || ny == 0.0 {
        return BbOutcome::Converged;
    }
    let sy = dot(s, y);
    if sy <= CURVATURE_BREACH_DELTA * norm(s) * ny {
        return BbOutcome::Breach;
    }
    BbOutcome::Step(sy / dot(y, y))
}

/// Projects a step size into the interval selected by `mode`.
/// Returns the (possibly clamped) step and whether clamping occurred.
pub fn safeguard(alpha: f64, mu: f64, l: f64, mode: ClampMode) -> (f64, bool) {
    let (lo, hi) = match mode {
        ClampMode::Raw => return (alpha, false),
        ClampMode::BbRange => (1.0 / l, 1.0 / mu),
        ClampMode::LemmaRange => (1.0 / l, 2.0 / (mu + l)),
    };
    let clamped = alpha.clamp(lo, hi);
    (clamped, clamped != alpha)
}

/// Breach fallback step, `2/(mu + L)`.
pub fn fallback_step(mu: f64, l: f64) -> f64 {
    2.0 / (mu + l)
}

/// A resolved step for one round.
#[derive(Debug, Clone, Copy)]
pub struct StepChoice {
    pub alpha: f64,
    pub clamped: bool,
    pub breached: bool,
}

impl StepRule {
    /// Resolves the step size for round `k >= 1`. BB variants use the secant
    /// pair from the previous transition and the warm-up step at round 1.
    pub fn step_for_round(
        &self,
        k: usize,
        secant: Option<(&[f64], &[f64])>,
        mu: f64,
        l: f64,
    ) -> StepChoice {
        debug_assert!(k >= 1);
        let mut breached = false;
        let raw = match self.variant {
            StepVariant::ConstInvL => 1.0 / l,
            StepVariant::ConstInvMu => 1.0 / mu,
            StepVariant::ConstHarmonic => 2.0 / (mu + l),
            StepVariant::Decay => 1.0 / k as f64,
            StepVariant::Bb1 | StepVariant::Bb2 => match secant {
                None => self.alpha0.unwrap_or(1.0 / l),
                Some((s, y)) => {
                    let outcome = match self.effective_bb_variant(k) {
                        StepVariant::Bb2 => bb2_step(s, y),
                        _ => bb1_step(s, y),
                    };
                    match outcome {
                        BbOutcome::Step(a) => a,
                        BbOutcome::Breach => {
                            breached = true;
                            fallback_step(mu, l)
                        }
                        // Exactly stationary secant pair: the gradient guard
                        // will stop the run; keep a safe step meanwhile.
                        BbOutcome::Converged => fallback_step(mu, l),
                    }
                }
            },
        };
        let (alpha, clamped) = safeguard(raw, mu, l, self.clamp);
        StepChoice {
            alpha,
            clamped,
            breached,
        }
    }

    fn effective_bb_variant(&self, k: usize) -> StepVariant {
        let base = self.variant;
        match self.alternate_period {
            Some(t) if t > 0 && k >= 2 => {
                if ((k - 2) / t) % 2 == 0 {
                    base
                } else if base == StepVariant::Bb1 {
                    StepVariant::Bb2
                } else {
                    StepVariant::Bb1
                }
            }
            _ => base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bb1_identity_secant() {
        assert_eq!(bb1_step(&[1.0, 1.0], &[1.0, 1.0]), BbOutcome::Step(1.0));
    }

    #[test]
    fn bb1_scalar_curvature_two() {
        assert_eq!(bb1_step(&[1.0, 0.0], &[2.0, 0.0]), BbOutcome::Step(0.5));
    }

    #[test]
    fn bb1_hand_evaluation() {
        // (1+4)/(3+2) = 1
        assert_eq!(bb1_step(&[1.0, 2.0], &[3.0, 1.0]), BbOutcome::Step(1.0));
    }

    #[test]
    fn bb2_identity_secant() {
        assert_eq!(bb2_step(&[1.0, 1.0], &[1.0, 1.0]), BbOutcome::Step(1.0));
    }

    #[test]
    fn bb2_hand_evaluation() {
        // 5/10 = 0.5
        assert_eq!(bb2_step(&[1.0, 2.0], &[3.0, 1.0]), BbOutcome::Step(0.5));
    }

    #[test]
    fn bb2_scalar_curvature_half() {
        assert_eq!(bb2_step(&[2.0, 0.0], &[1.0, 0.0]), BbOutcome::Step(2.0));
    }

    #[test]
    fn zero_s_is_converged() {
        assert_eq!(bb1_step(&[0.0, 0.0], &[1.0, 1.0]), BbOutcome::Converged);
        assert_eq!(bb2_step(&[1.0, 0.0], &[0.0, 0.0]), BbOutcome::Converged);
    }

    #[test]
    fn negative_curvature_is_breach() {
        assert_eq!(bb1_step(&[1.0, 0.0], &[-1.0, 0.0]), BbOutcome::Breach);
        assert_eq!(bb2_step(&[1.0, 0.0], &[-1.0, 0.0]), BbOutcome::Breach);
    }

    #[test]
    fn safeguard_upper_clamp_bb_range() {
        let (a, clamped) = safeguard(0.9, 2.0, 10.0, ClampMode::BbRange);
        assert_eq!(a, 0.5);
        assert!(clamped);
    }

    #[test]
    fn safeguard_lower_clamp_lemma_range() {
        let (a, clamped) = safeguard(0.05, 2.0, 10.0, ClampMode::LemmaRange);
        assert_eq!(a, 0.1);
        assert!(clamped);
    }

    #[test]
    fn safeguard_inside_lemma_band() {
        // 1/L = 0.1 <= 0.15 <= 2/(mu+L) = 1/6
        let (a, clamped) = safeguard(0.15, 2.0, 10.0, ClampMode::LemmaRange);
        assert_eq!(a, 0.15);
        assert!(!clamped);
    }

    #[test]
    fn safeguard_raw_passthrough() {
        let (a, clamped) = safeguard(123.0, 2.0, 10.0, ClampMode::Raw);
        assert_eq!(a, 123.0);
        assert!(!clamped);
    }

    #[test]
    fn bb2_never_exceeds_bb1() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let s: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if let (BbOutcome::Step(a1), BbOutcome::Step(a2)) = (bb1_step(&s, &y), bb2_step(&s, &y))
            {
                assert!(a2 <= a1 + 1e-12);
            }
        }
    }

    #[test]
    fn decay_rule_is_inverse_round() {
        let rule = StepRule::new(StepVariant::Decay);
        for k in 1..10 {
            let c = rule.step_for_round(k, None, 1.0, 2.0);
            assert_eq!(c.alpha, 1.0 / k as f64);
        }
    }

    #[test]
    fn bb_warmup_uses_alpha0() {
        let rule = StepRule::new(StepVariant::Bb1).with_alpha0(0.25);
        let c = rule.step_for_round(1, None, 1.0, 4.0);
        assert_eq!(c.alpha, 0.25);
        let default_rule = StepRule::new(StepVariant::Bb1);
        assert_eq!(default_rule.step_for_round(1, None, 1.0, 4.0).alpha, 0.25);
    }

    #[test]
    fn alternation_switches_variant() {
        let mut rule = StepRule::new(StepVariant::Bb1);
        rule.alternate_period = Some(1);
        let s = [1.0, 2.0];
        let y = [3.0, 1.0];
        // k=2: bb1 -> 1.0, k=3: bb2 -> 0.5
        assert_eq!(rule.step_for_round(2, Some((&s, &y)), 0.1, 10.0).alpha, 1.0);
        assert_eq!(rule.step_for_round(3, Some((&s, &y)), 0.1, 10.0).alpha, 0.5);
    }
}
