//! TOML experiment configuration with default filling and validation.
//! Parse then normalize is idempotent: serializing a parsed config and
//! parsing it again yields the same normalized value.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    #[default]
    Complete,
    Ring,
    ErdosRenyi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default)]
    pub kind: TopologyKind,
    /// Edge probability; only meaningful for `erdos_renyi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightsKind {
    #[default]
    Metropolis,
    Sinkhorn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    QuadraticNetwork,
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub kind: ObjectiveKind,
    /// Upper end of the per-agent Hessian spectrum (lower end is 1).
    /// Quadratic networks only; defaults to 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_cap: Option<f64>,
    /// Row count of the least-squares system; defaults to `p` (square,
    /// spectrum-controlled). `m > p` draws a seeded Gaussian matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RuleVariant {
    #[default]
    Bb1,
    Bb2,
    ConstInvL,
    ConstInvMu,
    ConstHarmonic,
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClampKind {
    #[default]
    Raw,
    BbRange,
    LemmaRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default)]
    pub variant: RuleVariant,
    /// Warm-up step for BB variants; defaults to `1/L` at run time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub clamp: ClampKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub weights: WeightsKind,
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub rule: RuleConfig,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_path: String,
}

fn default_n() -> usize {
    1
}

fn default_p() -> usize {
    10
}

fn default_eps() -> f64 {
    1e-8
}

fn default_output() -> String {
    "out.csv".into()
}

impl ExperimentConfig {
    /// Fills derived defaults and enforces mode constraints in place.
    pub fn normalize(&mut self) {
        if self.mode == Mode::Centralized {
            self.n = 1;
        }
        match self.objective.kind {
            ObjectiveKind::QuadraticNetwork => {
                self.objective.condition_cap.get_or_insert(10.0);
            }
            ObjectiveKind::LeastSquares => {
                self.objective.m.get_or_insert(self.p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("n: agent count must be positive");
        }
        if self.p == 0 {
            bail!("p: dimension must be positive");
        }
        if self.max_iter == 0 {
            bail!("max_iter: iteration count must be positive");
        }
        if !(self.eps > 0.0) {
            bail!("eps: must be strictly positive, got {}", self.eps);
        }
        if let Some(a) = self.rule.alpha0 {
            if !(a > 0.0 && a.is_finite()) {
                bail!("rule.alpha0: must be positive and finite, got {a}");
            }
        }
        if let Some(t) = self.rule.alternate_period {
            if t == 0 {
                bail!("rule.alternate_period: must be positive when set");
            }
        }
        match self.topology.kind {
            TopologyKind::ErdosRenyi => {
                let prob = self
                    .topology
                    .prob
                    .context("topology.prob: required for erdos_renyi")?;
                if !(prob > 0.0 && prob <= 1.0) {
                    bail!("topology.prob: must be in (0, 1], got {prob}");
                }
            }
            _ => {
                if self.topology.prob.is_some() {
                    bail!("topology.prob: only valid for erdos_renyi");
                }
            }
        }
        match self.objective.kind {
            ObjectiveKind::QuadraticNetwork => {
                if let Some(cap) = self.objective.condition_cap {
                    if !(cap >= 1.0 && cap.is_finite()) {
                        bail!("objective.condition_cap: must be >= 1, got {cap}");
                    }
                }
                if self.objective.m.is_some() {
                    bail!("objective.m: only valid for least_squares");
                }
            }
            ObjectiveKind::LeastSquares => {
                if self.mode == Mode::Distributed {
                    bail!("objective.kind: least_squares runs centralized only");
                }
                if let Some(m) = self.objective.m {
                    if m < self.p {
                        bail!("objective.m: need m >= p for strong convexity, got m = {m}, p = {}", self.p);
                    }
                }
                if self.objective.condition_cap.is_some() {
                    bail!("objective.condition_cap: only valid for quadratic_network");
                }
            }
        }
        if self.mode == Mode::Centralized && self.n != 1 {
            bail!("n: centralized mode requires n = 1");
        }
        Ok(())
    }
}

/// Parses, validates, and normalizes a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text).context("config parse failed")?;
    cfg.normalize();
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical serialization of a normalized config.
pub fn serialize_config(cfg: &ExperimentConfig) -> Result<String> {
    Ok(toml::to_string_pretty(cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(
            "mode = \"centralized\"\nmax_iter = 50\n[objective]\nkind = \"least_squares\"\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.p, 10);
        assert_eq!(cfg.eps, 1e-8);
        assert_eq!(cfg.rule.variant, RuleVariant::Bb1);
        assert_eq!(cfg.rule.clamp, ClampKind::Raw);
        assert_eq!(cfg.rule.alpha0, None);
        assert_eq!(cfg.objective.m, Some(10));
        assert_eq!(cfg.weights, WeightsKind::Metropolis);
    }

    #[test]
    fn zero_n_names_the_key() {
        let err = parse_config(
            "mode = \"distributed\"\nn = 0\nmax_iter = 50\n[objective]\nkind = \"quadratic_network\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("n:"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config(
            "mode = \"centralized\"\nmax_iter = 50\nbogus = 1\n[objective]\nkind = \"least_squares\"\n",
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("bogus"), "{err:#}");
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = r#"
mode = "distributed"
n = 100
p = 10
max_iter = 50
seed = 7
output_path = "fig2.csv"
weights = "sinkhorn"

[topology]
kind = "erdos_renyi"
prob = 0.3

[objective]
kind = "quadratic_network"
condition_cap = 10.0

[rule]
variant = "bb1"
alpha0 = 0.5
"#;
        let cfg = parse_config(text).unwrap();
        let once = serialize_config(&cfg).unwrap();
        let cfg2 = parse_config(&once).unwrap();
        let twice = serialize_config(&cfg2).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(once, twice);
    }

    #[test]
    fn centralized_forces_single_agent() {
        // n stays user-visible but normalization pins it to 1
        let cfg = parse_config(
            "mode = \"centralized\"\nmax_iter = 10\n[objective]\nkind = \"quadratic_network\"\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 1);
    }

    #[test]
    fn distributed_least_squares_rejected() {
        let err = parse_config(
            "mode = \"distributed\"\nn = 4\nmax_iter = 10\n[objective]\nkind = \"least_squares\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("least_squares"), "{err}");
    }
}
