use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    Adam,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "momentum" => Ok(OptimizerKind::Momentum),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            lr_start: 0.3,
            lr_end: 0.03,
            momentum: 0.8,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn with_kind(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr_start > 0.0 && self.lr_end > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// Cosine decay from `start` at t = 0 to `end` at t = total.
pub fn cosine_lr(t: u64, total: u64, start: f64, end: f64) -> f64 {
    if total == 0 {
        return start;
    }
    let frac = t.min(total) as f64 / total as f64;
    end + 0.5 * (start - end) * (1.0 + (PI * frac).cos())
}

/// Per-parameter optimizer buffers. Frozen parameters keep their buffers and
/// their Adam step counts untouched.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    config: OptimizerConfig,
    velocity: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: Vec<u64>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, num_params: usize) -> Result<Self> {
        config.validate()?;
        Ok(OptimizerState {
            config,
            velocity: vec![0.0; num_params],
            first: vec![0.0; num_params],
            second: vec![0.0; num_params],
            steps: vec![0; num_params],
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.first, &self.second)
    }

    /// Applies one update with step size `lr` to the indices where `active`
    /// is set.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], active: &[bool], lr: f64) -> Result<()> {
        let n = self.velocity.len();
        for (what, len) in [("parameters", params.len()), ("gradient", grad.len()), ("active mask", active.len())] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let c = &self.config;
        for i in (0..n).filter(|&i| active[i]) {
            let g = grad[i];
            match c.kind {
                OptimizerKind::Sgd => params[i] -= lr * g,
                OptimizerKind::Momentum => {
                    self.velocity[i] = c.momentum * self.velocity[i] + g;
                    params[i] -= lr * self.velocity[i];
                }
                OptimizerKind::Adam => {
                    self.steps[i] += 1;
                    let t = self.steps[i] as i32;
                    self.first[i] = c.beta1 * self.first[i] + (1.0 - c.beta1) * g;
                    self.second[i] = c.beta2 * self.second[i] + (1.0 - c.beta2) * g * g;
                    let m_hat = self.first[i] / (1.0 - c.beta1.powi(t));
                    let v_hat = self.second[i] / (1.0 - c.beta2.powi(t));
                    params[i] -= lr * m_hat / (v_hat.sqrt() + c.eps);
                }
            }
        }
        Ok(())
    }
}
