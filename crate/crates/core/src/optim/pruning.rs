use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruningMode {
    /// Subset drawn without replacement with probability proportional to
    /// accumulated gradient magnitude.
    Probabilistic,
    /// The largest accumulated magnitudes, ties to the lowest index.
    Deterministic,
    Off,
}

impl std::fmt::Display for PruningMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PruningMode::Probabilistic => "probabilistic",
            PruningMode::Deterministic => "deterministic",
            PruningMode::Off => "off",
        })
    }
}

impl std::str::FromStr for PruningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probabilistic" => Ok(PruningMode::Probabilistic),
            "deterministic" => Ok(PruningMode::Deterministic),
            "off" => Ok(PruningMode::Off),
            other => Err(Error::Config(format!("unknown pruning mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruningConfig {
    pub mode: PruningMode,
    /// Fraction r of parameters left out in each pruning step.
    pub ratio: f64,
    /// w_a, steps of magnitude accumulation per stage.
    pub accumulation_window: u32,
    /// w_p, pruned steps per stage.
    pub pruning_window: u32,
}

impl Default for PruningConfig {
    fn default() -> Self {
        PruningConfig {
            mode: PruningMode::Probabilistic,
            ratio: 0.5,
            accumulation_window: 1,
            pruning_window: 2,
        }
    }
}

impl PruningConfig {
    pub fn off() -> Self {
        PruningConfig {
            mode: PruningMode::Off,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.accumulation_window < 1 {
            return Err(Error::Config("accumulation_window must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(Error::Config(format!(
                "pruning ratio {} outside [0, 1)",
                self.ratio
            )));
        }
        Ok(())
    }

    /// Whether any step will evaluate a strict subset of gradients.
    pub fn is_active(&self) -> bool {
        self.mode != PruningMode::Off && self.ratio > 0.0 && self.pruning_window > 0
    }

    pub fn stage_len(&self) -> u64 {
        (self.accumulation_window + self.pruning_window) as u64
    }

    /// Parameters kept per pruning step: max(1, round((1 − r)·n)).
    pub fn keep_count(&self, num_params: usize) -> usize {
        if !self.is_active() {
            return num_params;
        }
        let k = ((1.0 - self.ratio) * num_params as f64).round() as usize;
        k.clamp(1, num_params.max(1))
    }

    /// Nominal steady-state share of skipped gradient evaluations,
    /// r·w_p/(w_a + w_p).
    pub fn nominal_savings(&self) -> f64 {
        if !self.is_active() {
            return 0.0;
        }
        self.ratio * self.pruning_window as f64 / self.stage_len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Accumulating,
    Pruning,
    /// Pruning disabled; every step evaluates every gradient.
    Full,
}

/// Stage/phase bookkeeping and the magnitude accumulator M.
#[derive(Clone, Debug, PartialEq)]
pub struct PruningState {
    config: PruningConfig,
    accumulator: Vec<f64>,
    stage: u64,
    phase: Phase,
    step_in_phase: u32,
}

impl PruningState {
    pub fn new(num_params: usize, config: PruningConfig) -> Result<Self> {
        config.validate()?;
        let phase = if config.is_active() {
            Phase::Accumulating
        } else {
            Phase::Full
        };
        Ok(PruningState {
            config,
            accumulator: vec![0.0; num_params],
            stage: 0,
            phase,
            step_in_phase: 0,
        })
    }

    pub fn config(&self) -> &PruningConfig {
        &self.config
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.accumulator
    }

    /// Zero-based stage index.
    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn step_in_phase(&self) -> u32 {
        self.step_in_phase
    }

    /// M ← M + |grad|.
    pub fn accumulate(&mut self, grad: &[f64]) -> Result<()> {
        if self.phase != Phase::Accumulating {
            return Err(Error::WrongPhase);
        }
        if grad.len() != self.accumulator.len() {
            return Err(Error::LengthMismatch {
                what: "gradient",
                expected: self.accumulator.len(),
                got: grad.len(),
            });
        }
        for (m, g) in self.accumulator.iter_mut().zip(grad) {
            *m += g.abs();
        }
        Ok(())
    }

    /// Moves to the next training step.
    pub fn advance(&mut self) {
        self.step_in_phase += 1;
        let w_a = self.config.accumulation_window;
        let w_p = self.config.pruning_window;
        match self.phase {
            Phase::Full => {
                if self.step_in_phase as u64 == self.config.stage_len() {
                    self.stage += 1;
                    self.step_in_phase = 0;
                }
            }
            Phase::Accumulating if self.step_in_phase == w_a => {
                self.phase = Phase::Pruning;
                self.step_in_phase = 0;
            }
            Phase::Pruning if self.step_in_phase == w_p => self.start_stage(),
            _ => {}
        }
    }

    fn start_stage(&mut self) {
        self.stage += 1;
        self.phase = Phase::Accumulating;
        self.step_in_phase = 0;
        self.accumulator.fill(0.0);
    }

    /// Draws the subset of parameters to train in the current pruning step.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        sample_subset(
            &self.accumulator,
            self.config.ratio,
            self.config.mode,
            rng,
        )
    }
}

/// Picks k = max(1, round((1 − r)·n)) parameter indices (returned sorted).
///
/// Probabilistic mode draws sequentially without replacement with weights
/// M_i + ε, ε = 1e-12 + 1e-6·mean(M). Deterministic mode takes the k largest
/// M_i and consumes no randomness.
pub fn sample_subset<R: Rng + ?Sized>(
    accumulator: &[f64],
    ratio: f64,
    mode: PruningMode,
    rng: &mut R,
) -> Vec<usize> {
    let n = accumulator.len();
    if n == 0 {
        return Vec::new();
    }
    let k = if mode == PruningMode::Off {
        n
    } else {
        (((1.0 - ratio) * n as f64).round() as usize).clamp(1, n)
    };
    if k == n {
        return (0..n).collect();
    }
    let mut chosen = match mode {
        PruningMode::Off => unreachable!(),
        PruningMode::Deterministic => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                accumulator[b]
                    .total_cmp(&accumulator[a])
                    .then(a.cmp(&b))
            });
            order.truncate(k);
            order
        }
        PruningMode::Probabilistic => {
            let mean = accumulator.iter().sum::<f64>() / n as f64;
            let eps = 1e-12 + 1e-6 * mean;
            let mut weights: Vec<f64> = accumulator.iter().map(|m| m + eps).collect();
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = None;
                for (i, w) in weights.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    pick = Some(i);
                    if u < *w {
                        break;
                    }
                    u -= w;
                }
                let i = pick.expect("remaining weight is positive");
                out.push(i);
                weights[i] = 0.0;
            }
            out
        }
    };
    chosen.sort_unstable();
    chosen
}
