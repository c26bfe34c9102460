//! The stage-based training loop.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::optimizer::{cosine_lr, OptimizerConfig, OptimizerState};
use super::pruning::{Phase, PruningConfig, PruningState};
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::grad::{argmax, batch_gradient, CircuitOracle, Example, LinearMap, SimOracle};
use crate::noise::NoiseModel;
use crate::par;
use crate::rng::{stream_rng, Stream};
use crate::sim::Circuit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: u64,
    pub batch_size: usize,
    /// Validation runs every `eval_every` steps and after the final step.
    /// Zero means only after the final step.
    pub eval_every: u64,
    pub seed: u64,
    pub pruning: PruningConfig,
    pub optimizer: OptimizerConfig,
    pub noise: NoiseModel,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        self.pruning.validate()?;
        self.optimizer.validate()?;
        self.noise.validate()
    }
}

/// One line of the metrics trace. Contains no wall-clock data so that equal
/// configurations produce byte-identical traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// One-based.
    pub step: u64,
    /// One-based.
    pub stage: u64,
    pub phase: Phase,
    pub loss: f64,
    pub batch_accuracy: f64,
    /// Under the training noise model.
    pub val_accuracy: Option<f64>,
    pub val_accuracy_noise_free: Option<f64>,
    /// Cumulative training circuit executions.
    pub circuit_runs: u64,
    pub active_params: usize,
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub params: Vec<f64>,
    pub trace: Vec<MetricsRow>,
    pub circuit_runs: u64,
    /// Σ over steps of the number of parameters whose gradient was evaluated.
    pub gradient_evaluations: u64,
    pub final_val_accuracy: f64,
    pub final_val_accuracy_noise_free: f64,
}

impl TrainOutcome {
    /// Fraction of per-parameter gradient evaluations skipped relative to
    /// computing every gradient on every step.
    pub fn measured_savings(&self, num_params: usize) -> f64 {
        let full = self.trace.len() as u64 * num_params as u64;
        if full == 0 {
            return 0.0;
        }
        1.0 - self.gradient_evaluations as f64 / full as f64
    }

    pub fn trace_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for row in &self.trace {
            out.push_str(&serde_json::to_string(row)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Expected circuit executions for one training step: B·(1 + 2·Σ_{i∈S} m_i)
/// where m_i counts gate occurrences of parameter i.
pub fn step_cost(circuit: &Circuit, batch_size: usize, subset: Option<&[usize]>) -> u64 {
    let counts = circuit.occurrence_counts();
    let shifted: usize = match subset {
        Some(s) => s.iter().map(|&i| counts[i]).sum(),
        None => counts.iter().sum(),
    };
    batch_size as u64 * (1 + 2 * shifted as u64)
}

/// Classification accuracy of `params` on `samples`.
pub fn evaluate<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    readout: &LinearMap,
    params: &[f64],
    samples: &[Sample],
    step: u64,
    split: u8,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Config("empty evaluation set".into()));
    }
    let indexed: Vec<(u64, &Sample)> = samples.iter().enumerate().map(|(i, s)| (i as u64, s)).collect();
    let hits = par::try_map(&indexed, |(i, s)| {
        let stream = Stream::Eval {
            step,
            split,
            sample: *i,
        };
        let out = oracle.evaluate(circuit, params, &s.features, None, stream)?;
        let logits = readout.apply(&out)?;
        Ok(argmax(&logits) == s.label)
    })?;
    Ok(hits.iter().filter(|h| **h).count() as f64 / samples.len() as f64)
}

/// What a per-step observer sees after the update.
#[derive(Debug)]
pub struct StepView<'a> {
    pub step: u64,
    pub phase: Phase,
    pub before: &'a [f64],
    pub after: &'a [f64],
    pub active: &'a [bool],
    pub grad: &'a [f64],
}

/// Trains from `init` and returns the final parameters and the trace.
///
/// Every step draws a mini-batch without replacement from the `Batch` stream.
/// Accumulation steps (and all steps when pruning is inactive) evaluate the
/// full gradient; pruning steps draw a fresh subset from the `Subset` stream
/// and leave the other parameters and their optimizer buffers untouched.
pub fn train(
    circuit: &Circuit,
    readout: &LinearMap,
    init: &[f64],
    train_set: &[Sample],
    val_set: &[Sample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_observed(circuit, readout, init, train_set, val_set, config, |_| {})
}

/// [`train`] with a callback after every parameter update.
pub fn train_observed(
    circuit: &Circuit,
    readout: &LinearMap,
    init: &[f64],
    train_set: &[Sample],
    val_set: &[Sample],
    config: &TrainConfig,
    mut observe: impl FnMut(&StepView<'_>),
) -> Result<TrainOutcome> {
    config.validate()?;
    circuit.validate()?;
    let n = circuit.num_params();
    if init.len() != n {
        return Err(Error::LengthMismatch {
            what: "initial parameters",
            expected: n,
            got: init.len(),
        });
    }
    if train_set.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    let oracle = SimOracle::noisy(config.noise.clone(), config.seed)?;
    let exact = SimOracle::exact();
    let noisy_eval = oracle.noise().is_some();

    let mut params = init.to_vec();
    let mut pruning = PruningState::new(n, config.pruning.clone())?;
    let mut opt = OptimizerState::new(config.optimizer.clone(), n)?;
    let batch_size = config.batch_size.min(train_set.len());
    let last = config.steps - 1;

    let mut trace = Vec::with_capacity(config.steps as usize);
    let mut circuit_runs = 0;
    let mut gradient_evaluations = 0;
    let mut final_acc = (0.0, 0.0);

    for t in 0..config.steps {
        let lr = cosine_lr(t, last, config.optimizer.lr_start, config.optimizer.lr_end);
        let phase = pruning.phase();
        let stage = pruning.stage();

        let mut batch_rng = stream_rng(config.seed, Stream::Batch { step: t });
        let picks = index::sample(&mut batch_rng, train_set.len(), batch_size);
        let batch: Vec<Example<'_>> = picks
            .iter()
            .map(|i| Example {
                features: &train_set[i].features,
                label: train_set[i].label,
            })
            .collect();

        let subset = if phase == Phase::Pruning {
            let mut rng = stream_rng(config.seed, Stream::Subset { step: t });
            Some(pruning.sample(&mut rng))
        } else {
            None
        };
        let active: Vec<bool> = match &subset {
            Some(s) => {
                let mut mask = vec![false; n];
                for &i in s {
                    mask[i] = true;
                }
                mask
            }
            None => vec![true; n],
        };
        let active_params = active.iter().filter(|a| **a).count();

        let bg = batch_gradient(&oracle, circuit, readout, &params, &batch, subset.as_deref(), t)?;
        let before = params.clone();
        opt.step(&mut params, &bg.grad, &active, lr)?;
        observe(&StepView {
            step: t,
            phase,
            before: &before,
            after: &params,
            active: &active,
            grad: &bg.grad,
        });
        if phase == Phase::Accumulating {
            pruning.accumulate(&bg.grad)?;
        }
        circuit_runs += bg.circuit_runs;
        gradient_evaluations += active_params as u64;

        let eval_now = t == last || (config.eval_every > 0 && (t + 1) % config.eval_every == 0);
        let (val_accuracy, val_accuracy_noise_free) = if eval_now && !val_set.is_empty() {
            let clean = evaluate(&exact, circuit, readout, &params, val_set, t, 0)?;
            let noisy = if noisy_eval {
                evaluate(&oracle, circuit, readout, &params, val_set, t, 0)?
            } else {
                clean
            };
            final_acc = (noisy, clean);
            (Some(noisy), Some(clean))
        } else {
            (None, None)
        };

        trace.push(MetricsRow {
            step: t + 1,
            stage: stage + 1,
            phase,
            loss: bg.loss,
            batch_accuracy: bg.correct as f64 / batch.len() as f64,
            val_accuracy,
            val_accuracy_noise_free,
            circuit_runs,
            active_params,
            lr,
        });
        pruning.advance();
    }

    Ok(TrainOutcome {
        params,
        trace,
        circuit_runs,
        gradient_evaluations,
        final_val_accuracy: final_acc.0,
        final_val_accuracy_noise_free: final_acc.1,
    })
}
