use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::data::{self, Dataset, DatasetSpec, Sample, Task};
use crate::error::{Error, Result};
use crate::grad::{LinearMap, SimOracle};
use crate::models::{build_circuit, init_params, ModelSpec};
use crate::noise::NoiseModel;
use crate::optim::{self, step_cost, MetricsRow, Phase, PruningConfig, PruningState, TrainConfig};
use crate::sim::Circuit;

/// Evaluation split indices for random streams.
pub const SPLIT_VAL: u8 = 0;
pub const SPLIT_TRAIN: u8 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: Task,
    pub seed: u64,
    pub config_hash: String,
    pub steps: u64,
    pub trace: Vec<MetricsRow>,
    pub final_train_accuracy: f64,
    pub final_val_accuracy: f64,
    pub final_val_accuracy_noise_free: f64,
    pub circuit_runs: u64,
    pub gradient_evaluations: u64,
    /// Measured share of parameter-gradient evaluations skipped.
    pub skipped_fraction: f64,
    /// r·w_p/(w_a + w_p) for the run's pruning configuration.
    pub nominal_skipped_fraction: f64,
    pub params: Vec<f64>,
    pub wall_clock_secs: f64,
}

impl RunRecord {
    /// Equality on everything except wall-clock time and config hash.
    pub fn same_results(&self, other: &RunRecord) -> bool {
        let strip = |r: &RunRecord| RunRecord {
            wall_clock_secs: 0.0,
            config_hash: String::new(),
            ..r.clone()
        };
        strip(self) == strip(other)
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

/// Everything needed to recompute a run's final accuracies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: String,
    pub seed: u64,
    pub steps: u64,
    pub dataset: DatasetSpec,
    pub model: ModelSpec,
    pub noise: NoiseModel,
    pub params: Vec<f64>,
}

/// A loaded task ready for training.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub model: ModelSpec,
    pub circuit: Circuit,
    pub readout: LinearMap,
    /// Features already scaled to rotation angles.
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
}

impl Prepared {
    pub fn new(model: ModelSpec, dataset: &Dataset) -> Result<Self> {
        Ok(Prepared {
            circuit: build_circuit(&model)?,
            readout: model.readout()?,
            train: model.encode(&dataset.train)?,
            val: model.encode(&dataset.val)?,
            model,
        })
    }

    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let dataset = data::load(&config.data_root(), &config.dataset_spec())?;
        Self::new(config.model_spec()?, &dataset)
    }
}

/// Largest step count whose expected circuit executions stay within
/// `budget`. Pruning steps are costed at the mean occurrence count of a kept
/// parameter.
pub fn steps_for_budget(circuit: &Circuit, batch_size: usize, pruning: &PruningConfig, budget: u64) -> Result<u64> {
    let n = circuit.num_params();
    let full = step_cost(circuit, batch_size, None);
    let counts = circuit.occurrence_counts();
    let k = pruning.keep_count(n);
    let mean_occ = counts.iter().sum::<usize>() as f64 / n.max(1) as f64;
    let pruned = batch_size as f64 * (1.0 + 2.0 * (k as f64 * mean_occ).round());
    let mut state = PruningState::new(n, pruning.clone())?;
    let (mut spent, mut steps) = (0u64, 0u64);
    loop {
        let cost = match state.phase() {
            Phase::Pruning => pruned as u64,
            _ => full,
        };
        if spent + cost > budget {
            break;
        }
        spent += cost;
        steps += 1;
        if state.phase() == Phase::Accumulating {
            state.accumulate(&vec![0.0; n])?;
        }
        state.advance();
    }
    if steps == 0 {
        return Err(Error::Config(format!(
            "circuit budget {budget} is below the cost of one step ({full})"
        )));
    }
    Ok(steps)
}

pub fn resolve_steps(config: &ExperimentConfig, circuit: &Circuit) -> Result<u64> {
    match (config.steps, config.circuit_budget) {
        (Some(s), _) => Ok(s),
        (None, Some(b)) => steps_for_budget(circuit, config.batch_size, &config.pruning_config()?, b),
        (None, None) => Ok(super::config::default_steps(config.task)),
    }
}

/// Trains one seed on prepared data.
pub fn run_seed(config: &ExperimentConfig, prepared: &Prepared, seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let pruning = config.pruning_config()?;
    let noise = config.noise_model()?;
    let steps = resolve_steps(config, &prepared.circuit)?;
    let train_config = TrainConfig {
        steps,
        batch_size: config.batch_size,
        eval_every: config.eval_every,
        seed,
        pruning: pruning.clone(),
        optimizer: config.optimizer.clone(),
        noise: noise.clone(),
    };
    let init = init_params(prepared.circuit.num_params(), seed);
    let outcome = optim::train(
        &prepared.circuit,
        &prepared.readout,
        &init,
        &prepared.train,
        &prepared.val,
        &train_config,
    )?;
    let oracle = SimOracle::noisy(noise, seed)?;
    let final_train_accuracy = optim::evaluate(
        &oracle,
        &prepared.circuit,
        &prepared.readout,
        &outcome.params,
        &prepared.train,
        steps - 1,
        SPLIT_TRAIN,
    )?;
    Ok(RunRecord {
        task: config.task,
        seed,
        config_hash: config.hash()?,
        steps,
        skipped_fraction: outcome.measured_savings(prepared.circuit.num_params()),
        nominal_skipped_fraction: pruning.nominal_savings(),
        final_train_accuracy,
        final_val_accuracy: outcome.final_val_accuracy,
        final_val_accuracy_noise_free: outcome.final_val_accuracy_noise_free,
        circuit_runs: outcome.circuit_runs,
        gradient_evaluations: outcome.gradient_evaluations,
        trace: outcome.trace,
        params: outcome.params,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

pub const SUMMARY_HEADER: &str = "task\tseed\tsteps\ttrain_acc\tval_acc\tval_acc_noise_free\tcircuit_runs\tskipped_fraction\tnominal_skipped_fraction\twall_clock_s\tconfig_hash";

pub fn summary_tsv(records: &[RunRecord]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}\t{:.4}\t{:.4}\t{:.2}\t{}",
            r.task,
            r.seed,
            r.steps,
            r.final_train_accuracy,
            r.final_val_accuracy,
            r.final_val_accuracy_noise_free,
            r.circuit_runs,
            r.skipped_fraction,
            r.nominal_skipped_fraction,
            r.wall_clock_secs,
            r.config_hash
        );
    }
    out
}

pub fn checkpoint_path(dir: &Path, task: Task, seed: u64) -> PathBuf {
    dir.join(format!("{task}-seed{seed}.params.json"))
}

pub fn trace_path(dir: &Path, task: Task, seed: u64) -> PathBuf {
    dir.join(format!("{task}-seed{seed}.trace.jsonl"))
}

/// Runs every seed; when `output_dir` is set, writes one trace and one
/// checkpoint per seed plus `summary.tsv` and the resolved `config.toml`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let prepared = Prepared::load(config)?;
    run_prepared(config, &prepared)
}

pub fn run_prepared(config: &ExperimentConfig, prepared: &Prepared) -> Result<Vec<RunRecord>> {
    let records = config
        .seeds
        .iter()
        .map(|&seed| run_seed(config, prepared, seed))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        for r in &records {
            std::fs::write(trace_path(dir, r.task, r.seed), r.trace_jsonl()?)?;
            let ckpt = Checkpoint {
                config_hash: r.config_hash.clone(),
                seed: r.seed,
                steps: r.steps,
                dataset: config.dataset_spec(),
                model: prepared.model.clone(),
                noise: config.noise_model()?,
                params: r.params.clone(),
            };
            std::fs::write(
                checkpoint_path(dir, r.task, r.seed),
                serde_json::to_string_pretty(&ckpt)?,
            )?;
        }
        std::fs::write(dir.join("summary.tsv"), summary_tsv(&records))?;
        std::fs::write(dir.join("config.toml"), config.to_toml()?)?;
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointEval {
    pub val_accuracy: f64,
    pub val_accuracy_noise_free: f64,
}

/// Recomputes final validation accuracy with the random streams used at the
/// last training step.
pub fn evaluate_checkpoint(ckpt: &Checkpoint, data_root: &Path) -> Result<CheckpointEval> {
    let dataset = data::load(data_root, &ckpt.dataset)?;
    let prepared = Prepared::new(ckpt.model.clone(), &dataset)?;
    if ckpt.params.len() != prepared.circuit.num_params() {
        return Err(Error::LengthMismatch {
            what: "checkpoint parameters",
            expected: prepared.circuit.num_params(),
            got: ckpt.params.len(),
        });
    }
    let step = ckpt.steps.saturating_sub(1);
    let clean = optim::evaluate(
        &SimOracle::exact(),
        &prepared.circuit,
        &prepared.readout,
        &ckpt.params,
        &prepared.val,
        step,
        SPLIT_VAL,
    )?;
    let oracle = SimOracle::noisy(ckpt.noise.clone(), ckpt.seed)?;
    let noisy = if oracle.noise().is_some() {
        optim::evaluate(
            &oracle,
            &prepared.circuit,
            &prepared.readout,
            &ckpt.params,
            &prepared.val,
            step,
            SPLIT_VAL,
        )?
    } else {
        clean
    };
    Ok(CheckpointEval {
        val_accuracy: noisy,
        val_accuracy_noise_free: clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    #[test]
    fn budget_matches_cost_formula() {
        let circuit = build_circuit(&ModelSpec::preset(Task::Mnist2)).unwrap();
        let b = 4;
        // n = 8: full step 4·17 = 68, pruned step (k = 4) 4·9 = 36
        let p = PruningConfig::default();
        assert_eq!(steps_for_budget(&circuit, b, &p, 68 + 36 + 36).unwrap(), 3);
        assert_eq!(steps_for_budget(&circuit, b, &p, 68 + 36 + 35).unwrap(), 2);
        assert_eq!(steps_for_budget(&circuit, b, &PruningConfig::off(), 68 * 5).unwrap(), 5);
        assert!(steps_for_budget(&circuit, b, &p, 10).is_err());
    }

    #[test]
    fn summary_has_header_and_rows() {
        let r = RunRecord {
            task: Task::Mnist2,
            seed: 3,
            config_hash: "ab".into(),
            steps: 2,
            trace: vec![],
            final_train_accuracy: 0.5,
            final_val_accuracy: 0.25,
            final_val_accuracy_noise_free: 0.75,
            circuit_runs: 10,
            gradient_evaluations: 4,
            skipped_fraction: 0.0,
            nominal_skipped_fraction: 0.0,
            params: vec![],
            wall_clock_secs: 1.0,
        };
        let tsv = summary_tsv(&[r]);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split('\t').count(), lines[0].split('\t').count());
        assert!(lines[1].starts_with("mnist2\t3\t2\t0.5000\t0.2500"));
    }
}
