//! Experiment harness: configs, runs, ablations and the simulator scaling
//! study.

mod ablation;
mod config;
mod run;
mod scaling;

pub use ablation::{ablation_on, ablation_suite, mean_std, AblationRow, AblationTable, Sweep, MIN_ABLATION_SEEDS};
pub use config::{
    default_steps, ExperimentConfig, NoiseSection, PruningSection, RunMode, DATA_ROOT_ENV, DEFAULT_DATA_ROOT,
};
pub use run::{
    checkpoint_path, evaluate_checkpoint, resolve_steps, run_experiment, run_prepared, run_seed, steps_for_budget,
    summary_tsv, trace_path, Checkpoint, CheckpointEval, Prepared, RunRecord, SPLIT_TRAIN, SPLIT_VAL, SUMMARY_HEADER,
};
pub use scaling::{
    benchmark_circuit, scaling_bench, scaling_tsv, ScalingRow, DEFAULT_MEMORY_BUDGET, DEFAULT_REPETITIONS,
    ROTATION_GATES, RZZ_GATES,
};
