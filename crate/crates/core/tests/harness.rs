mod common;

use qnn_core::bench::{
    evaluate_checkpoint, run_experiment, run_prepared, steps_for_budget, Checkpoint, ExperimentConfig, Prepared,
    RunMode, SUMMARY_HEADER,
};
use qnn_core::data::{Dataset, Task};
use qnn_core::models::ModelSpec;

fn toy_prepared(task: Task) -> Prepared {
    let spec = ModelSpec::preset(task);
    let mut train = common::toy_samples(60, spec.num_features(), 4);
    for s in &mut train {
        s.features.iter_mut().for_each(|x| *x /= std::f64::consts::PI);
    }
    let val = train.split_off(40);
    let dataset = Dataset {
        train,
        val,
        num_classes: 2,
    };
    Prepared::new(spec, &dataset).unwrap()
}

fn toy_config(task: Task, mode: RunMode) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(task).with_mode(mode);
    c.steps = Some(6);
    c.batch_size = 8;
    c.eval_every = 2;
    c.seeds = vec![0, 1];
    c
}

#[test]
fn identical_configs_give_identical_traces() {
    let p = toy_prepared(Task::Mnist2);
    let c = toy_config(Task::Mnist2, RunMode::QcPgp);
    let a = run_prepared(&c, &p).unwrap();
    let b = run_prepared(&c, &p).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.trace_jsonl().unwrap(), y.trace_jsonl().unwrap());
        assert!(x.same_results(y));
    }
    assert_ne!(a[0].trace_jsonl().unwrap(), a[1].trace_jsonl().unwrap());
}

#[test]
fn zero_ratio_and_pruning_off_give_identical_records() {
    let p = toy_prepared(Task::Mnist2);
    let mut zero = toy_config(Task::Mnist2, RunMode::QcPgp);
    zero.pruning.ratio = Some(0.0);
    let off = toy_config(Task::Mnist2, RunMode::Qc);
    let a = run_prepared(&zero, &p).unwrap();
    let b = run_prepared(&off, &p).unwrap();
    assert_ne!(zero.hash().unwrap(), off.hash().unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!(x.same_results(y));
    }
}

#[test]
fn summary_reports_the_nominal_savings() {
    let p = toy_prepared(Task::Mnist2);
    let c = toy_config(Task::Mnist2, RunMode::QcPgp);
    for r in run_prepared(&c, &p).unwrap() {
        assert!((r.nominal_skipped_fraction - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.skipped_fraction - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.trace.windows(2).all(|w| w[0].circuit_runs <= w[1].circuit_runs));
        assert_eq!(r.trace.iter().filter(|m| m.val_accuracy.is_some()).count(), 3);
    }
}

#[test]
fn budget_runs_stay_within_budget() {
    let p = toy_prepared(Task::Mnist2);
    let mut c = toy_config(Task::Mnist2, RunMode::QcPgp);
    c.steps = None;
    c.circuit_budget = Some(2_000);
    let steps = steps_for_budget(&p.circuit, 8, &c.pruning_config().unwrap(), 2_000).unwrap();
    for r in run_prepared(&c, &p).unwrap() {
        assert_eq!(r.steps, steps);
        assert!(r.circuit_runs <= 2_000);
    }
}

#[test]
fn outputs_and_checkpoint_recompute_the_summary() {
    let Some(root) = common::data_root(Task::Mnist2) else { return };
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(Task::Mnist2).with_mode(RunMode::QcPgp);
    c.steps = Some(4);
    c.batch_size = 8;
    c.seeds = vec![3];
    c.output_dir = Some(dir.path().to_path_buf());
    c.data_root = Some(root.clone());
    let records = run_experiment(&c).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.tsv")).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
    let trace = std::fs::read_to_string(dir.path().join("mnist2-seed3.trace.jsonl")).unwrap();
    assert_eq!(trace, records[0].trace_jsonl().unwrap());
    let ckpt: Checkpoint =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mnist2-seed3.params.json")).unwrap()).unwrap();
    let e = evaluate_checkpoint(&ckpt, &root).unwrap();
    assert_eq!(e.val_accuracy, records[0].final_val_accuracy);
    assert_eq!(e.val_accuracy_noise_free, records[0].final_val_accuracy_noise_free);
    let saved = ExperimentConfig::from_toml(&std::fs::read_to_string(dir.path().join("config.toml")).unwrap()).unwrap();
    assert_eq!(saved.hash().unwrap(), records[0].config_hash);
}

#[test]
fn missing_dataset_is_an_error() {
    let mut c = ExperimentConfig::new(Task::Fashion2);
    c.data_root = Some("/definitely/not/here".into());
    assert!(run_experiment(&c).is_err());
}
