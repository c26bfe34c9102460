mod common;

use std::f64::consts::PI;

use qnn_core::grad::{
    batch_gradient, jacobian, param_shift_gradient, sample_gradient, CircuitOracle, EvalContext, Example, LinearMap,
    SimOracle,
};
use qnn_core::noise::NoiseModel;
use qnn_core::rng::{stream_rng, Stream};
use qnn_core::sim::{run_circuit, Binding, Circuit, Gate, GateKind};

fn exact(c: &Circuit, params: &[f64], features: &[f64]) -> Vec<f64> {
    let mut r = stream_rng(0, Stream::Custom(0, 0));
    run_circuit(c, params, features, None, &mut r).unwrap().into_inner()
}

fn central_difference(c: &Circuit, params: &[f64], features: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut plus = params.to_vec();
    let mut minus = params.to_vec();
    plus[i] += h;
    minus[i] -= h;
    exact(c, &plus, features)
        .iter()
        .zip(exact(c, &minus, features))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

#[test]
fn shift_rule_matches_finite_differences_on_random_circuits() {
    let oracle = SimOracle::exact();
    let mut rng = common::rng(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = common::random_circuit(&mut rng, 4, 12);
        let params = common::uniform(&mut rng, c.num_params(), -PI, PI);
        let features = common::uniform(&mut rng, 2, 0.0, PI);
        for i in 0..c.num_params() {
            let (ps, _) = param_shift_gradient(&oracle, &c, &params, &features, i, EvalContext::default()).unwrap();
            let fd = central_difference(&c, &params, &features, i, 1e-5);
            for (a, b) in ps.iter().zip(&fd) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst < 1e-6, "max deviation {worst:e}");
}

#[test]
fn jacobian_subset_columns_equal_full_columns() {
    let oracle = SimOracle::exact();
    let mut rng = common::rng(5);
    let c = common::random_circuit(&mut rng, 3, 10);
    let params = common::uniform(&mut rng, c.num_params(), -PI, PI);
    let features = [0.4, 1.1];
    let full = jacobian(&oracle, &c, &params, &features, None, EvalContext::default()).unwrap();
    let subset: Vec<usize> = (0..c.num_params()).step_by(2).collect();
    let part = jacobian(&oracle, &c, &params, &features, Some(&subset), EvalContext::default()).unwrap();
    let occ = c.occurrence_counts();
    assert_eq!(full.circuit_runs, 2 * occ.iter().sum::<usize>() as u64);
    assert_eq!(part.circuit_runs, 2 * subset.iter().map(|&i| occ[i]).sum::<usize>() as u64);
    for i in 0..c.num_params() {
        if subset.contains(&i) {
            assert_eq!(part.column(i), full.column(i));
        } else {
            assert!(part.column(i).iter().all(|v| *v == 0.0));
            assert!(!part.is_active(i));
        }
    }
}

/// Loss of a single sample as a function of the parameters.
fn loss(c: &Circuit, readout: &LinearMap, params: &[f64], features: &[f64], label: usize) -> f64 {
    let logits = readout.apply(&exact(c, params, features)).unwrap();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

#[test]
fn loss_gradient_through_readout_matches_finite_differences() {
    let oracle = SimOracle::exact();
    let mut rng = common::rng(77);
    for trial in 0..20 {
        let mut c = common::random_circuit(&mut rng, 4, 8);
        while c.num_qubits() < 2 {
            c = common::random_circuit(&mut rng, 4, 8);
        }
        let q = c.num_qubits();
        let rows = 2;
        let data = common::uniform(&mut rng, rows * q, -1.0, 1.0);
        let readout = LinearMap::new(rows, q, data).unwrap();
        let params = common::uniform(&mut rng, c.num_params(), -PI, PI);
        let features = common::uniform(&mut rng, 2, 0.0, PI);
        let label = trial % rows;
        let report = sample_gradient(&oracle, &c, &readout, &params, &features, label, None, EvalContext::default()).unwrap();
        assert!((report.loss - loss(&c, &readout, &params, &features, label)).abs() < 1e-12);
        for i in 0..c.num_params() {
            let h = 1e-5;
            let mut p = params.clone();
            p[i] += h;
            let up = loss(&c, &readout, &p, &features, label);
            p[i] -= 2.0 * h;
            let down = loss(&c, &readout, &p, &features, label);
            let fd = (up - down) / (2.0 * h);
            assert!((report.grad[i] - fd).abs() < 1e-6, "trial {trial} param {i}: {} vs {fd}", report.grad[i]);
        }
    }
}

#[test]
fn batch_gradient_is_the_mean_of_sample_gradients() {
    let oracle = SimOracle::exact();
    let mut c = Circuit::new(2, 2, 2).unwrap();
    c.push(Gate::single(GateKind::RY, 0, Binding::Feature(0)).unwrap()).unwrap();
    c.push(Gate::single(GateKind::RY, 1, Binding::Feature(1)).unwrap()).unwrap();
    c.push(Gate::pair(GateKind::RZX, 0, 1, Binding::Param(0)).unwrap()).unwrap();
    c.push(Gate::single(GateKind::RX, 1, Binding::Param(1)).unwrap()).unwrap();
    let readout = LinearMap::identity(2);
    let params = [0.3, -1.2];
    let xs = [[0.1, 0.9], [2.0, 0.4], [1.3, 1.3]];
    let batch: Vec<Example<'_>> = xs.iter().enumerate().map(|(i, x)| Example { features: x, label: i % 2 }).collect();
    let bg = batch_gradient(&oracle, &c, &readout, &params, &batch, None, 0).unwrap();
    let mut want = [0.0; 2];
    let mut want_loss = 0.0;
    for (i, ex) in batch.iter().enumerate() {
        let ctx = EvalContext { step: 0, sample: i as u64 };
        let r = sample_gradient(&oracle, &c, &readout, &params, ex.features, ex.label, None, ctx).unwrap();
        want[0] += r.grad[0] / 3.0;
        want[1] += r.grad[1] / 3.0;
        want_loss += r.loss / 3.0;
    }
    assert!((bg.grad[0] - want[0]).abs() < 1e-15 && (bg.grad[1] - want[1]).abs() < 1e-15);
    assert!((bg.loss - want_loss).abs() < 1e-15);
    // forward + 2 shifts per parameter gate, per sample
    assert_eq!(bg.circuit_runs, 3 * 5);
}

#[test]
fn noisy_shift_gradient_is_unbiased_for_shot_noise() {
    // RX(θ) on one qubit: d⟨Z⟩/dθ = −sin θ. With shot noise only, the mean of
    // many independent estimates converges to the exact value.
    let mut c = Circuit::new(1, 1, 0).unwrap();
    c.push(Gate::single(GateKind::RX, 0, Binding::Param(0)).unwrap()).unwrap();
    let theta = 0.9;
    let oracle = SimOracle::noisy(NoiseModel::shots_only(256), 1).unwrap();
    let trials = 2000;
    let mut sum = 0.0;
    for s in 0..trials {
        let ctx = EvalContext { step: s, sample: 0 };
        sum += param_shift_gradient(&oracle, &c, &[theta], &[], 0, ctx).unwrap().0[0];
    }
    let mean = sum / trials as f64;
    // each shifted estimate has variance ≤ 1/256; half-difference → ≤ 1/512
    let se = (1.0 / 512.0 / trials as f64).sqrt();
    assert!((mean + theta.sin()).abs() < 5.0 * se, "{mean} vs {}", -theta.sin());
}

#[test]
fn oracle_evaluations_are_order_independent() {
    let oracle = SimOracle::noisy(NoiseModel::default_preset(), 9).unwrap();
    let mut rng = common::rng(3);
    let c = common::random_circuit(&mut rng, 4, 8);
    let params = common::uniform(&mut rng, c.num_params(), -PI, PI);
    let ctx = EvalContext { step: 4, sample: 2 };
    let a = jacobian(&oracle, &c, &params, &[0.1, 0.2], None, ctx).unwrap();
    // evaluate something else in between; keyed streams must not be affected
    oracle.evaluate(&c, &params, &[0.0, 0.0], None, Stream::Custom(1, 1)).unwrap();
    let b = jacobian(&oracle, &c, &params, &[0.1, 0.2], None, ctx).unwrap();
    assert_eq!(a, b);
}
