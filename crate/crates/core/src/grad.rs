//! Hardware-style gradients: a parameter-shift Jacobian of the circuit
//! outputs, the classical softmax cross-entropy gradient with respect to those
//! outputs, and their product.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::par;
use crate::rng::{stream_rng, Stream};
use crate::sim::{run_circuit_shifted, Circuit, ExpectationVector, GateShift};

/// Anything that can execute a (possibly shifted) circuit and return ⟨Z⟩ per
/// qubit. Implementations must be pure functions of their arguments so that
/// evaluations can be reordered freely.
pub trait CircuitOracle: Sync {
    fn evaluate(
        &self,
        circuit: &Circuit,
        params: &[f64],
        features: &[f64],
        shift: Option<GateShift>,
        stream: Stream,
    ) -> Result<ExpectationVector>;
}

/// The statevector simulator as an oracle, optionally behind a noise model.
#[derive(Clone, Debug)]
pub struct SimOracle {
    noise: Option<NoiseModel>,
    seed: u64,
}

impl SimOracle {
    pub fn exact() -> Self {
        SimOracle {
            noise: None,
            seed: 0,
        }
    }

    pub fn noisy(noise: NoiseModel, seed: u64) -> Result<Self> {
        noise.validate()?;
        Ok(SimOracle {
            noise: noise.is_active().then_some(noise),
            seed,
        })
    }

    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }
}

impl CircuitOracle for SimOracle {
    fn evaluate(
        &self,
        circuit: &Circuit,
        params: &[f64],
        features: &[f64],
        shift: Option<GateShift>,
        stream: Stream,
    ) -> Result<ExpectationVector> {
        match &self.noise {
            None => {
                // The exact path draws nothing from the generator.
                let mut rng = <crate::rng::StreamRng as rand::SeedableRng>::seed_from_u64(0);
                run_circuit_shifted(circuit, params, features, shift, None, &mut rng)
            }
            Some(model) => {
                let mut rng = stream_rng(self.seed, stream);
                run_circuit_shifted(circuit, params, features, shift, Some(model), &mut rng)
            }
        }
    }
}

/// Position of a single evaluation inside a training run, used to key its
/// random stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalContext {
    pub step: u64,
    pub sample: u64,
}

impl EvalContext {
    fn shift_stream(self, param: usize, gate: usize, sign: i8) -> Stream {
        Stream::Shift {
            step: self.step,
            sample: self.sample,
            param: param as u64,
            gate: gate as u64,
            sign,
        }
    }

    fn forward_stream(self) -> Stream {
        Stream::Forward {
            step: self.step,
            sample: self.sample,
        }
    }
}

/// ∂f/∂θ_i by the parameter-shift rule: each gate occurrence of the parameter
/// is shifted by ±π/2 on its own, the half-difference taken, and the
/// contributions summed. Returns the column and the number of oracle calls.
pub fn param_shift_gradient<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    param: usize,
    ctx: EvalContext,
) -> Result<(Vec<f64>, u64)> {
    if param >= circuit.num_params() {
        return Err(Error::IndexOutOfRange {
            what: "parameter",
            index: param,
            limit: circuit.num_params(),
        });
    }
    let gates = circuit.occurrences(param);
    if gates.is_empty() {
        return Err(Error::UnusedParameter(param));
    }
    let mut column = vec![0.0; circuit.num_qubits()];
    for &gate in &gates {
        let plus = eval_shift(oracle, circuit, params, features, param, gate, 1, ctx)?;
        let minus = eval_shift(oracle, circuit, params, features, param, gate, -1, ctx)?;
        accumulate_half_difference(&mut column, &plus, &minus);
    }
    Ok((column, 2 * gates.len() as u64))
}

#[allow(clippy::too_many_arguments)]
fn eval_shift<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    param: usize,
    gate: usize,
    sign: i8,
    ctx: EvalContext,
) -> Result<ExpectationVector> {
    let shift = GateShift {
        gate,
        delta: sign as f64 * FRAC_PI_2,
    };
    oracle.evaluate(
        circuit,
        params,
        features,
        Some(shift),
        ctx.shift_stream(param, gate, sign),
    )
}

fn accumulate_half_difference(column: &mut [f64], plus: &[f64], minus: &[f64]) {
    for ((c, p), m) in column.iter_mut().zip(plus).zip(minus) {
        *c += 0.5 * (p - m);
    }
}

/// m×n matrix ∂f/∂θ. Columns of frozen parameters are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jacobian {
    num_outputs: usize,
    num_params: usize,
    /// Column-major: `data[i * num_outputs + j] = ∂f_j/∂θ_i`.
    data: Vec<f64>,
    active: Vec<bool>,
    pub circuit_runs: u64,
}

impl Jacobian {
    pub fn zeros(num_outputs: usize, num_params: usize) -> Self {
        Jacobian {
            num_outputs,
            num_params,
            data: vec![0.0; num_outputs * num_params],
            active: vec![false; num_params],
            circuit_runs: 0,
        }
    }

    /// Builds a fully active Jacobian from rows `values[j][i] = ∂f_j/∂θ_i`.
    pub fn from_rows(values: &[Vec<f64>]) -> Result<Self> {
        let m = values.len();
        let n = values.first().map_or(0, Vec::len);
        let mut jac = Jacobian::zeros(m, n);
        for (j, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    what: "jacobian row",
                    expected: n,
                    got: row.len(),
                });
            }
            for (i, v) in row.iter().enumerate() {
                jac.data[i * m + j] = *v;
            }
        }
        jac.active.fill(true);
        Ok(jac)
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn get(&self, output: usize, param: usize) -> f64 {
        self.data[param * self.num_outputs + output]
    }

    pub fn column(&self, param: usize) -> &[f64] {
        &self.data[param * self.num_outputs..(param + 1) * self.num_outputs]
    }

    pub fn is_active(&self, param: usize) -> bool {
        self.active[param]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    fn set_column(&mut self, param: usize, column: &[f64]) {
        let m = self.num_outputs;
        self.data[param * m..(param + 1) * m].copy_from_slice(column);
        self.active[param] = true;
    }
}

/// Resolves an optional subset into a sorted, deduplicated index list.
pub fn resolve_subset(num_params: usize, subset: Option<&[usize]>) -> Result<Vec<usize>> {
    match subset {
        None => {
            if num_params == 0 {
                return Err(Error::EmptySubset);
            }
            Ok((0..num_params).collect())
        }
        Some(s) => {
            if s.is_empty() {
                return Err(Error::EmptySubset);
            }
            let mut v = s.to_vec();
            v.sort_unstable();
            v.dedup();
            if let Some(&bad) = v.iter().find(|&&i| i >= num_params) {
                return Err(Error::IndexOutOfRange {
                    what: "parameter",
                    index: bad,
                    limit: num_params,
                });
            }
            Ok(v)
        }
    }
}

/// Parameter-shift Jacobian over `subset` (all parameters when `None`).
/// Every shifted evaluation is independent and runs on the data-parallel map.
pub fn jacobian<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    subset: Option<&[usize]>,
    ctx: EvalContext,
) -> Result<Jacobian> {
    let subset = resolve_subset(circuit.num_params(), subset)?;
    let mut tasks = Vec::new();
    for &param in &subset {
        let gates = circuit.occurrences(param);
        if gates.is_empty() {
            return Err(Error::UnusedParameter(param));
        }
        for gate in gates {
            tasks.push((param, gate, 1i8));
            tasks.push((param, gate, -1i8));
        }
    }
    let outputs = par::try_map(&tasks, |&(param, gate, sign)| {
        eval_shift(oracle, circuit, params, features, param, gate, sign, ctx)
    })?;

    let mut jac = Jacobian::zeros(circuit.num_qubits(), circuit.num_params());
    let mut column = vec![0.0; circuit.num_qubits()];
    let mut k = 0;
    while k < tasks.len() {
        let param = tasks[k].0;
        column.fill(0.0);
        while k < tasks.len() && tasks[k].0 == param {
            accumulate_half_difference(&mut column, &outputs[k], &outputs[k + 1]);
            k += 2;
        }
        jac.set_column(param, &column);
    }
    jac.circuit_runs = tasks.len() as u64;
    Ok(jac)
}

/// Softmax cross-entropy of `logits` against class `target`, and its gradient
/// with respect to the logits (p − onehot(target)).
pub fn loss_and_downstream(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::IndexOutOfRange {
            what: "target class",
            index: target,
            limit: logits.len(),
        });
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let log_sum = sum.ln() + max;
    let loss = log_sum - logits[target];
    let mut downstream: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    downstream[target] -= 1.0;
    Ok((loss, downstream))
}

/// ∂L/∂θ = Jᵀ · ∂L/∂f. Frozen columns give exactly zero.
pub fn chain(jacobian: &Jacobian, downstream: &[f64]) -> Result<Vec<f64>> {
    if downstream.len() != jacobian.num_outputs {
        return Err(Error::LengthMismatch {
            what: "downstream gradient",
            expected: jacobian.num_outputs,
            got: downstream.len(),
        });
    }
    Ok((0..jacobian.num_params)
        .map(|i| {
            if !jacobian.active[i] {
                return 0.0;
            }
            jacobian
                .column(i)
                .iter()
                .zip(downstream)
                .map(|(j, d)| j * d)
                .sum()
        })
        .collect())
}

/// Dense linear readout from circuit outputs to logits (`logits = A · f`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "linear map entries",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(LinearMap { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        LinearMap {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                what: "linear map input",
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::LengthMismatch {
                what: "linear map cotangent",
                expected: self.rows,
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, g) in self.data.chunks(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * g;
            }
        }
        Ok(out)
    }
}

/// Everything produced while computing one sample's gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub expectations: Vec<f64>,
    pub logits: Vec<f64>,
    pub loss: f64,
    /// ∂L/∂f over the circuit outputs (the readout map already folded in).
    pub downstream: Vec<f64>,
    pub jacobian: Jacobian,
    pub grad: Vec<f64>,
    /// Forward pass plus every shifted evaluation.
    pub circuit_runs: u64,
}

/// Forward pass, loss, parameter-shift Jacobian and chain rule for a single
/// labelled input.
#[allow(clippy::too_many_arguments)]
pub fn sample_gradient<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    readout: &LinearMap,
    params: &[f64],
    features: &[f64],
    label: usize,
    subset: Option<&[usize]>,
    ctx: EvalContext,
) -> Result<GradientReport> {
    let expectations = oracle
        .evaluate(circuit, params, features, None, ctx.forward_stream())?
        .into_inner();
    let logits = readout.apply(&expectations)?;
    let (loss, dlogits) = loss_and_downstream(&logits, label)?;
    let downstream = readout.transpose_apply(&dlogits)?;
    let jacobian = jacobian(oracle, circuit, params, features, subset, ctx)?;
    let grad = chain(&jacobian, &downstream)?;
    let circuit_runs = 1 + jacobian.circuit_runs;
    Ok(GradientReport {
        expectations,
        logits,
        loss,
        downstream,
        jacobian,
        grad,
        circuit_runs,
    })
}

/// One labelled input of a mini-batch.
#[derive(Clone, Copy, Debug)]
pub struct Example<'a> {
    pub features: &'a [f64],
    pub label: usize,
}

/// Mean gradient and loss over a mini-batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchGradient {
    pub grad: Vec<f64>,
    pub loss: f64,
    pub circuit_runs: u64,
    /// Batch samples whose forward-pass argmax matched the label.
    pub correct: usize,
}

/// Per-sample gradients (evaluated in parallel), averaged in batch order.
pub fn batch_gradient<O: CircuitOracle + ?Sized>(
    oracle: &O,
    circuit: &Circuit,
    readout: &LinearMap,
    params: &[f64],
    batch: &[Example<'_>],
    subset: Option<&[usize]>,
    step: u64,
) -> Result<BatchGradient> {
    if batch.is_empty() {
        return Err(Error::Config("empty mini-batch".into()));
    }
    let indexed: Vec<(u64, Example<'_>)> = batch
        .iter()
        .enumerate()
        .map(|(i, e)| (i as u64, *e))
        .collect();
    let reports = par::try_map(&indexed, |(sample, ex)| {
        let ctx = EvalContext {
            step,
            sample: *sample,
        };
        sample_gradient(
            oracle,
            circuit,
            readout,
            params,
            ex.features,
            ex.label,
            subset,
            ctx,
        )
    })?;
    let b = reports.len() as f64;
    let mut grad = vec![0.0; circuit.num_params()];
    let mut loss = 0.0;
    let mut circuit_runs = 0;
    let mut correct = 0;
    for (r, (_, ex)) in reports.iter().zip(&indexed) {
        for (g, v) in grad.iter_mut().zip(&r.grad) {
            *g += v;
        }
        loss += r.loss;
        circuit_runs += r.circuit_runs;
        correct += (argmax(&r.logits) == ex.label) as usize;
    }
    for g in &mut grad {
        *g /= b;
    }
    Ok(BatchGradient {
        grad,
        loss: loss / b,
        circuit_runs,
        correct,
    })
}

/// Index of the first maximal entry.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
