//! Exact statevector simulation of parametrized circuits with per-qubit
//! Pauli-Z readout.

mod circuit;
mod gate;
mod state;

use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use circuit::Circuit;
pub use gate::{kron2, Binding, Gate, GateKind, GateMatrix, Mat2, Mat4, Pauli};
pub use state::{kernels, StateVector, PARALLEL_MIN_QUBITS};

use crate::error::Result;
use crate::noise::{self, NoiseModel};

/// Largest register the simulator will allocate (16 GiB of amplitudes).
pub const MAX_QUBITS: usize = 30;

/// Per-qubit ⟨Z⟩ values, each in [-1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationVector(Vec<f64>);

impl ExpectationVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (-1.0..=1.0).contains(v)));
        ExpectationVector(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ExpectationVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Offset added to the angle of a single gate occurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateShift {
    pub gate: usize,
    pub delta: f64,
}

pub fn init_zero_state(num_qubits: usize) -> Result<StateVector> {
    StateVector::zero(num_qubits)
}

pub fn apply_gate(state: &mut StateVector, gate: &Gate, angle: f64) -> Result<()> {
    state.apply(gate.kind, &gate.wires, angle)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

/// Evaluates the circuit function: prepares |0…0⟩, applies every gate with its
/// resolved angle, and reads out ⟨Z⟩ per qubit. With an enabled noise model the
/// gates and readout go through [`crate::noise`]; otherwise the result is exact
/// and `rng` is untouched.
pub fn run_circuit<R: Rng + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<ExpectationVector> {
    run_circuit_shifted(circuit, params, features, None, noise, rng)
}

/// [`run_circuit`] with an optional angle offset on one gate occurrence.
pub fn run_circuit_shifted<R: Rng + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    shift: Option<GateShift>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<ExpectationVector> {
    circuit.check_inputs(params, features)?;
    if let Some(s) = shift {
        if s.gate >= circuit.gates().len() {
            return Err(crate::Error::IndexOutOfRange {
                what: "gate",
                index: s.gate,
                limit: circuit.gates().len(),
            });
        }
    }
    match noise.filter(|n| n.is_active()) {
        None => {
            let state = evolve(circuit, params, features, shift, None, rng)?;
            Ok(ExpectationVector::new(state.expectations_z()))
        }
        Some(model) => {
            model.validate()?;
            let trajectories = model.trajectories.max(1);
            let mut acc = vec![0.0; circuit.num_qubits()];
            for _ in 0..trajectories {
                let state = evolve(circuit, params, features, shift, Some(model), rng)?;
                let e = noise::measure(&state, model, rng)?;
                for (a, v) in acc.iter_mut().zip(e.iter()) {
                    *a += v;
                }
            }
            let t = trajectories as f64;
            Ok(ExpectationVector::new(
                acc.into_iter().map(|v| (v / t).clamp(-1.0, 1.0)).collect(),
            ))
        }
    }
}

fn evolve<R: Rng + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    shift: Option<GateShift>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.num_qubits())?;
    for (i, gate) in circuit.gates().iter().enumerate() {
        let mut angle = circuit.angle(i, params, features);
        if let Some(s) = shift.filter(|s| s.gate == i) {
            angle += s.delta;
        }
        state.apply(gate.kind, &gate.wires, angle)?;
        if let Some(model) = noise {
            let p = if gate.kind.arity() == 1 { model.p1 } else { model.p2 };
            noise::apply_gate_noise(&mut state, &gate.wires, p, rng)?;
        }
    }
    Ok(state)
}
