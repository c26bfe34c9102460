//! Synthetic NISQ noise: stochastic Pauli errors after each gate, readout bit
//! flips, and finite-shot estimation of ⟨Z⟩.
//!
//! Gate noise follows Monte-Carlo trajectory semantics. One circuit execution
//! draws one error trajectory; shot noise is then layered on that trajectory's
//! final state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ExpectationVector, Pauli, StateVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Depolarizing probability per wire after a single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability per wire after a two-qubit gate, drawn
    /// independently on both wires.
    pub p2: f64,
    /// Probability of flipping each measured bit, in [0, 0.5].
    pub readout_flip: f64,
    /// Shots per execution. `None` reads out the exact expectation (the
    /// infinite-shot limit, attenuated by the readout flip).
    #[serde(default)]
    pub shots: Option<u32>,
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Independent trajectories averaged per execution.
    #[serde(default = "default_one")]
    pub trajectories: u32,
}

fn default_true() -> bool {
    true
}

fn default_one() -> u32 {
    1
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::default_preset()
    }
}

impl NoiseModel {
    /// Gate errors at the two ends of the 1e-3..1e-2 range, 2% readout flips,
    /// 1024 shots.
    pub fn default_preset() -> Self {
        NoiseModel {
            p1: 1e-3,
            p2: 1e-2,
            readout_flip: 0.02,
            shots: Some(1024),
            enabled: true,
            trajectories: 1,
        }
    }

    /// Disabled model; circuits evaluate exactly.
    pub fn none() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            readout_flip: 0.0,
            shots: None,
            enabled: false,
            trajectories: 1,
        }
    }

    /// Only finite-shot sampling, no gate or readout errors.
    pub fn shots_only(shots: u32) -> Self {
        NoiseModel {
            shots: Some(shots),
            enabled: true,
            ..Self::none()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" | "nisq" => Ok(Self::default_preset()),
            "none" | "noise-free" => Ok(Self::none()),
            "shots" => Ok(Self::shots_only(1024)),
            other => Err(Error::Config(format!("unknown noise preset `{other}`"))),
        }
    }

    pub fn is_active(&self) -> bool {
        self.enabled
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p1", self.p1, 0.0, 1.0)?;
        check_probability("p2", self.p2, 0.0, 1.0)?;
        check_probability("readout_flip", self.readout_flip, 0.0, 0.5)?;
        if self.shots == Some(0) {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_probability(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(Error::Probability { name, value, lo, hi });
    }
    Ok(())
}

/// One trajectory of the depolarizing channel on each wire: with probability
/// `p` apply X, Y or Z (uniformly), otherwise leave the wire alone.
pub fn apply_gate_noise<R: Rng + ?Sized>(
    state: &mut StateVector,
    wires: &[usize],
    p: f64,
    rng: &mut R,
) -> Result<()> {
    check_probability("gate error", p, 0.0, 1.0)?;
    for &w in wires {
        if w >= state.num_qubits() {
            return Err(Error::WireOutOfRange {
                wire: w,
                num_qubits: state.num_qubits(),
            });
        }
    }
    if p == 0.0 {
        return Ok(());
    }
    for &w in wires {
        if rng.random::<f64>() < p {
            let pauli = match rng.random_range(0..3) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            state.apply_pauli(w, pauli)?;
        }
    }
    Ok(())
}

/// Draws `shots` basis samples from |amplitude|², flips every measured bit with
/// probability `readout_flip`, and returns (#zeros − #ones)/shots per qubit.
pub fn sample_shots<R: Rng + ?Sized>(
    state: &StateVector,
    shots: u32,
    readout_flip: f64,
    rng: &mut R,
) -> Result<ExpectationVector> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    check_probability("readout_flip", readout_flip, 0.0, 0.5)?;
    let n = state.num_qubits();
    let mut cdf = state.probabilities();
    let mut total = 0.0;
    for p in &mut cdf {
        total += *p;
        *p = total;
    }
    let last = cdf.len() - 1;
    let mut ones = vec![0u32; n];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        for (q, count) in ones.iter_mut().enumerate() {
            let mut bit = (k >> q) & 1 == 1;
            if readout_flip > 0.0 && rng.random::<f64>() < readout_flip {
                bit = !bit;
            }
            *count += bit as u32;
        }
    }
    let s = shots as f64;
    Ok(ExpectationVector::new(
        ones.into_iter()
            .map(|o| (s - 2.0 * o as f64) / s)
            .collect(),
    ))
}

/// Readout of a final trajectory state under `model`.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<ExpectationVector> {
    match model.shots {
        Some(shots) => sample_shots(state, shots, model.readout_flip, rng),
        None => {
            let scale = 1.0 - 2.0 * model.readout_flip;
            Ok(ExpectationVector::new(
                state.expectations_z().into_iter().map(|e| e * scale).collect(),
            ))
        }
    }
}
