//! The task circuits: rotation encoders, trainable layer stacks and linear
//! readout heads.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Sample, Task};
use crate::error::{Error, Result};
use crate::grad::LinearMap;
use crate::rng::{stream_rng, Stream};
use crate::sim::{Binding, Circuit, Gate, GateKind};

pub const NUM_QUBITS: usize = 4;

/// A trainable layer is a single gate kind laid out over the register.
pub type LayerKind = GateKind;

/// One rotation per listed wire, consuming consecutive features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderGroup {
    pub kind: GateKind,
    pub wires: Vec<usize>,
}

impl EncoderGroup {
    fn all(kind: GateKind) -> Self {
        EncoderGroup {
            kind,
            wires: (0..NUM_QUBITS).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// [e0 + e1, e2 + e3]
    SumPairs,
    Identity,
}

impl Head {
    pub fn matrix(self, num_qubits: usize) -> Result<LinearMap> {
        match self {
            Head::Identity => Ok(LinearMap::identity(num_qubits)),
            Head::SumPairs => {
                if !num_qubits.is_multiple_of(2) {
                    return Err(Error::Config("sum_pairs head needs an even qubit count".into()));
                }
                let rows = num_qubits / 2;
                let mut data = vec![0.0; rows * num_qubits];
                for r in 0..rows {
                    data[r * num_qubits + 2 * r] = 1.0;
                    data[r * num_qubits + 2 * r + 1] = 1.0;
                }
                LinearMap::new(rows, num_qubits, data)
            }
        }
    }
}

pub fn apply_head(expectations: &[f64], head: Head) -> Result<Vec<f64>> {
    head.matrix(NUM_QUBITS)?.apply(expectations)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub task: Task,
    pub num_qubits: usize,
    pub encoder: Vec<EncoderGroup>,
    /// One block of layers; the trainable stack is `repeats` copies.
    pub block: Vec<LayerKind>,
    pub repeats: usize,
    pub head: Head,
    /// Multiplies input features before they are used as angles.
    pub encoder_scale: f64,
}

/// Optional changes to a preset, as written in experiment configs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub repeats: Option<usize>,
    pub encoder_scale: Option<f64>,
}

impl ModelSpec {
    pub fn preset(task: Task) -> Self {
        use GateKind::*;
        let image_encoder = vec![
            EncoderGroup::all(RY),
            EncoderGroup::all(RZ),
            EncoderGroup::all(RX),
            EncoderGroup::all(RY),
        ];
        let (encoder, block, repeats, head, encoder_scale) = match task {
            Task::Mnist2 | Task::Fashion2 => (image_encoder, vec![RZZ, RY], 1, Head::SumPairs, PI),
            Task::Mnist4 => (image_encoder, vec![RX, RY, RZ, CZ], 3, Head::Identity, PI),
            Task::Fashion4 => (image_encoder, vec![RZZ, RY], 3, Head::Identity, PI),
            Task::Vowel4 => (
                vec![
                    EncoderGroup::all(RY),
                    EncoderGroup::all(RZ),
                    EncoderGroup {
                        kind: RX,
                        wires: vec![0, 1],
                    },
                ],
                vec![RZZ, RXX],
                2,
                Head::Identity,
                1.0,
            ),
        };
        ModelSpec {
            task,
            num_qubits: NUM_QUBITS,
            encoder,
            block,
            repeats,
            head,
            encoder_scale,
        }
    }

    pub fn with_overrides(mut self, o: &ModelOverrides) -> Result<Self> {
        if let Some(r) = o.repeats {
            if r == 0 {
                return Err(Error::Config("model.repeats must be >= 1".into()));
            }
            self.repeats = r;
        }
        if let Some(s) = o.encoder_scale {
            if !s.is_finite() {
                return Err(Error::NonFinite("encoder scale"));
            }
            self.encoder_scale = s;
        }
        Ok(self)
    }

    pub fn num_features(&self) -> usize {
        self.encoder.iter().map(|g| g.wires.len()).sum()
    }

    pub fn num_params(&self) -> usize {
        self.repeats
            * self
                .block
                .iter()
                .filter(|k| k.is_parametric())
                .map(|&k| layer_wires(k, self.num_qubits).len())
                .sum::<usize>()
    }

    pub fn readout(&self) -> Result<LinearMap> {
        self.head.matrix(self.num_qubits)
    }

    pub fn check_features(&self, got: usize) -> Result<()> {
        if got != self.num_features() {
            return Err(Error::LengthMismatch {
                what: "input features",
                expected: self.num_features(),
                got,
            });
        }
        Ok(())
    }

    /// Scales sample features into rotation angles.
    pub fn encode(&self, samples: &[Sample]) -> Result<Vec<Sample>> {
        samples
            .iter()
            .map(|s| {
                self.check_features(s.features.len())?;
                Ok(Sample {
                    features: s.features.iter().map(|x| x * self.encoder_scale).collect(),
                    label: s.label,
                })
            })
            .collect()
    }
}

/// Wire tuples a layer occupies: one per wire for single-qubit kinds, the
/// ring (0,1),(1,2),…,(n−1,0) for two-qubit rotations, and the open chain
/// (0,1),…,(n−2,n−1) for CZ.
pub fn layer_wires(kind: LayerKind, num_qubits: usize) -> Vec<Vec<usize>> {
    match (kind.arity(), kind) {
        (1, _) => (0..num_qubits).map(|w| vec![w]).collect(),
        (_, GateKind::CZ) => (0..num_qubits.saturating_sub(1)).map(|w| vec![w, w + 1]).collect(),
        _ if num_qubits == 2 => vec![vec![0, 1]],
        _ => (0..num_qubits).map(|w| vec![w, (w + 1) % num_qubits]).collect(),
    }
}

/// Encoder gates bound to features in plan order, then the trainable stack
/// with a fresh parameter per parametric gate.
pub fn build_circuit(spec: &ModelSpec) -> Result<Circuit> {
    let mut circuit = Circuit::new(spec.num_qubits, spec.num_params(), spec.num_features())?;
    let mut feature = 0;
    for group in &spec.encoder {
        if group.kind.arity() != 1 || !group.kind.is_parametric() {
            return Err(Error::Config(format!("{:?} cannot encode features", group.kind)));
        }
        for &w in &group.wires {
            circuit.push(Gate::single(group.kind, w, Binding::Feature(feature))?)?;
            feature += 1;
        }
    }
    let mut param = 0;
    for _ in 0..spec.repeats {
        for &kind in &spec.block {
            for wires in layer_wires(kind, spec.num_qubits) {
                let binding = if kind.is_parametric() {
                    param += 1;
                    Binding::Param(param - 1)
                } else {
                    Binding::Constant(0.0)
                };
                circuit.push(Gate::new(kind, &wires, binding)?)?;
            }
        }
    }
    Ok(circuit)
}

/// Independent uniform draws on [−π, π] from the `Init` stream.
pub fn init_params(num_params: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::Init);
    (0..num_params).map(|_| rng.random_range(-PI..=PI)).collect()
}
