use serde::{Deserialize, Serialize};

use super::gate::{Binding, Gate};
use crate::error::{Error, Result};

/// Ordered gate list over a fixed register, with angle bindings to inputs and
/// shared trainable parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    num_features: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_params: usize, num_features: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > super::MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        Ok(Circuit {
            num_qubits,
            num_params,
            num_features,
            gates: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Appends a gate after checking wires and binding indices.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(self)
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        gate.check_shape()?;
        for &w in &gate.wires {
            if w >= self.num_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    num_qubits: self.num_qubits,
                });
            }
        }
        match gate.binding {
            Binding::Param(i) if i >= self.num_params => Err(Error::IndexOutOfRange {
                what: "parameter",
                index: i,
                limit: self.num_params,
            }),
            Binding::Feature(i) if i >= self.num_features => Err(Error::IndexOutOfRange {
                what: "feature",
                index: i,
                limit: self.num_features,
            }),
            _ => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > super::MAX_QUBITS {
            return Err(Error::QubitCount(self.num_qubits));
        }
        self.gates.iter().try_for_each(|g| self.check_gate(g))
    }

    /// Indices of the gates bound to parameter `param`, in circuit order.
    pub fn occurrences(&self, param: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.binding == Binding::Param(param))
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of gates bound to each parameter.
    pub fn occurrence_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_params];
        for g in &self.gates {
            if let Binding::Param(i) = g.binding {
                counts[i] += 1;
            }
        }
        counts
    }

    /// Count of gates carrying a trainable parameter.
    pub fn num_param_gates(&self) -> usize {
        self.occurrence_counts().iter().sum()
    }

    /// Resolved rotation angle for gate `index`.
    pub(crate) fn angle(&self, index: usize, params: &[f64], features: &[f64]) -> f64 {
        match self.gates[index].binding {
            Binding::Constant(a) => a,
            Binding::Feature(i) => features[i],
            Binding::Param(i) => params[i],
        }
    }

    pub(crate) fn check_inputs(&self, params: &[f64], features: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::LengthMismatch {
                what: "parameter vector",
                expected: self.num_params,
                got: params.len(),
            });
        }
        if features.len() != self.num_features {
            return Err(Error::LengthMismatch {
                what: "feature vector",
                expected: self.num_features,
                got: features.len(),
            });
        }
        if params.iter().chain(features).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("circuit input"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }
}
