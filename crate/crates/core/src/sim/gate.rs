use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    RXX,
    RYY,
    RZZ,
    RZX,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::RXX,
        GateKind::RYY,
        GateKind::RZZ,
        GateKind::RZX,
        GateKind::CZ,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            _ => 2,
        }
    }

    pub fn is_parametric(self) -> bool {
        self != GateKind::CZ
    }

    /// Pauli factors of the generator `H` in `exp(-i/2 * angle * H)`, one per
    /// wire in wire order. `None` for CZ.
    pub fn generator(self) -> Option<&'static [Pauli]> {
        use Pauli::*;
        match self {
            GateKind::RX => Some(&[X]),
            GateKind::RY => Some(&[Y]),
            GateKind::RZ => Some(&[Z]),
            GateKind::RXX => Some(&[X, X]),
            GateKind::RYY => Some(&[Y, Y]),
            GateKind::RZZ => Some(&[Z, Z]),
            GateKind::RZX => Some(&[Z, X]),
            GateKind::CZ => None,
        }
    }

    pub fn matrix(self, angle: f64) -> GateMatrix {
        let (s, c) = (angle / 2.0).sin_cos();
        let cos = Complex64::new(c, 0.0);
        let msin = Complex64::new(0.0, -s);
        match self {
            GateKind::RX => GateMatrix::One([[cos, msin], [msin, cos]]),
            GateKind::RY => GateMatrix::One([
                [cos, Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), cos],
            ]),
            GateKind::RZ => GateMatrix::One([
                [Complex64::new(c, -s), ZERO],
                [ZERO, Complex64::new(c, s)],
            ]),
            GateKind::CZ => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][2] = ONE;
                m[3][3] = -ONE;
                GateMatrix::Two(m)
            }
            _ => {
                let g = self.generator().expect("two-qubit rotation");
                let p = kron2(&g[0].matrix(), &g[1].matrix());
                let mut m = [[ZERO; 4]; 4];
                for r in 0..4 {
                    for k in 0..4 {
                        let id = if r == k { cos } else { ZERO };
                        m[r][k] = id + msin * p[r][k];
                    }
                }
                GateMatrix::Two(m)
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// `a ⊗ b`, with `a` acting on the more significant local bit.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = a[r >> 1][k >> 1] * b[r & 1][k & 1];
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    /// Local basis index is `(bit(wires[0]) << 1) | bit(wires[1])`.
    Two(Mat4),
}

/// Where a gate's rotation angle comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Binding {
    Constant(f64),
    Feature(usize),
    Param(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    pub binding: Binding,
}

impl Gate {
    pub fn new(kind: GateKind, wires: &[usize], binding: Binding) -> Result<Self> {
        let gate = Gate {
            kind,
            wires: wires.to_vec(),
            binding,
        };
        gate.check_shape()?;
        Ok(gate)
    }

    pub fn single(kind: GateKind, wire: usize, binding: Binding) -> Result<Self> {
        Self::new(kind, &[wire], binding)
    }

    pub fn pair(kind: GateKind, a: usize, b: usize, binding: Binding) -> Result<Self> {
        Self::new(kind, &[a, b], binding)
    }

    pub fn cz(a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::CZ, &[a, b], Binding::Constant(0.0))
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        let n = self.kind.arity();
        let distinct = n == 1 || self.wires.first() != self.wires.get(1);
        if self.wires.len() != n || !distinct {
            return Err(Error::BadWires {
                kind: self.kind,
                expected: n,
                got: self.wires.clone(),
            });
        }
        if !self.kind.is_parametric() && self.binding != Binding::Constant(0.0) {
            return Err(Error::NonParametric(self.kind));
        }
        if let Binding::Constant(a) = self.binding {
            if !a.is_finite() {
                return Err(Error::NonFinite("constant gate angle"));
            }
        }
        Ok(())
    }
}
