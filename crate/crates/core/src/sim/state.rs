use num_complex::Complex64;

use super::gate::{GateKind, GateMatrix, Mat2, Mat4, Pauli};
use super::MAX_QUBITS;
use crate::error::{Error, Result};

/// Registers at or above this size use the rayon kernels when the `parallel`
/// feature is enabled.
pub const PARALLEL_MIN_QUBITS: usize = 14;

/// Amplitudes of an n-qubit register. Qubit 0 is the least significant bit of
/// the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::LengthMismatch {
                what: "amplitude vector (power of two)",
                expected: len.next_power_of_two().max(2),
                got: len,
            });
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Bytes held by the amplitude buffer.
    pub fn memory_bytes(&self) -> usize {
        self.amps.len() * std::mem::size_of::<Complex64>()
    }

    /// Bytes needed for an `num_qubits` register, 2^n × 16.
    pub fn memory_for(num_qubits: usize) -> u64 {
        (std::mem::size_of::<Complex64>() as u64) << num_qubits
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.num_qubits {
            return Err(Error::WireOutOfRange {
                wire,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies `kind` with rotation `angle` on `wires`.
    pub fn apply(&mut self, kind: GateKind, wires: &[usize], angle: f64) -> Result<()> {
        if !angle.is_finite() {
            return Err(Error::NonFinite("gate angle"));
        }
        if wires.len() != kind.arity() || (wires.len() == 2 && wires[0] == wires[1]) {
            return Err(Error::BadWires {
                kind,
                expected: kind.arity(),
                got: wires.to_vec(),
            });
        }
        for &w in wires {
            self.check_wire(w)?;
        }
        match kind.matrix(angle) {
            GateMatrix::One(m) => self.apply_mat2_unchecked(wires[0], &m),
            GateMatrix::Two(m) => self.apply_mat4_unchecked(wires[0], wires[1], &m),
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, wire: usize, pauli: Pauli) -> Result<()> {
        self.check_wire(wire)?;
        self.apply_mat2_unchecked(wire, &pauli.matrix());
        Ok(())
    }

    /// Applies an arbitrary 2×2 operator on `wire`.
    pub fn apply_mat2(&mut self, wire: usize, m: &Mat2) -> Result<()> {
        self.check_wire(wire)?;
        self.apply_mat2_unchecked(wire, m);
        Ok(())
    }

    /// Applies an arbitrary 4×4 operator; `first` is the more significant
    /// local bit.
    pub fn apply_mat4(&mut self, first: usize, second: usize, m: &Mat4) -> Result<()> {
        self.check_wire(first)?;
        self.check_wire(second)?;
        if first == second {
            return Err(Error::BadWires {
                kind: GateKind::CZ,
                expected: 2,
                got: vec![first, second],
            });
        }
        self.apply_mat4_unchecked(first, second, m);
        Ok(())
    }

    /// Large registers go to the rayon kernels when more than one worker is
    /// available.
    fn use_parallel(&self) -> bool {
        cfg!(feature = "parallel") && self.num_qubits >= PARALLEL_MIN_QUBITS && crate::par::threads() > 1
    }

    fn apply_mat2_unchecked(&mut self, wire: usize, m: &Mat2) {
        if self.use_parallel() {
            #[cfg(feature = "parallel")]
            kernels::parallel::mat2(&mut self.amps, wire, m);
        } else {
            kernels::sequential::mat2(&mut self.amps, wire, m);
        }
    }

    fn apply_mat4_unchecked(&mut self, first: usize, second: usize, m: &Mat4) {
        if self.use_parallel() {
            #[cfg(feature = "parallel")]
            kernels::parallel::mat4(&mut self.amps, first, second, m);
        } else {
            kernels::sequential::mat4(&mut self.amps, first, second, m);
        }
    }

    /// Exact ⟨Z⟩ on `qubit`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_wire(qubit)?;
        let mask = 1usize << qubit;
        let mut e = 0.0;
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if k & mask == 0 {
                e += p;
            } else {
                e -= p;
            }
        }
        Ok(e.clamp(-1.0, 1.0))
    }

    /// ⟨Z⟩ on every qubit in one pass over the amplitudes.
    pub fn expectations_z(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_qubits];
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, e) in out.iter_mut().enumerate() {
                if (k >> q) & 1 == 0 {
                    *e += p;
                } else {
                    *e -= p;
                }
            }
        }
        for e in &mut out {
            *e = e.clamp(-1.0, 1.0);
        }
        out
    }
}

/// Index helpers shared by both kernel flavours.
#[inline(always)]
fn insert_zero_bit(i: usize, bit: usize) -> usize {
    let low = i & ((1 << bit) - 1);
    ((i >> bit) << (bit + 1)) | low
}

#[inline(always)]
fn mul2(m: &Mat2, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
}

#[inline(always)]
fn mul4(m: &Mat4, v: [Complex64; 4]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (r, o) in out.iter_mut().enumerate() {
        *o = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
    }
    out
}

/// Basis indices of the four amplitudes touched by group `g`, ordered by
/// local index `(bit(first) << 1) | bit(second)`.
#[inline(always)]
fn quad(g: usize, first: usize, second: usize) -> [usize; 4] {
    let (lo, hi) = if first < second {
        (first, second)
    } else {
        (second, first)
    };
    let base = insert_zero_bit(insert_zero_bit(g, lo), hi);
    let f = 1 << first;
    let s = 1 << second;
    [base, base | s, base | f, base | f | s]
}

pub mod kernels {
    //! In-place gate kernels over strided amplitude groups.

    pub mod sequential {
        use super::super::{mul2, mul4, quad};
        use crate::sim::gate::{Mat2, Mat4};
        use num_complex::Complex64;

        pub fn mat2(amps: &mut [Complex64], wire: usize, m: &Mat2) {
            let stride = 1 << wire;
            for chunk in amps.chunks_mut(stride << 1) {
                let (lo, hi) = chunk.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = mul2(m, *a, *b);
                    *a = x;
                    *b = y;
                }
            }
        }

        pub fn mat4(amps: &mut [Complex64], first: usize, second: usize, m: &Mat4) {
            for g in 0..amps.len() >> 2 {
                let idx = quad(g, first, second);
                let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
                let out = mul4(m, v);
                for (i, o) in idx.iter().zip(out) {
                    amps[*i] = o;
                }
            }
        }
    }

    #[cfg(feature = "parallel")]
    pub mod parallel {
        use super::super::{insert_zero_bit, mul2, mul4, quad};
        use crate::sim::gate::{Mat2, Mat4};
        use num_complex::Complex64;
        use rayon::prelude::*;

        const MIN_LEN: usize = 1 << 11;

        #[derive(Clone, Copy)]
        struct SendPtr(*mut Complex64);
        // SAFETY: each group index maps to a disjoint set of amplitude indices,
        // so concurrent writes through the pointer never alias.
        unsafe impl Send for SendPtr {}
        unsafe impl Sync for SendPtr {}

        impl SendPtr {
            fn get(self) -> *mut Complex64 {
                self.0
            }
        }

        pub fn mat2(amps: &mut [Complex64], wire: usize, m: &Mat2) {
            let ptr = SendPtr(amps.as_mut_ptr());
            let stride = 1 << wire;
            (0..amps.len() >> 1)
                .into_par_iter()
                .with_min_len(MIN_LEN)
                .for_each(|g| {
                    let i = insert_zero_bit(g, wire);
                    let p = ptr.get();
                    // SAFETY: i and i + stride are in bounds and owned by group g.
                    unsafe {
                        let a = p.add(i);
                        let b = p.add(i + stride);
                        let (x, y) = mul2(m, *a, *b);
                        *a = x;
                        *b = y;
                    }
                });
        }

        pub fn mat4(amps: &mut [Complex64], first: usize, second: usize, m: &Mat4) {
            let ptr = SendPtr(amps.as_mut_ptr());
            (0..amps.len() >> 2)
                .into_par_iter()
                .with_min_len(MIN_LEN)
                .for_each(|g| {
                    let idx = quad(g, first, second);
                    let p = ptr.get();
                    // SAFETY: the four indices are in bounds and owned by group g.
                    unsafe {
                        let v = [*p.add(idx[0]), *p.add(idx[1]), *p.add(idx[2]), *p.add(idx[3])];
                        let out = mul4(m, v);
                        for (i, o) in idx.iter().zip(out) {
                            *p.add(*i) = o;
                        }
                    }
                });
        }
    }
}
