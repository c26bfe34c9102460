use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::{stream_rng, Stream};
use crate::sim::{run_circuit, Binding, Circuit, Gate, GateKind, StateVector, MAX_QUBITS};

pub const ROTATION_GATES: usize = 16;
pub const RZZ_GATES: usize = 32;
pub const DEFAULT_REPETITIONS: usize = 50;
/// Default statevector budget: 1 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub qubits: usize,
    pub memory_bytes: u64,
    /// `None` when the statevector would exceed the memory budget.
    pub mean_secs: Option<f64>,
}

/// 16 rotations cycling RX, RY, RZ over the wires, then 32 RZZ gates around
/// the ring, all with random angles.
pub fn benchmark_circuit(num_qubits: usize, seed: u64) -> Result<(Circuit, Vec<f64>)> {
    let n = ROTATION_GATES + RZZ_GATES;
    let mut c = Circuit::new(num_qubits, n, 0)?;
    let kinds = [GateKind::RX, GateKind::RY, GateKind::RZ];
    for i in 0..ROTATION_GATES {
        c.push(Gate::single(kinds[i % 3], i % num_qubits, Binding::Param(i))?)?;
    }
    for j in 0..RZZ_GATES {
        let a = j % num_qubits;
        let b = (a + 1) % num_qubits;
        let binding = Binding::Param(ROTATION_GATES + j);
        if a == b {
            c.push(Gate::single(GateKind::RZ, a, binding)?)?;
        } else {
            c.push(Gate::pair(GateKind::RZZ, a, b, binding)?)?;
        }
    }
    let mut rng = stream_rng(seed, Stream::Custom(0x5ca1e, num_qubits as u64));
    let params = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    Ok((c, params))
}

/// Times `repetitions` noise-free executions per qubit count.
pub fn scaling_bench(qubits: &[usize], repetitions: usize, memory_budget: u64) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(qubits.len());
    for &n in qubits {
        let memory_bytes = StateVector::memory_for(n.min(63));
        if n > MAX_QUBITS || memory_bytes > memory_budget {
            rows.push(ScalingRow {
                qubits: n,
                memory_bytes,
                mean_secs: None,
            });
            continue;
        }
        let (circuit, params) = benchmark_circuit(n, 0)?;
        let mut rng = stream_rng(0, Stream::Custom(0, 0));
        // warm-up
        run_circuit(&circuit, &params, &[], None, &mut rng)?;
        let reps = repetitions.max(1);
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(run_circuit(&circuit, &params, &[], None, &mut rng)?);
        }
        rows.push(ScalingRow {
            qubits: n,
            memory_bytes,
            mean_secs: Some(start.elapsed().as_secs_f64() / reps as f64),
        });
    }
    Ok(rows)
}

pub fn scaling_tsv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("qubits\tmemory_bytes\tmean_secs\n");
    for r in rows {
        let t = r.mean_secs.map_or_else(|| "skipped".to_string(), |s| format!("{s:.6e}"));
        let _ = writeln!(out, "{}\t{}\t{}", r.qubits, r.memory_bytes, t);
    }
    out
}
