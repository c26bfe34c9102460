#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnn_core::data::Sample;
use qnn_core::sim::{Binding, Circuit, Gate, GateKind};

/// Random circuit with up to `max_param_gates` parametric gates drawing from
/// fewer parameters than gates, so some parameters are shared. Every
/// parameter is used at least once.
pub fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_param_gates: usize) -> Circuit {
    let n = rng.random_range(1..=max_qubits);
    let gates = rng.random_range(1..=max_param_gates);
    let params = rng.random_range(1..=gates);
    let features = 2;
    let mut c = Circuit::new(n, params, features).unwrap();
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| k.is_parametric() && (n > 1 || k.arity() == 1))
        .collect();
    for f in 0..features {
        c.push(Gate::single(GateKind::RY, f % n, Binding::Feature(f)).unwrap()).unwrap();
    }
    for g in 0..gates {
        let kind = kinds[rng.random_range(0..kinds.len())];
        let p = if g < params { g } else { rng.random_range(0..params) };
        let a = rng.random_range(0..n);
        let gate = if kind.arity() == 1 {
            Gate::single(kind, a, Binding::Param(p))
        } else {
            let b = (a + rng.random_range(1..n)) % n;
            Gate::pair(kind, a, b, Binding::Param(p))
        }
        .unwrap();
        c.push(gate).unwrap();
        if n > 1 && rng.random_bool(0.2) {
            let a = rng.random_range(0..n - 1);
            c.push(Gate::cz(a, a + 1).unwrap()).unwrap();
        }
    }
    c
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Two well-separated clusters in `features` dimensions.
pub fn toy_samples(count: usize, features: usize, seed: u64) -> Vec<Sample> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let label = i % 2;
            let centre = if label == 0 { 0.3 } else { 2.6 };
            Sample {
                features: (0..features).map(|_| centre + r.random_range(-0.3..0.3)).collect(),
                label,
            }
        })
        .collect()
}

/// Dataset root for tests that need the real files: `QNN_DATA_ROOT` or the
/// workspace `data/` directory. `None` (with a notice) when absent.
pub fn data_root(task: qnn_core::data::Task) -> Option<std::path::PathBuf> {
    let root = std::env::var_os("QNN_DATA_ROOT")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    if qnn_core::data::available(&root, task) {
        Some(root)
    } else {
        eprintln!("skipping: {task} data not found under {} (run scripts/fetch_data.py)", root.display());
        None
    }
}
