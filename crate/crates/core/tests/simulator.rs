use num_complex::Complex64;
use proptest::prelude::*;
use qnn_core::sim::{kernels, GateKind, GateMatrix, StateVector};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn pauli(name: char) -> [[C; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match name {
        'I' => [[o, z], [z, o]],
        'X' => [[z, o], [o, z]],
        'Y' => [[z, -i], [i, z]],
        'Z' => [[o, z], [z, -o]],
        _ => unreachable!(),
    }
}

/// Pauli letters of each gate's generator, in wire order.
fn generator(kind: GateKind) -> &'static str {
    match kind {
        GateKind::RX => "X",
        GateKind::RY => "Y",
        GateKind::RZ => "Z",
        GateKind::RXX => "XX",
        GateKind::RYY => "YY",
        GateKind::RZZ => "ZZ",
        GateKind::RZX => "ZX",
        GateKind::CZ => "",
    }
}

/// Full 2^n × 2^n operator of `kind` on `wires`, assembled element by element
/// from Pauli tensor products (qubit 0 is the least significant bit).
fn dense(kind: GateKind, wires: &[usize], angle: f64, n: usize) -> Vec<Vec<C>> {
    let dim = 1 << n;
    let local = |out: usize, inp: usize| -> C {
        // out/inp are local indices with wires[0] as the high bit
        if kind == GateKind::CZ {
            return if out != inp {
                c(0.0, 0.0)
            } else if out == 3 {
                c(-1.0, 0.0)
            } else {
                c(1.0, 0.0)
            };
        }
        let letters: Vec<char> = generator(kind).chars().collect();
        let k = letters.len();
        let mut p = c(1.0, 0.0);
        let mut id = c(1.0, 0.0);
        for (j, &l) in letters.iter().enumerate() {
            let shift = k - 1 - j;
            let (ob, ib) = ((out >> shift) & 1, (inp >> shift) & 1);
            p *= pauli(l)[ob][ib];
            id *= pauli('I')[ob][ib];
        }
        let (s, co) = (angle / 2.0).sin_cos();
        id * co + c(0.0, -s) * p
    };
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for (row, mrow) in m.iter_mut().enumerate() {
        for (col, entry) in mrow.iter_mut().enumerate() {
            let others_equal = (0..n).filter(|q| !wires.contains(q)).all(|q| (row >> q) & 1 == (col >> q) & 1);
            if !others_equal {
                continue;
            }
            let idx = |b: usize| wires.iter().fold(0, |acc, &w| (acc << 1) | ((b >> w) & 1));
            *entry = local(idx(row), idx(col));
        }
    }
    m
}

fn matvec(m: &[Vec<C>], v: &[C]) -> Vec<C> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn random_state(n: usize, seed: u64) -> StateVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C> = (0..1 << n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = GateKind> {
    prop::sample::select(GateKind::ALL.to_vec())
}

/// Gate kind plus distinct wires for an `n`-qubit register.
fn placed_gate(n: usize) -> impl Strategy<Value = (GateKind, Vec<usize>)> {
    kind_strategy().prop_flat_map(move |k| {
        let wires = prop::sample::subsequence((0..n).collect::<Vec<_>>(), k.arity()).prop_shuffle();
        (Just(k), wires)
    })
}

fn close(a: &[C], b: &[C], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernels_match_dense_operator(
        n in 2usize..=5,
        seed in any::<u64>(),
        angle in -10.0f64..10.0,
        g in (2usize..=5).prop_flat_map(placed_gate),
    ) {
        let (kind, wires) = g;
        prop_assume!(wires.iter().all(|&w| w < n));
        let mut s = random_state(n, seed);
        let want = matvec(&dense(kind, &wires, angle, n), s.amplitudes());
        s.apply(kind, &wires, angle).unwrap();
        prop_assert!(close(s.amplitudes(), &want, 1e-12));
    }

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), g in placed_gate(4), angle in -10.0f64..10.0) {
        let mut s = random_state(4, seed);
        s.apply(g.0, &g.1, angle).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_matrices_are_unitary(kind in kind_strategy(), angle in -10.0f64..10.0) {
        let m: Vec<Vec<C>> = match kind.matrix(angle) {
            GateMatrix::One(m) => m.iter().map(|r| r.to_vec()).collect(),
            GateMatrix::Two(m) => m.iter().map(|r| r.to_vec()).collect(),
        };
        let d = m.len();
        for i in 0..d {
            for j in 0..d {
                let dot: C = (0..d).map(|k| m[i][k] * m[j][k].conj()).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rotations_compose_additively(
        seed in any::<u64>(),
        g in placed_gate(3),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        prop_assume!(g.0 != GateKind::CZ);
        let mut two = random_state(3, seed);
        let mut one = two.clone();
        two.apply(g.0, &g.1, a).unwrap();
        two.apply(g.0, &g.1, b).unwrap();
        one.apply(g.0, &g.1, a + b).unwrap();
        prop_assert!(close(one.amplitudes(), two.amplitudes(), 1e-12));
    }

    #[test]
    fn inverse_angle_undoes_gate(seed in any::<u64>(), g in placed_gate(3), a in -5.0f64..5.0) {
        let original = random_state(3, seed);
        let mut s = original.clone();
        s.apply(g.0, &g.1, a).unwrap();
        s.apply(g.0, &g.1, -a).unwrap();
        prop_assert!(close(s.amplitudes(), original.amplitudes(), 1e-12));
    }

    #[test]
    fn expectations_stay_in_range(seed in any::<u64>()) {
        let s = random_state(4, seed);
        for e in s.expectations_z() {
            prop_assert!((-1.0..=1.0).contains(&e));
        }
    }
}

#[test]
fn sequential_kernels_match_dense_on_wide_registers() {
    let n = 6;
    let base = random_state(n, 11);
    for kind in GateKind::ALL {
        for wires in [vec![5, 0], vec![2, 4], vec![3]] {
            if wires.len() != kind.arity() {
                continue;
            }
            let want = matvec(&dense(kind, &wires, 0.7, n), base.amplitudes());
            let mut amps = base.amplitudes().to_vec();
            match kind.matrix(0.7) {
                GateMatrix::One(m) => kernels::sequential::mat2(&mut amps, wires[0], &m),
                GateMatrix::Two(m) => kernels::sequential::mat4(&mut amps, wires[0], wires[1], &m),
            }
            assert!(close(&amps, &want, 1e-12), "{kind} {wires:?}");
        }
    }
}

#[test]
fn memory_is_sixteen_bytes_per_amplitude() {
    for n in [1, 4, 10, 16] {
        let s = StateVector::zero(n).unwrap();
        assert_eq!(s.memory_bytes() as u64, 16u64 << n);
        assert_eq!(StateVector::memory_for(n), 16u64 << n);
    }
    assert_eq!(StateVector::memory_for(20), 16 << 20);
}
