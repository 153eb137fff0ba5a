//! Simulator checks against a dense-matrix oracle and the measurement-model
//! invariants.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use vqalab_core::qsim::*;

/// Full 2^n x 2^n matrix of a gate, built from basis-state action only.
fn dense_gate(g: &Gate, n: usize) -> DMatrix<C> {
    let dim = 1usize << n;
    let bit = |x: usize, q: usize| (x >> q) & 1;
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let local1 = |m: [[C; 2]; 2], q: usize| {
        DMatrix::from_fn(dim, dim, |r, c| {
            if (r ^ c) & !(1 << q) != 0 {
                z
            } else {
                m[bit(r, q)][bit(c, q)]
            }
        })
    };
    match g {
        Gate::H(q) => local1([[s.into(), s.into()], [s.into(), (-s).into()]], *q),
        Gate::X(q) => local1([[z, one], [one, z]], *q),
        Gate::Y(q) => local1([[z, C::new(0.0, -1.0)], [C::new(0.0, 1.0), z]], *q),
        Gate::Z(q) => local1([[one, z], [z, -one]], *q),
        Gate::S(q) => local1([[one, z], [z, C::new(0.0, 1.0)]], *q),
        Gate::T(q) => local1([[one, z], [z, C::from_polar(1.0, std::f64::consts::PI / 4.0)]], *q),
        Gate::Phase { target, theta } => local1([[one, z], [z, C::from_polar(1.0, *theta)]], *target),
        Gate::Unitary1 { target, matrix } => local1(*matrix, *target),
        Gate::Cnot { control, target } => DMatrix::from_fn(dim, dim, |r, c| {
            let image = if bit(c, *control) == 1 { c ^ (1 << target) } else { c };
            if r == image { one } else { z }
        }),
        Gate::Cz(a, b) => DMatrix::from_fn(dim, dim, |r, c| {
            if r != c {
                z
            } else if bit(c, *a) & bit(c, *b) == 1 {
                -one
            } else {
                one
            }
        }),
        Gate::Swap(a, b) => DMatrix::from_fn(dim, dim, |r, c| {
            let mut image = c & !(1 << a) & !(1 << b);
            image |= bit(c, *a) << b;
            image |= bit(c, *b) << a;
            if r == image { one } else { z }
        }),
        Gate::Unitary2 { targets, matrix } => DMatrix::from_fn(dim, dim, |r, c| {
            let mask = (1 << targets[0]) | (1 << targets[1]);
            if (r ^ c) & !mask != 0 {
                return z;
            }
            let li = |x: usize| bit(x, targets[0]) + 2 * bit(x, targets[1]);
            matrix[li(r)][li(c)]
        }),
        Gate::Oracle { inputs, outputs, table } => DMatrix::from_fn(dim, dim, |r, c| {
            let x: usize = inputs.iter().enumerate().map(|(j, &q)| bit(c, q) << j).sum();
            let mut image = c;
            for (j, &q) in outputs.iter().enumerate() {
                image ^= (((table[x] >> j) & 1) as usize) << q;
            }
            if r == image { one } else { z }
        }),
        Gate::PhaseOracle { targets, phases } => DMatrix::from_fn(dim, dim, |r, c| {
            if r != c {
                return z;
            }
            let x: usize = targets.iter().enumerate().map(|(j, &q)| bit(c, q) << j).sum();
            C::from_polar(1.0, phases[x])
        }),
    }
}

fn dense_state(c: &Circuit) -> Vec<C> {
    let dim = 1usize << c.num_qubits;
    let mut v = nalgebra::DVector::<C>::zeros(dim);
    v[0] = C::new(1.0, 0.0);
    for g in &c.gates {
        v = dense_gate(g, c.num_qubits) * v;
    }
    v.iter().copied().collect()
}

fn euler(a: f64, b: f64, c: f64) -> Matrix2 {
    // Rz(a) Ry(b) Rz(c) with a global phase.
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    [
        [C::from_polar(cb, -(a + c) / 2.0), -C::from_polar(sb, (c - a) / 2.0)],
        [C::from_polar(sb, (a - c) / 2.0), C::from_polar(cb, (a + c) / 2.0)],
    ]
}

fn kron_cnot(a: Matrix2, b: Matrix2) -> Matrix4 {
    // CNOT(control = local bit 0) * (b on local bit 1 (x) a on local bit 0).
    let mut k = [[C::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            k[r][c] = a[r & 1][c & 1] * b[r >> 1][c >> 1];
        }
    }
    let perm = |i: usize| if i & 1 == 1 { i ^ 2 } else { i };
    let mut out = k;
    for r in 0..4 {
        out[perm(r)] = k[r];
    }
    out
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let angle = -3.2f64..3.2;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::Y),
        q.clone().prop_map(Gate::Z),
        q.clone().prop_map(Gate::S),
        q.clone().prop_map(Gate::T),
        (q.clone(), angle.clone()).prop_map(|(target, theta)| Gate::Phase { target, theta }),
        (q.clone(), angle.clone(), angle.clone(), angle.clone())
            .prop_map(|(t, a, b, c)| Gate::unitary1(t, euler(a, b, c)).unwrap()),
        (q.clone(), 1..n).prop_map(move |(a, d)| Gate::Cnot { control: a, target: (a + d) % n }),
        (q.clone(), 1..n).prop_map(move |(a, d)| Gate::Cz(a, (a + d) % n)),
        (q.clone(), 1..n).prop_map(move |(a, d)| Gate::Swap(a, (a + d) % n)),
        (q.clone(), 1..n, prop::array::uniform6(angle.clone())).prop_map(move |(a, d, t)| {
            let m = kron_cnot(euler(t[0], t[1], t[2]), euler(t[3], t[4], t[5]));
            Gate::unitary2(a, (a + d) % n, m).unwrap()
        }),
        (q.clone(), 1..n, prop::collection::vec(0u64..2, 2))
            .prop_map(move |(a, d, table)| Gate::Oracle { inputs: vec![a], outputs: vec![(a + d) % n], table }),
        (q, 1..n, prop::collection::vec(angle, 4))
            .prop_map(move |(a, d, phases)| Gate::PhaseOracle { targets: vec![a, (a + d) % n], phases }),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec(gate_strategy(n), 0..25).prop_map(move |g| Circuit::with_gates(n, g))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matches_dense_oracle(c in circuit_strategy()) {
        let s = run_circuit(&c).unwrap();
        let d = dense_state(&c);
        for (a, b) in s.amplitudes().iter().zip(&d) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_round_trip(c in circuit_strategy()) {
        let round = c.then(&c.inverse()).unwrap();
        let s = run_circuit(&round).unwrap();
        prop_assert!((s.amplitudes()[0] - C::new(1.0, 0.0)).norm() < 1e-8);
        for a in &s.amplitudes()[1..] {
            prop_assert!(a.norm() < 1e-8);
        }
    }

    #[test]
    fn norm_preserved_per_gate(c in circuit_strategy()) {
        let mut s = StateVector::zero(c.num_qubits).unwrap();
        for g in &c.gates {
            s.apply(g).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip(c in circuit_strategy()) {
        let text = c.to_json().unwrap();
        let back = Circuit::from_json(&text).unwrap();
        let (a, b) = (run_circuit(&c).unwrap(), run_circuit(&back).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn diagonal_trace_distance_is_tvd(
        n in 1usize..=5,
        w in prop::collection::vec(0.0f64..1.0, 64),
        v in prop::collection::vec(0.0f64..1.0, 64),
    ) {
        let len = 1 << n;
        let d0 = Distribution::from_weights(n, w[..len].iter().map(|x| x + 1e-3).collect()).unwrap();
        let d1 = Distribution::from_weights(n, v[..len].iter().map(|x| x + 1e-3).collect()).unwrap();
        let td = trace_distance(&diagonal_density(&d0).unwrap(), &diagonal_density(&d1).unwrap()).unwrap();
        let tvd = total_variation_distance(&d0, &d1).unwrap();
        prop_assert!((td - tvd).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_symmetric_and_triangle(
        a in circuit_strategy(), b in circuit_strategy(), c in circuit_strategy(), mix in 0.0f64..1.0
    ) {
        // Mixed states: convex blends of a pure state with a dephased one,
        // truncated to the first two qubits' reduced states.
        let state = |x: &Circuit| {
            let s = run_circuit(x).unwrap();
            let pure = reduced_density(&s, &[0, 1]).unwrap();
            let diag = diagonal_density(&output_distribution(x).unwrap().marginal(&[0, 1]).unwrap()).unwrap();
            DensityMatrix::new(pure.matrix() * C::new(mix, 0.0) + diag.matrix() * C::new(1.0 - mix, 0.0)).unwrap()
        };
        let (ra, rb, rc) = (state(&a), state(&b), state(&c));
        let ab = trace_distance(&ra, &rb).unwrap();
        prop_assert!((ab - trace_distance(&rb, &ra).unwrap()).abs() < 1e-12);
        let bc = trace_distance(&rb, &rc).unwrap();
        let ac = trace_distance(&ra, &rc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-8);
    }
}

#[test]
fn bell_state_matches_dense_product() {
    let bell = Circuit::with_gates(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]);
    let d = dense_state(&bell);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let expect = [r, 0.0, 0.0, r];
    for (a, e) in d.iter().zip(expect) {
        assert!((a - C::new(e, 0.0)).norm() < 1e-12);
    }
    let dist = output_distribution(&bell).unwrap();
    for (p, e) in dist.probs().iter().zip([0.5, 0.0, 0.0, 0.5]) {
        assert!((p - e).abs() < 1e-12);
    }
}

#[test]
fn pure_state_trace_distance_closed_form() {
    // sqrt(1 - |<psi|phi>|^2) for pure states, checked on a rotation sweep.
    for k in 0..16 {
        let theta = k as f64 * 0.2;
        let a = run_circuit(&Circuit::new(1)).unwrap();
        let b = run_circuit(&Circuit::with_gates(1, vec![Gate::unitary1(0, euler(0.3, theta, -0.1)).unwrap()])).unwrap();
        let overlap = a.inner(&b).unwrap().norm_sqr();
        let td = trace_distance(&DensityMatrix::from_pure(&a).unwrap(), &DensityMatrix::from_pure(&b).unwrap()).unwrap();
        assert!((td - (1.0 - overlap).sqrt()).abs() < 1e-9, "theta={theta}");
    }
}

#[test]
fn sampling_matches_exact_distribution() {
    // n <= 8, 10^6 samples, TVD <= 0.01.
    let mut c = Circuit::new(6);
    for q in 0..6 {
        c.push(Gate::H(q));
        c.push(Gate::T(q));
    }
    for q in 0..5 {
        c.push(Gate::Cnot { control: q, target: q + 1 });
        c.push(Gate::unitary1(q, euler(0.4 * q as f64, 1.1, 0.7)).unwrap());
    }
    let exact = output_distribution(&c).unwrap();
    let batch = sample(&exact, 1_000_000, 2024).unwrap();
    let tvd = total_variation_distance(&exact, &batch.empirical().unwrap()).unwrap();
    assert!(tvd <= 0.01, "tvd {tvd}");
}

#[test]
fn measured_subregister_marginalizes() {
    let c = Circuit::with_gates(3, vec![Gate::H(0), Gate::X(2)]).measuring(vec![2, 0]);
    let d = output_distribution(&c).unwrap();
    assert_eq!(d.num_bits(), 2);
    // Outcome bit 0 is qubit 2 (always 1), bit 1 is qubit 0 (uniform).
    assert!((d.prob(0b01) - 0.5).abs() < 1e-12);
    assert!((d.prob(0b11) - 0.5).abs() < 1e-12);
    assert!((amplitude_probability(&c, "11").unwrap() - 0.5).abs() < 1e-12);
}
