//! Sampler enumeration and the brute-force sample-MCSP solver against a
//! raw enumeration oracle that keeps every gate sequence.

use std::collections::BTreeSet;
use vqalab_core::mcsp::*;
use vqalab_core::qsim::SampleBatch;
use vqalab_core::strategies::uniform_spoofer;
use vqalab_core::Error;

/// Count vectors of every sampler with at most `size` gates, built without
/// any canonicalisation: all gate choices, all operand pairs, all output tuples.
fn raw_count_vectors(n: usize, r: usize, size: usize) -> BTreeSet<Vec<u32>> {
    let rows = 1usize << r;
    let base: Vec<Vec<bool>> = std::iter::once(vec![false; rows])
        .chain((0..r).map(|i| (0..rows).map(|z| (z >> i) & 1 == 1).collect()))
        .collect();
    let mut out = BTreeSet::new();
    let mut stack = vec![base];
    while let Some(wires) = stack.pop() {
        let w = wires.len();
        let mut idx = vec![0usize; n];
        loop {
            let mut counts = vec![0u32; 1 << n];
            for z in 0..rows {
                let x: usize = idx.iter().enumerate().map(|(j, &o)| (wires[o][z] as usize) << j).sum();
                counts[x] += 1;
            }
            out.insert(counts);
            let mut j = 0;
            while j < n {
                idx[j] += 1;
                if idx[j] < w {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
        if w - 1 - r == size {
            continue;
        }
        for a in 0..w {
            let mut push = |f: &dyn Fn(usize) -> bool| {
                let mut next = wires.clone();
                next.push((0..rows).map(f).collect());
                stack.push(next);
            };
            push(&|z| !wires[a][z]);
            for b in 0..w {
                push(&|z| wires[a][z] & wires[b][z]);
                push(&|z| wires[a][z] | wires[b][z]);
                push(&|z| wires[a][z] ^ wires[b][z]);
            }
        }
    }
    out
}

fn enumerated(n: usize, r: usize, size: usize) -> Vec<MicroSampler> {
    enumerate_samplers(n, r, size).unwrap().collect()
}

#[test]
fn single_bit_base_cases() {
    let zero = enumerated(1, 1, 0);
    let counts: Vec<_> = zero.iter().map(|s| s.counts()).collect();
    assert_eq!(counts, vec![vec![2, 0], vec![1, 1]]);
    assert!(zero.iter().all(|s| s.size() == 0));

    let one = enumerated(1, 1, 1);
    assert_eq!(one.len(), raw_count_vectors(1, 1, 1).len());
    assert_eq!(one.len(), 3);
}

#[test]
fn enumeration_matches_raw_oracle() {
    for (n, r, size) in [(1, 1, 2), (1, 2, 2), (2, 1, 2), (2, 2, 2), (1, 3, 2), (2, 2, 3), (3, 2, 1)] {
        let got = enumerated(n, r, size);
        let set: BTreeSet<Vec<u32>> = got.iter().map(|s| s.counts()).collect();
        assert_eq!(set.len(), got.len(), "duplicate at {n},{r},{size}");
        assert_eq!(set, raw_count_vectors(n, r, size), "{n},{r},{size}");
        assert!(got.windows(2).all(|w| w[0].size() <= w[1].size()));
        for s in &got {
            assert!(s.size() <= size);
            s.validate().unwrap();
            let mut resim = vec![0u32; 1 << n];
            for z in 0..1u64 << r {
                resim[s.eval(z) as usize] += 1;
            }
            assert_eq!(resim, s.counts());
        }
    }
}

#[test]
fn refusals_carry_estimates() {
    assert!(matches!(enumerate_samplers(5, 2, 1), Err(Error::BudgetExceeded { .. })));
    assert!(enumerate_samplers(2, 7, 1).is_err());
    assert!(enumerate_samplers(2, 2, 6).is_err());
    assert!(enumerate_samplers_with_budget(3, 3, 3, 10.0).is_err());
    assert!(estimate_enumeration(3, 3, 3) > 10.0);
}

fn params(r: usize, size: usize, tol: f64) -> McspParams {
    McspParams {
        random_bits: r,
        size_bound: size,
        tolerance: tol,
        variant: McspVariant::Described,
    }
}

fn batch(n: usize, rows: Vec<u64>) -> SampleBatch {
    SampleBatch::new(n, rows, "test", 0).unwrap()
}

#[test]
fn solver_examples() {
    let v = samp_mcsp_bruteforce(&batch(1, vec![0; 50]), &params(1, 1, 0.0)).unwrap();
    assert_eq!(v.answer, McspAnswer::Yes);
    assert_eq!(v.achieved_distance, 0.0);
    assert_eq!(v.witness.as_ref().unwrap().counts(), vec![2, 0]);
    assert_eq!(v.witness.unwrap().size(), 0);

    let xor = MicroSampler {
        r: 2,
        gates: vec![McspGate::Xor { a: 1, b: 2 }],
        outputs: vec![3],
    };
    let exact: Vec<u64> = (0..4).map(|z| xor.eval(z)).collect();
    let v = samp_mcsp_bruteforce(&batch(1, exact), &params(2, 1, 0.0)).unwrap();
    assert_eq!(v.answer, McspAnswer::Yes);
    assert_eq!(v.witness.unwrap().size(), 0);

    let rows: Vec<u64> = (0..100).map(|i| (i >= 75) as u64).collect();
    let v = samp_mcsp_bruteforce(&batch(1, rows.clone()), &params(2, 1, 0.05)).unwrap();
    assert_eq!(v.answer, McspAnswer::Yes);
    let w = v.witness.unwrap();
    assert_eq!(w.counts(), vec![3, 1]);
    assert_eq!(w.size(), 1);
    assert_eq!(samp_mcsp_bruteforce(&batch(1, rows), &params(2, 0, 0.05)).unwrap().answer, McspAnswer::No);
}

#[test]
fn verifier_examples() {
    let (_, u) = uniform_spoofer(2, 10_000, 3).unwrap();
    assert!(!universal_verifier(&u, 1, 0.05, 2).unwrap());
    assert!(!universal_verifier(&batch(2, vec![]), 0, 0.0, 2).unwrap());

    // Frequencies 1..8 over 36 draws; every outcome has a different weight.
    let rows: Vec<u64> = (0..8u64).flat_map(|x| std::iter::repeat_n(x, x as usize + 1)).collect();
    let b = batch(3, rows);
    assert!(universal_verifier(&b, 1, 0.01, 3).unwrap());
    let best = raw_count_vectors(3, 3, 1)
        .into_iter()
        .map(|c| {
            0.5 * c
                .iter()
                .enumerate()
                .map(|(x, &k)| ((x + 1) as f64 / 36.0 - k as f64 / 8.0).abs())
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best > 0.01, "{best}");
    let v = samp_mcsp_bruteforce(&b, &params(3, 1, 0.01)).unwrap();
    assert!((v.achieved_distance - best).abs() < 1e-12);
}

#[test]
fn larger_bounds_never_lose_witnesses() {
    let rows: Vec<u64> = (0..64).map(|i| [0, 1, 1, 3][i % 4] as u64).collect();
    let mut prev = McspAnswer::No;
    for size in 0..=3 {
        let a = samp_mcsp_bruteforce(&batch(2, rows.clone()), &params(2, size, 0.0)).unwrap().answer;
        assert!(!(prev == McspAnswer::Yes && a == McspAnswer::No));
        prev = a;
    }
    assert_eq!(prev, McspAnswer::Yes);
}

#[test]
fn planted_sampler_is_recovered() {
    let planted = MicroSampler {
        r: 3,
        gates: vec![McspGate::And { a: 1, b: 2 }, McspGate::Xor { a: 4, b: 3 }],
        outputs: vec![5, 1],
    };
    let exact: Vec<u64> = (0..8).map(|z| planted.eval(z)).collect();
    let v = samp_mcsp_bruteforce(&batch(2, exact), &params(3, 2, 0.0)).unwrap();
    assert_eq!(v.answer, McspAnswer::Yes);
    let w = v.witness.unwrap();
    assert!(w.size() <= planted.size());
    assert_eq!(w.counts(), planted.counts());

    let sampled = planted.sample(20_000, 9).unwrap();
    let v = samp_mcsp_bruteforce(&sampled, &params(3, 2, 0.02)).unwrap();
    assert_eq!(v.answer, McspAnswer::Yes);
    assert!(v.achieved_distance <= 0.02);
}

#[test]
fn netlist_and_json_round_trip() {
    for s in enumerated(2, 2, 2) {
        assert_eq!(s.to_string().parse::<MicroSampler>().unwrap(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<MicroSampler>(&json).unwrap(), s);
    }
    let v = serde_json::to_value(McspAnswer::Yes).unwrap();
    assert_eq!(v, "YES");
}
