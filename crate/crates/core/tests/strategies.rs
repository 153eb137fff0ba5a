//! Distinguisher and spoofer calibration against exact or enumerated oracles.

use rayon::prelude::*;
use vqalab_core::families::*;
use vqalab_core::qsim::*;
use vqalab_core::seed;
use vqalab_core::strategies::*;

/// `prod_{j=0}^{d-1} (1 - 2^{j-t})`: probability that `t` uniform vectors
/// span a `d`-dimensional GF(2) space.
fn span_probability(d: usize, t: usize) -> f64 {
    (0..d).map(|j| 1.0 - 2f64.powi(j as i32 - t as i32)).product()
}

fn xeb_setup(seed: u64) -> (Circuit, Distribution) {
    let fam = random_circuit_family(10, 20, 99).unwrap();
    let c = fam.draw(seed).unwrap().circuit;
    let d = output_distribution(&c).unwrap();
    (c, d)
}

#[test]
fn xeb_honest_and_uniform_scores() {
    let dim = 1024.0;
    let outcomes: Vec<(f64, f64, f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let (_, d) = xeb_setup(i);
            let honest = sample(&d, 10_000, seed::derive(i, 1)).unwrap();
            let (_, uni) = uniform_spoofer(10, 10_000, seed::derive(i, 2)).unwrap();
            let sh = xeb_score_with(&d, &honest).unwrap();
            let su = xeb_score_with(&d, &uni).unwrap();
            // Exact per-circuit mean and standard deviation of p(x) under D_C.
            let mean = d.power_sum(2);
            let sd = ((d.power_sum(3) - mean * mean) / 10_000.0).sqrt();
            (sh, su, mean, sd)
        })
        .collect();
    let mut honest_accept = 0;
    let mut uniform_reject = 0;
    for &(sh, su, mean, sd) in &outcomes {
        assert!((1.5..=2.5).contains(&(sh * dim)), "{}", sh * dim);
        assert!((0.8..=1.2).contains(&(su * dim)), "{}", su * dim);
        assert!((sh - mean).abs() <= 5.0 * sd);
        let t = default_xeb_threshold(10);
        honest_accept += (sh >= t) as usize;
        uniform_reject += (su < t) as usize;
    }
    assert!(honest_accept >= 95 && uniform_reject >= 95);
}

#[test]
fn xeb_null_calibration_over_many_circuits() {
    let mean: f64 = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let (_, d) = xeb_setup(1000 + i);
            let (_, uni) = uniform_spoofer(10, 10_000, i).unwrap();
            xeb_score_with(&d, &uni).unwrap()
        })
        .sum::<f64>()
        / 200.0;
    let scaled = mean * 1024.0;
    assert!((0.95..=1.05).contains(&scaled), "{scaled}");
}

#[test]
fn xeb_game_wrapper_uses_precomputed_distribution() {
    let (c, d) = xeb_setup(3);
    let b = sample(&d, 500, 1).unwrap();
    let with = XebDistinguisher::default()
        .decide(&DistinguisherInput {
            circuit: Some(&c),
            metadata: None,
            exact: Some(&d),
            sampler: None,
            batch: &b,
        })
        .unwrap();
    assert_eq!(with.score, xeb_score(&c, &b).unwrap());
}

fn simon_accept_rate(n: usize, t: usize, trials: u64, honest: bool, base: u64) -> f64 {
    let fam = simon_family(n, base).unwrap();
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let draw = fam.draw(i).unwrap();
            let FamilyMetadata::Simon(inst) = &draw.metadata else { unreachable!() };
            let batch = if honest {
                sample(&output_distribution(&draw.circuit).unwrap(), t, seed::derive(base, i)).unwrap()
            } else {
                uniform_spoofer(n, t, seed::derive(base, i)).unwrap().1
            };
            simon_distinguisher(inst, &batch).unwrap().decision as usize
        })
        .sum();
    hits as f64 / trials as f64
}

#[test]
fn simon_honest_acceptance_matches_span_probability() {
    let rate = simon_accept_rate(8, 16, 4000, true, 1);
    let expect = span_probability(7, 16);
    assert!(expect >= 0.99);
    assert!(rate >= 0.99, "{rate}");
    let sigma = (expect * (1.0 - expect) / 4000.0).sqrt();
    assert!((rate - expect).abs() <= 4.0 * sigma + 1e-3);
}

#[test]
fn simon_rejects_uniform_batches() {
    assert!(simon_accept_rate(8, 16, 2000, false, 2) <= 0.02);
}

/// Exact acceptance probability on uniform batches by exhaustive
/// enumeration of every batch of `t` rows.
fn brute_force_uniform_acceptance(inst: &SimonInstance, t: u32) -> f64 {
    let n = inst.n;
    let size = 1u64 << n;
    let total = size.pow(t);
    let mut hits = 0u64;
    for code in 0..total {
        let mut c = code;
        let rows: Vec<u64> = (0..t)
            .map(|_| {
                let r = c % size;
                c /= size;
                r
            })
            .collect();
        let b = SampleBatch::new(n, rows, "enum", 0).unwrap();
        hits += simon_distinguisher(inst, &b).unwrap().decision as u64;
    }
    hits as f64 / total as f64
}

#[test]
fn simon_soundness_against_exhaustive_oracle() {
    let inst = SimonInstance::generate(4, 0b1011, 7).unwrap();
    let exact = brute_force_uniform_acceptance(&inst, 4);
    // Rows must all lie in s-perp (2^-t) and span it.
    let formula = 2f64.powi(-4) * span_probability(3, 4);
    assert!((exact - formula).abs() < 1e-12, "{exact} vs {formula}");

    let trials = 200_000u64;
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (_, b) = uniform_spoofer(4, 4, seed::derive(77, i)).unwrap();
            simon_distinguisher(&inst, &b).unwrap().decision as usize
        })
        .sum();
    let rate = hits as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((rate - exact).abs() <= 4.0 * sigma, "{rate} vs {exact}");
}

#[test]
fn simon_soundness_bound_across_sizes() {
    for n in 4..=10 {
        let rate = simon_accept_rate(n, 2 * n, 10_000, false, 30 + n as u64);
        assert!(rate <= 2f64.powi(-(n as i32 - 2)), "n={n}: {rate}");
    }
}

#[test]
fn battery_null_and_power() {
    let diff: usize = (0..300u64)
        .into_par_iter()
        .map(|i| {
            let (_, a) = uniform_spoofer(6, 10_000, seed::derive(5, 2 * i)).unwrap();
            let (_, b) = uniform_spoofer(6, 10_000, seed::derive(5, 2 * i + 1)).unwrap();
            let da = battery_distinguisher(&a, None).unwrap().decision;
            let db = battery_distinguisher(&b, None).unwrap().decision;
            (da != db) as usize
        })
        .sum();
    assert!(diff as f64 / 300.0 <= 0.06);

    let detected = (0..300u64)
        .filter(|&i| {
            let (_, u) = uniform_spoofer(6, 100, i).unwrap();
            let p = SampleBatch::new(6, vec![17; 100], "point", i).unwrap();
            battery_distinguisher(&u, None).unwrap().decision != battery_distinguisher(&p, None).unwrap().decision
        })
        .count();
    assert!(detected as f64 / 300.0 >= 0.99);
}

#[test]
fn battery_calibrated_against_circuit_reference() {
    let fam = random_circuit_family(6, 6, 8).unwrap();
    let flagged: usize = (0..400u64)
        .into_par_iter()
        .map(|i| {
            let d = output_distribution(&fam.draw(i % 20).unwrap().circuit).unwrap();
            let b = sample(&d, 2000, i).unwrap();
            Battery::default().run(&b, Some(&d), true).unwrap().decision as usize
        })
        .sum();
    let rate = flagged as f64 / 400.0;
    let sigma = (DEFAULT_BATTERY_ALPHA / 400.0).sqrt();
    assert!(rate <= DEFAULT_BATTERY_ALPHA + 3.0 * sigma + 0.005, "{rate}");
}

#[test]
fn distinct_uniform_coordinates_are_uniform() {
    let runs = 10_000u64;
    let n = 5;
    let mut counts = vec![[0u64; 2]; n];
    for i in 0..runs {
        let (_, b) = distinct_uniform_spoofer(n, 8, i).unwrap();
        let mut s = b.samples.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 8);
        for (bit, c) in counts.iter_mut().enumerate() {
            c[((b.samples[0] >> bit) & 1) as usize] += 1;
        }
    }
    // Chi-squared with one degree of freedom at the 1e-4 level.
    for c in counts {
        let e = runs as f64 / 2.0;
        let chi2 = c.iter().map(|&o| (o as f64 - e).powi(2) / e).sum::<f64>();
        assert!(chi2 < 15.1, "{chi2}");
    }
}

#[test]
fn omniscient_matches_honest_statistics() {
    let (c, d) = xeb_setup(7);
    let (desc, omni) = omniscient_spoofer(&c, 10_000, 1).unwrap();
    assert_eq!(desc.size, c.size());
    let honest = sample(&d, 10_000, 2).unwrap();
    let so = xeb_score_with(&d, &omni).unwrap();
    let sh = xeb_score_with(&d, &honest).unwrap();
    let sd = ((d.power_sum(3) - d.power_sum(2).powi(2)) / 10_000.0).sqrt();
    assert!((so - sh).abs() <= 3.0 * std::f64::consts::SQRT_2 * sd);

    let fam = simon_family(6, 3).unwrap();
    let mut omni_hits = 0;
    let mut honest_hits = 0;
    for i in 0..500u64 {
        let draw = fam.draw(i).unwrap();
        let FamilyMetadata::Simon(inst) = &draw.metadata else { unreachable!() };
        let (_, o) = omniscient_spoofer(&draw.circuit, 12, i).unwrap();
        let h = sample(&output_distribution(&draw.circuit).unwrap(), 12, i + 10_000).unwrap();
        omni_hits += simon_distinguisher(inst, &o).unwrap().decision as i32;
        honest_hits += simon_distinguisher(inst, &h).unwrap().decision as i32;
    }
    let p = span_probability(5, 12);
    let sigma = (p * (1.0 - p) / 500.0).sqrt() * 500.0;
    assert!(((omni_hits - honest_hits) as f64).abs() <= 3.0 * std::f64::consts::SQRT_2 * sigma + 1.0);
}

#[test]
fn spoofer_specs_round_trip() {
    let specs = vec![
        SpooferSpec::Uniform,
        SpooferSpec::DistinctUniform,
        SpooferSpec::Omniscient,
        SpooferSpec::PointMass { x: 3 },
    ];
    for s in specs {
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SpooferSpec>(&text).unwrap(), s);
    }
    let d: DistinguisherSpec = serde_json::from_str(r#"{"kind":"xeb","threshold":0.001}"#).unwrap();
    assert_eq!(d.name(), "xeb");
    assert!(serde_json::from_str::<DistinguisherSpec>(r#"{"kind":"xeb","bogus":1}"#).is_err());
}
