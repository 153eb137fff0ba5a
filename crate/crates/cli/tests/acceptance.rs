//! Acceptance suite: eleven criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout.
//! Config-driven criteria execute the shipped configs through the same
//! library path as `vqalab run`, first on one worker; criterion 11 repeats
//! them on eight workers and compares the summary CSV bytes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use vqalab_cli::{load_config, run_config, ExperimentOutput, RunOptions};
use vqalab_core::cryptocheck::{efi_statistical_farness, EfiCandidate, EfiGenerator};
use vqalab_core::families::{
    family_mixture_distribution, finite_family, phase_prs_family, random_circuit_family, simon_family,
};
use vqalab_core::qsim::{run_circuit, total_variation_distance};
use vqalab_core::{seed, Circuit, CircuitFamily, Distribution, Gate};

type Outcome = Result<String, String>;

struct Ctx {
    tmp: tempfile::TempDir,
    /// `(config, summary.csv bytes at one worker)` per config-driven criterion.
    csvs: Vec<(PathBuf, Vec<u8>)>,
    bridge_at_one: Option<Vec<u64>>,
    mixture_at_one: Option<Vec<u64>>,
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

impl Ctx {
    fn run(&mut self, name: &str, workers: usize) -> Result<(ExperimentOutput, Vec<u8>), String> {
        let path = config_path(name);
        let config = load_config(&path).map_err(|e| e.to_string())?;
        let out_dir = self.tmp.path().join(format!("{name}-{workers}"));
        let opts = RunOptions {
            workers: Some(workers),
            out_dir: Some(out_dir.clone()),
            ..Default::default()
        };
        let outcome = run_config(config, &opts).map_err(|e| e.to_string())?;
        let csv = std::fs::read(out_dir.join("summary.csv")).map_err(|e| e.to_string())?;
        Ok((outcome.output, csv))
    }

    fn run_recorded(&mut self, name: &str) -> Result<ExperimentOutput, String> {
        let (out, csv) = self.run(name, 1)?;
        self.csvs.push((config_path(name), csv));
        Ok(out)
    }
}

fn metric(out: &ExperimentOutput, name: &str) -> Result<f64, String> {
    out.get(name).ok_or_else(|| format!("missing metric `{name}`"))
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simon_demo(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("simon-vqa.json")?;
    let honest = metric(&out, "quantum_decision_rate")?;
    let spoof = metric(&out, "classical_decision_rate")?;
    let adv = metric(&out, "advantage")?;
    verdict(
        honest >= 0.99 && spoof <= 0.05 && adv >= 0.9,
        format!("honest {honest:.4}, uniform {spoof:.4}, advantage {adv:.4}"),
    )
}

fn xeb_anchors(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("xeb.json")?;
    let h = metric(&out, "mean_honest_scaled")?;
    let u = metric(&out, "mean_uniform_scaled")?;
    verdict(
        (1.5..=2.5).contains(&h) && (0.8..=1.2).contains(&u),
        format!("2^10 * mean F_XEB: honest {h:.4}, uniform {u:.4}"),
    )
}

fn phase_unidentifiability(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("phase-unidentifiability.json")?;
    let adv = metric(&out, "advantage")?;
    verdict(adv <= 0.06, format!("battery advantage {adv:.4}"))
}

fn haar_collision(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("haar-collision.json")?;
    let within = metric(&out, "fraction_within_statement")?;
    let bound = metric(&out, "statement_bound")?;
    let mean = metric(&out, "mean_estimate")?;
    let birthday = metric(&out, "birthday_value")?;
    verdict(
        within >= 0.99 && (0.005..=0.015).contains(&mean) && (bound - 0.477).abs() < 1e-3,
        format!("{within:.2} of draws within {bound:.3}; mean estimate {mean:.5} (birthday {birthday:.5})"),
    )
}

fn chi2_tail(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("chi2-tail.json")?;
    let freq = metric(&out, "out_of_interval_frequency")?;
    let sigma = metric(&out, "sigma")?;
    let bound = 2.0 * (-5.0f64).exp() + 3.0 * sigma;
    verdict(freq <= bound, format!("out-of-interval {freq:.5} <= {bound:.5}"))
}

fn hybrid(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("hybrid.json")?;
    let adv = metric(&out, "single_copy_advantage")?;
    let se = metric(&out, "single_copy_std_error")?;
    let floor = 0.2 - 4.0 * se;
    verdict(adv >= floor, format!("single-copy advantage {adv:.4} >= {floor:.4}"))
}

fn unit_weights(s: u64, len: usize) -> Vec<f64> {
    (0..len as u64)
        .map(|i| (seed::derive(s, i) >> 11) as f64 / (1u64 << 53) as f64)
        .collect()
}

/// `|trace distance - TVD|` bit patterns for 100 seeded diagonal pairs.
fn bridge_gaps() -> Result<Vec<u64>, String> {
    let run = |i: u64| -> Result<f64, String> {
        let n = 1 + (i % 8) as usize;
        let d0 = Distribution::from_weights(n, unit_weights(seed::derive(70, 2 * i), 1 << n)).map_err(|e| e.to_string())?;
        let d1 = Distribution::from_weights(n, unit_weights(seed::derive(70, 2 * i + 1), 1 << n)).map_err(|e| e.to_string())?;
        let tvd = total_variation_distance(&d0, &d1).map_err(|e| e.to_string())?;
        let candidate = EfiCandidate {
            gen0: EfiGenerator::Distribution { dist: d0 },
            gen1: EfiGenerator::Distribution { dist: d1 },
            lambda: n,
            farness_threshold: 0.0,
        };
        let far = efi_statistical_farness(&candidate).map_err(|e| e.to_string())?;
        Ok((far - tvd).abs())
    };
    (0..100).map(|i| run(i).map(f64::to_bits)).collect()
}

fn efi_bridge(ctx: &mut Ctx) -> Outcome {
    let gaps = in_pool(1, bridge_gaps)?;
    let worst = gaps.iter().map(|&b| f64::from_bits(b)).fold(0.0, f64::max);
    ctx.bridge_at_one = Some(gaps);
    verdict(worst <= 1e-9, format!("max |trace distance - TVD| = {worst:.2e} over 100 pairs"))
}

/// Output distribution straight from the amplitudes, marginalised by hand.
fn amplitude_marginal(c: &Circuit) -> Vec<f64> {
    let probs = run_circuit(c).expect("valid circuit").probabilities();
    let measured: Vec<usize> = match &c.measure {
        Some(m) => m.clone(),
        None => (0..c.num_qubits).collect(),
    };
    let mut out = vec![0.0; 1 << measured.len()];
    for (idx, p) in probs.iter().enumerate() {
        let x: usize = measured.iter().enumerate().map(|(j, &q)| ((idx >> q) & 1) << j).sum();
        out[x] += p;
    }
    out
}

fn mixture_families() -> Vec<(CircuitFamily, Option<Vec<Circuit>>)> {
    let mut fams = Vec::new();
    for i in 0..50u64 {
        let n = 2 + (i % 5) as usize;
        let entry = match i % 4 {
            0 => (random_circuit_family(n, 3, i).unwrap(), None),
            1 => (simon_family(n, i).unwrap(), None),
            2 => (phase_prs_family(n, i).unwrap(), None),
            _ => {
                let circuits = vec![
                    Circuit::new(n),
                    Circuit::with_gates(n, (0..n).map(Gate::H).collect()),
                    Circuit::with_gates(n, vec![Gate::X(0), Gate::H(n - 1), Gate::Cnot { control: n - 1, target: 0 }]),
                ];
                (finite_family(format!("finite{i}"), circuits.clone()).unwrap(), Some(circuits))
            }
        };
        fams.push(entry);
    }
    fams
}

/// Worst elementwise gap between the mixture and the hand-computed mean.
fn mixture_gaps() -> Result<Vec<u64>, String> {
    let draws = 12;
    mixture_families()
        .into_iter()
        .enumerate()
        .map(|(i, (fam, finite))| {
            let s = 500 + i as u64;
            let mix = family_mixture_distribution(&fam, draws, s).map_err(|e| e.to_string())?;
            let members: Vec<Vec<f64>> = match finite {
                Some(cs) => cs.iter().map(amplitude_marginal).collect(),
                None => (0..draws as u64)
                    .map(|j| amplitude_marginal(&fam.draw(seed::derive(s, j)).unwrap().circuit))
                    .collect(),
            };
            let k = members.len() as f64;
            let gap = mix
                .probs()
                .iter()
                .enumerate()
                .map(|(x, p)| (p - members.iter().map(|m| m[x]).sum::<f64>() / k).abs())
                .fold(0.0, f64::max);
            Ok(gap.to_bits())
        })
        .collect()
}

fn mixture_identity(ctx: &mut Ctx) -> Outcome {
    let gaps = in_pool(1, mixture_gaps)?;
    let worst = gaps.iter().map(|&b| f64::from_bits(b)).fold(0.0, f64::max);
    ctx.mixture_at_one = Some(gaps);
    verdict(worst <= 1e-9, format!("max |mixture - mean| = {worst:.2e} over 50 families"))
}

fn mcsp_planted(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("mcsp-planted.json")?;
    let count = metric(&out, "samplers")?;
    let yes = metric(&out, "yes_rate")?;
    let size_ok = metric(&out, "witness_size_ok_rate")?;
    verdict(
        yes == 1.0 && size_ok == 1.0,
        format!("{count} planted samplers: YES rate {yes}, witness-size rate {size_ok}"),
    )
}

fn dvqa(ctx: &mut Ctx) -> Outcome {
    let out = ctx.run_recorded("dvqa.json")?;
    let honest = metric(&out, "honest_accept_rate")?;
    let sim = metric(&out, "sim_accept_rate")?;
    let adv = metric(&out, "mean_advantage")?;
    verdict(
        honest == 1.0 && sim <= 0.01 && adv >= 0.99,
        format!("honest {honest}, one-root-guess {sim:.4}, advantage {adv:.4}"),
    )
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}

fn determinism(ctx: &mut Ctx) -> Outcome {
    let mut mismatched = Vec::new();
    let recorded = std::mem::take(&mut ctx.csvs);
    for (path, one) in &recorded {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let (_, eight) = ctx.run(&name, 8)?;
        if *one != eight {
            mismatched.push(name);
        }
    }
    let checks = [
        ("efi-bridge", ctx.bridge_at_one.clone(), in_pool(8, bridge_gaps)?),
        ("mixture", ctx.mixture_at_one.clone(), in_pool(8, mixture_gaps)?),
    ];
    for (name, one, eight) in checks {
        if one.as_ref() != Some(&eight) {
            mismatched.push(name.into());
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} experiments byte-identical at 1 and 8 workers", recorded.len() + 2)
        } else {
            format!("differs at 8 workers: {}", mismatched.join(", "))
        },
    )
}

struct Criterion {
    title: &'static str,
    limit: Duration,
    check: fn(&mut Ctx) -> Outcome,
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { title: "Simon VQA demonstration", limit: secs(60), check: simon_demo },
        Criterion { title: "XEB anchors", limit: secs(300), check: xeb_anchors },
        Criterion { title: "phase-state unidentifiability", limit: secs(120), check: phase_unidentifiability },
        Criterion { title: "Haar collision bound", limit: secs(300), check: haar_collision },
        Criterion { title: "chi-squared tail", limit: secs(10), check: chi2_tail },
        Criterion { title: "hybrid amplifier", limit: secs(30), check: hybrid },
        Criterion { title: "EFI farness/TVD bridge", limit: secs(10), check: efi_bridge },
        Criterion { title: "mixture identity", limit: secs(30), check: mixture_identity },
        Criterion { title: "MCSP planted recovery", limit: secs(600), check: mcsp_planted },
        Criterion { title: "DVQA separation", limit: secs(120), check: dvqa },
        // Re-runs everything above, so no per-criterion limit.
        Criterion { title: "determinism across worker counts", limit: Duration::MAX, check: determinism },
    ];
    let mut ctx = Ctx {
        tmp: tempfile::tempdir().expect("temporary directory"),
        csvs: Vec::new(),
        bridge_at_one: None,
        mixture_at_one: None,
    };
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = (c.check)(&mut ctx);
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {:?}", c.limit)),
            Err(d) => (false, d),
        };
        failures += !ok as usize;
        println!(
            "{} criterion {:>2} {}: {} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.title,
            detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
