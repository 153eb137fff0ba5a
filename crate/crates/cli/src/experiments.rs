//! Dispatch from a validated config to the core routines.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use vqalab_core::cryptocheck::{
    chi_squared_tail_check, collision_probability_check, efi_report, hybrid_amplify, multi_copy_advantage,
    prs_shadow_test, single_copy_advantage, unidentifiability_control, unidentifiability_test, CheckRecord, CheckStatus,
};
use vqalab_core::dvqa::run_dvqa_experiment;
use vqalab_core::families::{phase_family_with_mode, random_circuit_family, FamilyMetadata};
use vqalab_core::harness::{run_vqa_game, run_uvqa_game};
use vqalab_core::mcsp::{
    enumerate_samplers, samp_mcsp_bruteforce, universal_verifier, McspAnswer, McspParams, McspVariant,
};
use vqalab_core::qsim::{output_distribution, sample, SampleBatch};
use vqalab_core::seed::{self, stream};
use vqalab_core::strategies::{default_xeb_threshold, simon_distinguisher, uniform_spoofer, xeb_score_with};
use vqalab_core::{CircuitFamily, FamilySpec, GameReport, Result};

use crate::config::{Experiment, GameParams, McspTask, SampleSource};

/// Report rows plus the tidy summary of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    /// One JSON object per report line, without the shared header fields.
    pub records: Vec<Value>,
    /// `(metric, value)` pairs in emission order.
    pub summary: Vec<(String, f64)>,
}

impl ExperimentOutput {
    fn record(&mut self, kind: &str, body: impl Serialize) {
        let mut v = serde_json::to_value(body).expect("report types serialize");
        match v.as_object_mut() {
            Some(map) => {
                map.insert("record".into(), kind.into());
            }
            None => v = json!({ "record": kind, "value": v }),
        }
        self.records.push(v);
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.summary.push((name.into(), value));
    }

    fn flag(&mut self, name: &str, value: bool) {
        self.metric(name, if value { 1.0 } else { 0.0 });
    }

    fn checks(&mut self, checks: Vec<CheckRecord>) {
        for c in checks {
            match c.status {
                CheckStatus::Vacuous => self.flag(&format!("{}_vacuous", c.check), true),
                status => self.flag(&format!("{}_pass", c.check), status == CheckStatus::Pass),
            }
            self.record("check", c);
        }
    }

    /// The summary metric called `name`.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len().max(1) as f64;
    xs.sum::<f64>() / n
}

fn rate(bits: &[bool]) -> f64 {
    mean(bits.iter().map(|&b| b as u8 as f64))
}

pub fn run_experiment(experiment: &Experiment, seed: u64) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    match experiment {
        Experiment::VqaGame(p) => game(&mut out, run_vqa_game(&p.game_config(seed))?, p),
        Experiment::UvqaGame(p) => game(&mut out, run_uvqa_game(&p.game_config(seed))?, p),
        Experiment::Xeb(p) => {
            let fam = random_circuit_family(p.n, p.depth, seed::derive(seed, stream::GATE))?;
            let threshold = p.threshold.unwrap_or_else(|| default_xeb_threshold(p.n));
            let scale = (1u64 << p.n) as f64;
            let rows: Vec<(f64, f64)> = (0..p.num_circuits as u64)
                .into_par_iter()
                .map(|i| {
                    let c = fam.draw(seed::derive_path(seed, &[stream::DRAW, i]))?.circuit;
                    let d = output_distribution(&c)?;
                    let honest = sample(&d, p.samples, seed::derive_path(seed, &[stream::QUANTUM, i]))?;
                    let (_, uniform) = uniform_spoofer(p.n, p.samples, seed::derive_path(seed, &[stream::CLASSICAL, i]))?;
                    Ok((xeb_score_with(&d, &honest)?, xeb_score_with(&d, &uniform)?))
                })
                .collect::<Result<_>>()?;
            for (i, &(h, u)) in rows.iter().enumerate() {
                out.record(
                    "circuit",
                    json!({ "index": i, "honest_score": h, "uniform_score": u, "honest_accept": h >= threshold, "uniform_accept": u >= threshold }),
                );
            }
            let honest_rate = mean(rows.iter().map(|r| (r.0 >= threshold) as u8 as f64));
            let uniform_rate = mean(rows.iter().map(|r| (r.1 >= threshold) as u8 as f64));
            out.metric("threshold", threshold);
            out.metric("mean_honest_score", mean(rows.iter().map(|r| r.0)));
            out.metric("mean_uniform_score", mean(rows.iter().map(|r| r.1)));
            out.metric("mean_honest_scaled", mean(rows.iter().map(|r| r.0 * scale)));
            out.metric("mean_uniform_scaled", mean(rows.iter().map(|r| r.1 * scale)));
            out.metric("honest_accept_rate", honest_rate);
            out.metric("uniform_accept_rate", uniform_rate);
            out.metric("advantage", (honest_rate - uniform_rate).abs());
        }
        Experiment::Simon(p) => {
            let spec = FamilySpec::Simon { n: p.n, shift: p.shift };
            let fam = CircuitFamily::new("simon", spec, seed::derive(seed, stream::KEY))?;
            let rows: Vec<(bool, bool)> = (0..p.num_draws as u64)
                .into_par_iter()
                .map(|i| {
                    let draw = fam.draw(seed::derive_path(seed, &[stream::DRAW, i]))?;
                    let FamilyMetadata::Simon(inst) = &draw.metadata else {
                        unreachable!("simon families carry simon metadata")
                    };
                    let d = output_distribution(&draw.circuit)?;
                    let honest = sample(&d, p.samples, seed::derive_path(seed, &[stream::QUANTUM, i]))?;
                    let (_, uniform) = uniform_spoofer(p.n, p.samples, seed::derive_path(seed, &[stream::CLASSICAL, i]))?;
                    Ok((simon_distinguisher(inst, &honest)?.decision, simon_distinguisher(inst, &uniform)?.decision))
                })
                .collect::<Result<_>>()?;
            for (i, &(h, u)) in rows.iter().enumerate() {
                out.record("draw", json!({ "index": i, "honest_accept": h, "uniform_accept": u }));
            }
            let h = rate(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
            let u = rate(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
            out.metric("honest_accept_rate", h);
            out.metric("uniform_accept_rate", u);
            out.metric("advantage", (h - u).abs());
        }
        Experiment::PrsShadow(p) => {
            let fam = phase_family_with_mode(p.n, p.phase, seed::derive(seed, stream::KEY))?;
            let adv = prs_shadow_test(&fam, p.samples, p.trials, seed::derive(seed, stream::CHALLENGE))?;
            out.record("advantage", json!({ "advantage": adv }));
            out.metric("advantage", adv);
        }
        Experiment::Unidentifiability(p) => {
            let fam = CircuitFamily::new("family", p.family.clone(), seed::derive(seed, stream::KEY))?;
            let s = seed::derive(seed, stream::CHALLENGE);
            let adv = if p.control {
                unidentifiability_control(&fam, p.samples, p.trials, s)?
            } else {
                unidentifiability_test(&fam, p.samples, p.trials, s)?
            };
            out.record("advantage", json!({ "advantage": adv, "control": p.control }));
            out.metric("advantage", adv);
        }
        Experiment::HaarCollision(p) => {
            let r = collision_probability_check(p.n, p.samples, p.num_distributions, p.batches_per_draw, seed)?;
            for (i, (e, c)) in r.estimates.iter().zip(&r.collision_masses).enumerate() {
                out.record("draw", json!({ "index": i, "estimate": e, "collision_mass": c }));
            }
            out.metric("mean_estimate", r.mean_estimate);
            out.metric("birthday_value", r.birthday_value);
            out.metric("statement_bound", r.statement_bound);
            out.metric("proof_bound", r.proof_bound);
            out.metric("fraction_within_statement", r.fraction_within_statement);
            out.metric("fraction_within_proof", r.fraction_within_proof);
            out.metric("mean_collision_mass", mean(r.collision_masses.iter().copied()));
            out.checks(r.records());
        }
        Experiment::Chi2Tail(p) => {
            let r = chi_squared_tail_check(p.k, p.x, p.trials, seed)?;
            out.metric("out_of_interval_frequency", r.out_of_interval_frequency);
            out.metric("tail_bound", r.tail_bound);
            out.metric("sigma", r.sigma);
            out.metric("mean", r.mean);
            out.metric("mean_tolerance", r.mean_tolerance);
            out.checks(r.records());
        }
        Experiment::EfiCheck(p) => {
            let r = efi_report(&p.candidate, p.samples, p.trials, seed, p.tolerance)?;
            out.metric("statistical_farness", r.statistical_farness);
            out.metric("farness_threshold", r.farness_threshold);
            out.metric("battery_advantage", r.battery_advantage);
            out.metric("advantage_tolerance", r.advantage_tolerance);
            out.flag("farness_pass", r.verdict.farness_pass);
            out.flag("indistinguishability_not_refuted", r.verdict.indistinguishability_not_refuted);
            out.checks(r.records(p.candidate.lambda));
        }
        Experiment::Hybrid(p) => {
            let d0 = p.gen0.distribution()?;
            let d1 = p.gen1.distribution()?;
            let decide = |s: &[u64]| p.decider.decide(s);
            let multi = multi_copy_advantage(decide, &d0, &d1, p.copies, p.multi_copy_trials, seed::derive(seed, stream::SAMPLE))?;
            let hybrid = hybrid_amplify(decide, &d0, &d1, p.copies, seed::derive(seed, stream::CHALLENGE))?;
            let single = single_copy_advantage(&hybrid, &d0, &d1, p.challenges, seed::derive(seed, stream::OTHER))?;
            out.record("multi_copy", multi);
            out.record("single_copy", single);
            out.metric("multi_copy_advantage", multi.advantage);
            out.metric("multi_copy_std_error", multi.std_error);
            out.metric("single_copy_advantage", single.advantage);
            out.metric("single_copy_std_error", single.std_error);
            out.metric("one_over_t_bound", multi.advantage / p.copies as f64);
        }
        Experiment::Mcsp(task) => mcsp(&mut out, task, seed)?,
        Experiment::Dvqa(p) => {
            let e = run_dvqa_experiment(p.modulus_bits, p.rounds, p.transcripts, p.strategy, p.key_draws, seed)?;
            for (i, r) in e.per_key.iter().enumerate() {
                out.record(
                    "key",
                    json!({
                        "index": i,
                        "honest_accept_rate": r.honest_accept_rate,
                        "sim_accept_rate": r.sim_accept_rate,
                        "advantage": r.advantage,
                        "std_error": r.std_error,
                    }),
                );
            }
            out.metric("honest_accept_rate", mean(e.per_key.iter().map(|r| r.honest_accept_rate)));
            out.metric("sim_accept_rate", mean(e.per_key.iter().map(|r| r.sim_accept_rate)));
            out.metric("mean_advantage", e.mean_advantage);
            out.metric("std_error", e.std_error);
        }
    }
    Ok(out)
}

fn game(out: &mut ExperimentOutput, report: GameReport, p: &GameParams) {
    for t in &report.per_trial {
        out.record("trial", t);
    }
    out.metric("advantage", report.advantage_estimate);
    out.metric("std_error", report.std_error);
    out.metric("quantum_decision_rate", mean(report.per_trial.iter().map(|t| t.quantum_accept_rate)));
    out.metric("classical_decision_rate", mean(report.per_trial.iter().map(|t| t.classical_accept_rate)));
    out.metric("samples_per_side", p.samples_per_side as f64);
    out.metric("trials", report.per_trial.len() as f64);
}

fn source_batch(source: &SampleSource, seed: u64) -> Result<SampleBatch> {
    let s = seed::derive(seed, stream::SAMPLE);
    match source {
        SampleSource::Planted { sampler, samples } => sampler.sample(*samples, s),
        SampleSource::Distribution { dist, samples } => sample(dist, *samples, s),
        SampleSource::Uniform { n, samples } => Ok(uniform_spoofer(*n, *samples, s)?.1),
        SampleSource::Explicit { n, values } => SampleBatch::new(*n, values.clone(), "explicit", 0),
    }
}

fn mcsp(out: &mut ExperimentOutput, task: &McspTask, seed: u64) -> Result<()> {
    match task {
        McspTask::Solve { source, params } => {
            let v = samp_mcsp_bruteforce(&source_batch(source, seed)?, params)?;
            out.flag("answer_yes", v.answer == McspAnswer::Yes);
            out.metric("achieved_distance", v.achieved_distance);
            out.metric("candidates_examined", v.candidates_examined as f64);
            if let Some(w) = &v.witness {
                out.metric("witness_size", w.size() as f64);
            }
            out.record("verdict", v);
        }
        McspTask::Verify {
            source,
            declared_size,
            tolerance,
            random_bits,
        } => {
            let quantum = universal_verifier(&source_batch(source, seed)?, *declared_size, *tolerance, *random_bits)?;
            out.record("verdict", json!({ "quantum": quantum }));
            out.flag("quantum", quantum);
        }
        McspTask::PlantedSweep {
            max_outputs,
            max_random_bits,
            max_size,
            samples,
            tolerance,
        } => {
            let mut planted = Vec::new();
            for n in 1..=*max_outputs {
                for r in 0..=*max_random_bits {
                    planted.extend(enumerate_samplers(n, r, *max_size)?.enumerate().map(|(i, s)| (n, r, i, s)));
                }
            }
            let rows: Vec<Value> = planted
                .par_iter()
                .map(|(n, r, i, s)| {
                    let b = s.sample(*samples, seed::derive_path(seed, &[stream::SAMPLE, *n as u64, *r as u64, *i as u64]))?;
                    let params = McspParams {
                        random_bits: *r,
                        size_bound: *max_size,
                        tolerance: *tolerance,
                        variant: McspVariant::Described,
                    };
                    let v = samp_mcsp_bruteforce(&b, &params)?;
                    let witness_size = v.witness.as_ref().map(|w| w.size());
                    Ok(json!({
                        "n": n,
                        "r": r,
                        "index": i,
                        "planted_size": s.size(),
                        "yes": v.answer == McspAnswer::Yes,
                        "witness_size": witness_size,
                        "witness_size_ok": witness_size.is_some_and(|w| w <= s.size()),
                        "achieved_distance": v.achieved_distance,
                    }))
                })
                .collect::<Result<_>>()?;
            let count = |key: &str| rows.iter().filter(|r| r[key] == true).count() as f64;
            let k = rows.len().max(1) as f64;
            out.metric("samplers", rows.len() as f64);
            out.metric("yes_rate", count("yes") / k);
            out.metric("witness_size_ok_rate", count("witness_size_ok") / k);
            out.metric(
                "max_achieved_distance",
                rows.iter().map(|r| r["achieved_distance"].as_f64().unwrap_or(0.0)).fold(0.0, f64::max),
            );
            for r in rows {
                out.record("planted", r);
            }
        }
    }
    Ok(())
}
