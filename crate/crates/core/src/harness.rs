//! The three-party verification game and family-level advantage measures.
//!
//! For each circuit draw the harness runs the distinguisher on `R`
//! independent honest batches and `R` spoofer batches of `t` samples each,
//! takes the absolute difference of the two acceptance rates, and averages
//! that over draws. One distinguisher instance serves every draw.
//!
//! Trials fan out over the current rayon pool. Every trial derives its seeds
//! from `(seed, trial)` alone and the reduction runs in trial order, so the
//! report does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::families::{member_distributions, family_mixture_distribution, CircuitFamily};
use crate::qsim::{output_distribution, total_variation_distance, Distribution, Sampler};
use crate::seed::{self, stream};
use crate::strategies::{Distinguisher, DistinguisherInput, DistinguisherSpec, SpooferSpec};

pub const DEFAULT_BATCHES_PER_DRAW: usize = 20;

fn default_batches() -> usize {
    DEFAULT_BATCHES_PER_DRAW
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    /// The distinguisher sees the spoofer's description.
    Vqa,
    /// The distinguisher never sees it.
    Uvqa,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub family: CircuitFamily,
    pub spoofer: SpooferSpec,
    pub distinguisher: DistinguisherSpec,
    /// Samples per batch, equal on both sides.
    pub samples_per_side: usize,
    pub num_circuit_draws: usize,
    #[serde(default = "default_batches")]
    pub batches_per_draw: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.samples_per_side == 0 {
            return Err(invalid("samples_per_side", "t must be at least 1"));
        }
        if self.num_circuit_draws == 0 {
            return Err(invalid("num_circuit_draws", "need at least one trial"));
        }
        if self.batches_per_draw == 0 {
            return Err(invalid("batches_per_draw", "need at least one batch per side"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub circuit_seed: u64,
    pub quantum_decisions: Vec<bool>,
    pub classical_decisions: Vec<bool>,
    pub quantum_accept_rate: f64,
    pub classical_accept_rate: f64,
    pub abs_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub mode: GameMode,
    pub family: String,
    pub spoofer: String,
    pub distinguisher: String,
    pub samples_per_side: usize,
    pub batches_per_draw: usize,
    pub advantage_estimate: f64,
    /// Monte Carlo error over draws combined with the finite-`R` bias of
    /// `|rate difference|`.
    pub std_error: f64,
    pub per_trial: Vec<TrialRecord>,
}

/// One row of the CSV summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub spoofer: String,
    pub distinguisher: String,
    pub t: usize,
    pub trials: usize,
    pub advantage: f64,
    pub std_error: f64,
}

impl GameReport {
    pub fn summary_row(&self) -> SummaryRow {
        SummaryRow {
            family: self.family.clone(),
            spoofer: self.spoofer.clone(),
            distinguisher: self.distinguisher.clone(),
            t: self.samples_per_side,
            trials: self.per_trial.len(),
            advantage: self.advantage_estimate,
            std_error: self.std_error,
        }
    }

    /// One `trial` record per draw, then one `summary` record.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.per_trial {
            let mut v = serde_json::to_value(t)?;
            v["record"] = "trial".into();
            writeln!(out, "{v}").map_err(io_err)?;
        }
        let mut v = serde_json::to_value(self.summary_row())?;
        v["record"] = "summary".into();
        v["mode"] = serde_json::to_value(self.mode)?;
        writeln!(out, "{v}").map_err(io_err)?;
        Ok(())
    }
}

fn io_err(e: std::io::Error) -> Error {
    invalid("output", e.to_string())
}

pub fn run_vqa_game(config: &GameConfig) -> Result<GameReport> {
    run_game_with(config, &config.distinguisher, GameMode::Vqa)
}

pub fn run_uvqa_game(config: &GameConfig) -> Result<GameReport> {
    run_game_with(config, &config.distinguisher, GameMode::Uvqa)
}

/// Run the game with an arbitrary distinguisher in place of the configured one.
pub fn run_game_with(config: &GameConfig, dist: &dyn Distinguisher, mode: GameMode) -> Result<GameReport> {
    config.validate()?;
    let trials: Vec<TrialRecord> = (0..config.num_circuit_draws)
        .into_par_iter()
        .map(|trial| run_trial(config, dist, mode, trial))
        .collect::<Result<_>>()?;

    let diffs: Vec<f64> = trials.iter().map(|t| t.abs_difference).collect();
    let k = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let se_mc = if diffs.len() > 1 {
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    let r = config.batches_per_draw as f64;
    let bias = trials
        .iter()
        .map(|t| {
            let (q, c) = (t.quantum_accept_rate, t.classical_accept_rate);
            let sigma = (q * (1.0 - q) / r + c * (1.0 - c) / r).sqrt();
            sigma * (2.0 / std::f64::consts::PI).sqrt()
        })
        .sum::<f64>()
        / k;

    Ok(GameReport {
        mode,
        family: config.family.name.clone(),
        spoofer: config.spoofer.name().into(),
        distinguisher: dist.name(),
        samples_per_side: config.samples_per_side,
        batches_per_draw: config.batches_per_draw,
        advantage_estimate: mean.clamp(0.0, 1.0),
        std_error: (se_mc * se_mc + bias * bias).sqrt(),
        per_trial: trials,
    })
}

fn run_trial(config: &GameConfig, dist: &dyn Distinguisher, mode: GameMode, trial: usize) -> Result<TrialRecord> {
    let tr = trial as u64;
    let circuit_seed = seed::derive_path(config.seed, &[stream::DRAW, tr]);
    let draw = config.family.draw(circuit_seed)?;
    let exact = output_distribution(&draw.circuit)?;
    let honest = Sampler::new(&exact);
    let t = config.samples_per_side;
    let wrap = |e: Error| Error::Distinguisher {
        trial,
        source: Box::new(e),
    };

    let mut quantum = Vec::with_capacity(config.batches_per_draw);
    let mut classical = Vec::with_capacity(config.batches_per_draw);
    for b in 0..config.batches_per_draw as u64 {
        let qs = seed::derive_path(config.seed, &[stream::QUANTUM, tr, b]);
        let cs = seed::derive_path(config.seed, &[stream::CLASSICAL, tr, b]);
        let qbatch = honest.batch(t, qs, "quantum");
        let (desc, cbatch) = config.spoofer.sample(&draw.circuit, Some(&exact), t, cs)?;
        let sampler = match mode {
            GameMode::Vqa => Some(&desc),
            GameMode::Uvqa => None,
        };
        let input = |batch| DistinguisherInput {
            circuit: Some(&draw.circuit),
            metadata: Some(&draw.metadata),
            exact: Some(&exact),
            sampler,
            batch,
        };
        quantum.push(dist.decide(&input(&qbatch)).map_err(wrap)?.decision);
        classical.push(dist.decide(&input(&cbatch)).map_err(wrap)?.decision);
    }
    let rate = |v: &[bool]| v.iter().filter(|&&d| d).count() as f64 / v.len() as f64;
    let (q, c) = (rate(&quantum), rate(&classical));
    Ok(TrialRecord {
        trial,
        circuit_seed,
        quantum_decisions: quantum,
        classical_decisions: classical,
        quantum_accept_rate: q,
        classical_accept_rate: c,
        abs_difference: (q - c).abs(),
    })
}

/// Mean over draws of `TVD(D_C, spoofer_dist)`. Finite families average
/// over every member exactly.
pub fn estimate_avg_advantage(fam: &CircuitFamily, spoofer_dist: &Distribution, num_draws: usize) -> Result<f64> {
    check_width(fam, spoofer_dist)?;
    let members = member_distributions(fam, num_draws, fam.seed)?;
    let total = members
        .iter()
        .map(|d| total_variation_distance(d, spoofer_dist))
        .sum::<Result<f64>>()?;
    Ok(total / members.len() as f64)
}

/// `TVD(D_F, spoofer_dist)` for the family mixture `D_F`.
pub fn estimate_strong_advantage(fam: &CircuitFamily, spoofer_dist: &Distribution, num_draws: usize) -> Result<f64> {
    check_width(fam, spoofer_dist)?;
    let mix = family_mixture_distribution(fam, num_draws, fam.seed)?;
    total_variation_distance(&mix, spoofer_dist)
}

fn check_width(fam: &CircuitFamily, d: &Distribution) -> Result<()> {
    if fam.num_outcome_bits() != d.num_bits() {
        return Err(Error::DimensionMismatch {
            expected: fam.num_outcome_bits(),
            actual: d.num_bits(),
        });
    }
    Ok(())
}
