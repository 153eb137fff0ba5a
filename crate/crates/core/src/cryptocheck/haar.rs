use rand::Rng;
use rand_distr::{ChiSquared, Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CheckRecord;
use crate::error::{invalid, Result};
use crate::qsim::{Distribution, Sampler};
use crate::seed::{self, stream};

pub const MAX_HAAR_BITS: usize = 26;
/// Batches per Haar draw when estimating a collision probability.
pub const DEFAULT_COLLISION_BATCHES: usize = 10_000;
const CHUNK: usize = 1 << 12;
const MC_CHUNK: usize = 1 << 10;

/// Outcome distribution of a computational-basis measurement of a Haar
/// random state: `p(x) = (g_x^2 + h_x^2) / (G + H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarOutcomeModel {
    pub n: usize,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// `G = sum g_x^2`.
    pub g_norm_sq: f64,
    /// `H = sum h_x^2`.
    pub h_norm_sq: f64,
    pub p: Distribution,
}

pub fn haar_measurement_distribution(n: usize, seed: u64) -> Result<HaarOutcomeModel> {
    if n == 0 || n > MAX_HAAR_BITS {
        return Err(invalid("n", format!("Haar model needs 1..={MAX_HAAR_BITS} bits")));
    }
    let dim = 1usize << n;
    let mut g = vec![0.0; dim];
    let mut h = vec![0.0; dim];
    g.par_chunks_mut(CHUNK)
        .zip(h.par_chunks_mut(CHUNK))
        .enumerate()
        .for_each(|(c, (gc, hc))| {
            let mut rng = seed::rng_at(seed, &[stream::HAAR, c as u64]);
            for (gx, hx) in gc.iter_mut().zip(hc.iter_mut()) {
                *gx = rng.sample(StandardNormal);
                *hx = rng.sample(StandardNormal);
            }
        });
    let big_g: f64 = g.iter().map(|x| x * x).sum();
    let big_h: f64 = h.iter().map(|x| x * x).sum();
    let total = big_g + big_h;
    let probs = g.iter().zip(&h).map(|(a, b)| (a * a + b * b) / total).collect();
    Ok(HaarOutcomeModel {
        n,
        p: Distribution::new(n, probs)?,
        g,
        h,
        g_norm_sq: big_g,
        h_norm_sq: big_h,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub n: usize,
    pub m: usize,
    pub num_distributions: usize,
    pub batches_per_draw: usize,
    /// Estimated `Pr[some z_i = z_j]` per Haar draw.
    pub estimates: Vec<f64>,
    /// Exact `sum_x p(x)^2` per Haar draw.
    pub collision_masses: Vec<f64>,
    pub mean_estimate: f64,
    /// `1 - exp(-C(m,2) * 2 / 2^n)`.
    pub birthday_value: f64,
    /// `50 m^2 2^-n`.
    pub statement_bound: f64,
    /// `50 m^2 2^-n/2`.
    pub proof_bound: f64,
    pub fraction_within_statement: f64,
    pub fraction_within_proof: f64,
    pub statement_vacuous: bool,
    pub proof_vacuous: bool,
}

impl CollisionReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        let params = serde_json::json!({
            "n": self.n, "m": self.m,
            "num_distributions": self.num_distributions,
            "batches_per_draw": self.batches_per_draw,
        });
        let k = self.num_distributions.max(1) as f64;
        let q = 2f64.powf(-(self.n as f64) / 2.0);
        let sigma = (q * (1.0 - q) / k).sqrt();
        vec![
            CheckRecord::upper(
                "collision_mean_relative_to_birthday",
                params.clone(),
                (self.mean_estimate / self.birthday_value - 1.0).abs(),
                0.5,
            ),
            CheckRecord::upper(
                "collision_statement_bound_violations",
                params.clone(),
                1.0 - self.fraction_within_statement,
                0.01,
            )
            .vacuous_if(self.statement_vacuous),
            CheckRecord::upper(
                "collision_proof_bound_violations",
                params,
                1.0 - self.fraction_within_proof,
                q + 3.0 * sigma,
            )
            .vacuous_if(self.proof_vacuous),
        ]
    }
}

impl CheckRecord {
    fn vacuous_if(mut self, v: bool) -> Self {
        if v {
            self.status = super::CheckStatus::Vacuous;
        }
        self
    }
}

/// Collision statistics of `m`-sample batches from `num_distributions`
/// independent Haar outcome distributions, `batches_per_draw` batches each.
pub fn collision_probability_check(
    n: usize,
    m: usize,
    num_distributions: usize,
    batches_per_draw: usize,
    seed: u64,
) -> Result<CollisionReport> {
    if m == 0 {
        return Err(invalid("m", "need at least one sample"));
    }
    if num_distributions == 0 || batches_per_draw == 0 {
        return Err(invalid("num_distributions", "need at least one draw and one batch"));
    }
    let per_draw: Vec<(f64, f64)> = (0..num_distributions as u64)
        .map(|d| {
            let model = haar_measurement_distribution(n, seed::derive_path(seed, &[stream::DRAW, d]))?;
            let mass = model.p.power_sum(2);
            if m < 2 {
                return Ok((0.0, mass));
            }
            let sampler = Sampler::new(&model.p);
            let hits: usize = (0..batches_per_draw as u64)
                .into_par_iter()
                .map(|b| {
                    let mut rng = seed::rng_at(seed, &[stream::SAMPLE, d, b]);
                    let mut zs: Vec<u64> = (0..m).map(|_| sampler.draw(&mut rng)).collect();
                    zs.sort_unstable();
                    zs.windows(2).any(|w| w[0] == w[1]) as usize
                })
                .sum();
            Ok((hits as f64 / batches_per_draw as f64, mass))
        })
        .collect::<Result<_>>()?;

    let mf = m as f64;
    let dim = 2f64.powi(n as i32);
    let statement_bound = 50.0 * mf * mf / dim;
    let proof_bound = 50.0 * mf * mf / dim.sqrt();
    let k = num_distributions as f64;
    let within = |b: f64| per_draw.iter().filter(|e| e.0 <= b).count() as f64 / k;
    Ok(CollisionReport {
        n,
        m,
        num_distributions,
        batches_per_draw,
        mean_estimate: per_draw.iter().map(|e| e.0).sum::<f64>() / k,
        estimates: per_draw.iter().map(|e| e.0).collect(),
        collision_masses: per_draw.iter().map(|e| e.1).collect(),
        birthday_value: 1.0 - (-(mf * (mf - 1.0) / 2.0) * 2.0 / dim).exp(),
        fraction_within_statement: within(statement_bound),
        fraction_within_proof: within(proof_bound),
        statement_vacuous: statement_bound > 1.0,
        proof_vacuous: proof_bound > 1.0,
        statement_bound,
        proof_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredReport {
    pub k: u64,
    pub x: f64,
    pub trials: usize,
    /// `[k - 2 sqrt(k x), k + 2 sqrt(k x) + 2 x]`.
    pub interval: (f64, f64),
    pub out_of_interval_frequency: f64,
    /// `2 e^-x`.
    pub tail_bound: f64,
    /// Binomial standard deviation of the frequency at the tail bound.
    pub sigma: f64,
    pub within_bound: bool,
    pub mean: f64,
    /// `3 sqrt(2k / trials)`.
    pub mean_tolerance: f64,
    pub mean_ok: bool,
}

impl ChiSquaredReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        let params = serde_json::json!({ "k": self.k, "x": self.x, "trials": self.trials });
        vec![
            CheckRecord::upper(
                "chi_squared_tail",
                params.clone(),
                self.out_of_interval_frequency,
                self.tail_bound + 3.0 * self.sigma,
            ),
            CheckRecord::upper("chi_squared_mean", params, (self.mean - self.k as f64).abs(), self.mean_tolerance),
        ]
    }
}

/// Frequency with which `chi^2_k` leaves the concentration interval.
pub fn chi_squared_tail_check(k: u64, x: f64, trials: usize, seed: u64) -> Result<ChiSquaredReport> {
    if k == 0 {
        return Err(invalid("k", "need at least one degree of freedom"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid("x", "must be positive"));
    }
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let kf = k as f64;
    let dist = ChiSquared::new(kf).map_err(|e| invalid("k", e.to_string()))?;
    let lo = kf - 2.0 * (kf * x).sqrt();
    let hi = kf + 2.0 * (kf * x).sqrt() + 2.0 * x;
    let chunks = trials.div_ceil(MC_CHUNK);
    let parts: Vec<(usize, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng_at(seed, &[stream::SAMPLE, c as u64]);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut out = 0;
            let mut sum = 0.0;
            for _ in 0..len {
                let r: f64 = dist.sample(&mut rng);
                out += (r < lo || r > hi) as usize;
                sum += r;
            }
            (out, sum)
        })
        .collect();
    let tf = trials as f64;
    let freq = parts.iter().map(|p| p.0).sum::<usize>() as f64 / tf;
    let mean = parts.iter().map(|p| p.1).sum::<f64>() / tf;
    let bound = (2.0 * (-x).exp()).min(1.0);
    let sigma = (bound * (1.0 - bound) / tf).sqrt();
    let mean_tolerance = 3.0 * (2.0 * kf / tf).sqrt();
    Ok(ChiSquaredReport {
        k,
        x,
        trials,
        interval: (lo, hi),
        out_of_interval_frequency: freq,
        tail_bound: bound,
        sigma,
        within_bound: freq <= bound + 3.0 * sigma,
        mean,
        mean_tolerance,
        mean_ok: (mean - kf).abs() <= mean_tolerance,
    })
}
