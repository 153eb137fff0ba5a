use rand::Rng;
use rayon::prelude::*;

use super::haar::haar_measurement_distribution;
use super::max_rate_difference;
use crate::error::{invalid, Result};
use crate::families::{CircuitFamily, FamilyDraw};
use crate::qsim::{output_distribution, Sampler};
use crate::seed::{self, stream};
use crate::strategies::{Battery, BatteryOutcome};

/// Battery advantage at telling `(C_i, samples of C_i)` from
/// `(C_i, samples of C_j)` for independent draws `i != j`. The battery gets
/// `D_{C_i}` as its reference on both sides.
pub fn unidentifiability_test(fam: &CircuitFamily, m: usize, trials: usize, seed: u64) -> Result<f64> {
    identify(fam, m, trials, seed, false)
}

/// The same test with `j = i`: both sides sample the same circuit.
pub fn unidentifiability_control(fam: &CircuitFamily, m: usize, trials: usize, seed: u64) -> Result<f64> {
    identify(fam, m, trials, seed, true)
}

/// A second draw distinct from `first`: another member for finite
/// families, an independent draw otherwise.
fn other_draw(fam: &CircuitFamily, first: &FamilyDraw, seed: u64) -> Result<FamilyDraw> {
    match fam.enumerate() {
        Some(all) if all.len() > 1 => {
            let i = all.iter().position(|d| d.metadata == first.metadata).unwrap_or(0);
            let mut j = seed::rng(seed).random_range(0..all.len() - 1);
            if j >= i {
                j += 1;
            }
            Ok(all[j].clone())
        }
        Some(_) => Err(invalid("family", "needs at least two members")),
        None => fam.draw(seed),
    }
}

fn identify(fam: &CircuitFamily, m: usize, trials: usize, seed: u64, control: bool) -> Result<f64> {
    if m == 0 || trials == 0 {
        return Ok(0.0);
    }
    let battery = Battery::default();
    let pairs: Vec<(BatteryOutcome, BatteryOutcome)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ci = fam.draw(seed::derive_path(seed, &[stream::DRAW, t, 0]))?;
            let di = output_distribution(&ci.circuit)?;
            let dj = if control {
                di.clone()
            } else {
                let cj = other_draw(fam, &ci, seed::derive_path(seed, &[stream::DRAW, t, 1]))?;
                output_distribution(&cj.circuit)?
            };
            let zi = Sampler::new(&di).batch(m, seed::derive_path(seed, &[stream::SAMPLE, t, 0]), "own");
            let zj = Sampler::new(&dj).batch(m, seed::derive_path(seed, &[stream::SAMPLE, t, 1]), "other");
            Ok((battery.run(&zi, Some(&di), true)?, battery.run(&zj, Some(&di), true)?))
        })
        .collect::<Result<_>>()?;
    Ok(max_rate_difference(&pairs))
}

/// Battery advantage at telling family measurement samples from samples of
/// a fresh Haar outcome distribution, with `D_{C_k}` as reference.
pub fn prs_shadow_test(fam: &CircuitFamily, m: usize, trials: usize, seed: u64) -> Result<f64> {
    if m == 0 || trials == 0 {
        return Ok(0.0);
    }
    let n = fam.num_outcome_bits();
    let battery = Battery::default();
    let pairs: Vec<(BatteryOutcome, BatteryOutcome)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ck = fam.draw(seed::derive_path(seed, &[stream::DRAW, t]))?;
            let dk = output_distribution(&ck.circuit)?;
            let haar = haar_measurement_distribution(n, seed::derive_path(seed, &[stream::HAAR, t]))?;
            let zk = Sampler::new(&dk).batch(m, seed::derive_path(seed, &[stream::SAMPLE, t, 0]), "family");
            let zh = Sampler::new(&haar.p).batch(m, seed::derive_path(seed, &[stream::SAMPLE, t, 1]), "haar");
            Ok((battery.run(&zk, Some(&dk), true)?, battery.run(&zh, Some(&dk), true)?))
        })
        .collect::<Result<_>>()?;
    Ok(max_rate_difference(&pairs))
}
