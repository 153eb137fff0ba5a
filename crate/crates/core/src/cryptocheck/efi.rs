use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_rate_difference, CheckRecord, CheckStatus};
use crate::error::{invalid, Error, Result};
use crate::families::{family_mixture_distribution, CircuitFamily};
use crate::qsim::{
    diagonal_density, output_distribution, reduced_density, run_circuit, trace_distance, Circuit, DensityMatrix,
    Distribution, Sampler,
};
use crate::seed::{self, stream};
use crate::strategies::Battery;

/// One side of an EFI pair. Every variant has computational-basis sample
/// access; `Pure` keeps its coherences for the farness computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EfiGenerator {
    /// The diagonal state of an explicit distribution.
    Distribution { dist: Distribution },
    /// The dephased output of a circuit.
    Dephased { circuit: Circuit },
    /// The pure output state of a circuit (reduced to its measured qubits).
    Pure { circuit: Circuit },
    /// The diagonal state of a family mixture.
    FamilyMixture {
        family: CircuitFamily,
        #[serde(default = "default_mixture_draws")]
        num_draws: usize,
    },
}

fn default_mixture_draws() -> usize {
    64
}

impl EfiGenerator {
    /// Computational-basis measurement distribution.
    pub fn distribution(&self) -> Result<Distribution> {
        match self {
            EfiGenerator::Distribution { dist } => Ok(dist.clone()),
            EfiGenerator::Dephased { circuit } | EfiGenerator::Pure { circuit } => output_distribution(circuit),
            EfiGenerator::FamilyMixture { family, num_draws } => {
                family_mixture_distribution(family, *num_draws, family.seed)
            }
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            EfiGenerator::Pure { circuit } => {
                let state = run_circuit(circuit)?;
                match &circuit.measure {
                    Some(keep) => reduced_density(&state, keep),
                    None => DensityMatrix::from_pure(&state),
                }
            }
            _ => diagonal_density(&self.distribution()?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfiCandidate {
    pub gen0: EfiGenerator,
    pub gen1: EfiGenerator,
    /// Security-parameter proxy, in bits.
    pub lambda: usize,
    /// Declared `1/poly(lambda)` farness threshold.
    pub farness_threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfiVerdict {
    pub farness_pass: bool,
    pub indistinguishability_not_refuted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfiReport {
    pub statistical_farness: f64,
    pub farness_threshold: f64,
    pub battery_advantage: f64,
    pub advantage_tolerance: f64,
    pub verdict: EfiVerdict,
}

impl EfiReport {
    pub fn records(&self, lambda: usize) -> Vec<CheckRecord> {
        let params = serde_json::json!({ "lambda": lambda });
        vec![
            CheckRecord {
                check: "efi_statistical_farness".into(),
                parameters: params.clone(),
                estimate: self.statistical_farness,
                bound: self.farness_threshold,
                status: if self.verdict.farness_pass {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
            },
            CheckRecord::upper(
                "efi_battery_advantage",
                params,
                self.battery_advantage,
                self.advantage_tolerance,
            ),
        ]
    }
}

/// Exact `1/2 ||rho_0 - rho_1||_1`.
pub fn efi_statistical_farness(candidate: &EfiCandidate) -> Result<f64> {
    let rho0 = candidate.gen0.density()?;
    let rho1 = candidate.gen1.density()?;
    trace_distance(&rho0, &rho1)
}

/// Largest battery advantage at telling `m`-sample measurement batches of
/// the two sides apart, over the uniform, `D_0` and `D_1` references.
pub fn efi_empirical_indistinguishability(candidate: &EfiCandidate, m: usize, trials: usize, seed: u64) -> Result<f64> {
    let d0 = candidate.gen0.distribution()?;
    let d1 = candidate.gen1.distribution()?;
    same_width(&d0, &d1)?;
    if m == 0 || trials == 0 {
        return Ok(0.0);
    }
    let uniform = Distribution::uniform(d0.num_bits())?;
    let (s0, s1) = (Sampler::new(&d0), Sampler::new(&d1));
    let battery = Battery::default();
    let refs: [(&Distribution, bool); 3] = [(&uniform, false), (&d0, true), (&d1, true)];
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|i| {
            let i = i as u64;
            let b0 = s0.batch(m, seed::derive_path(seed, &[stream::SAMPLE, i, 0]), "gen0");
            let b1 = s1.batch(m, seed::derive_path(seed, &[stream::SAMPLE, i, 1]), "gen1");
            refs.iter()
                .map(|&(r, xeb)| Ok((battery.run(&b0, Some(r), xeb)?, battery.run(&b1, Some(r), xeb)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..refs.len())
        .map(|r| {
            let pairs: Vec<_> = per_trial.iter().map(|t| t[r].clone()).collect();
            max_rate_difference(&pairs)
        })
        .fold(0.0, f64::max))
}

/// Farness plus battery advantage with their verdicts.
pub fn efi_report(
    candidate: &EfiCandidate,
    m: usize,
    trials: usize,
    seed: u64,
    advantage_tolerance: f64,
) -> Result<EfiReport> {
    let farness = efi_statistical_farness(candidate)?;
    let adv = efi_empirical_indistinguishability(candidate, m, trials, seed)?;
    Ok(EfiReport {
        statistical_farness: farness,
        farness_threshold: candidate.farness_threshold,
        battery_advantage: adv,
        advantage_tolerance,
        verdict: EfiVerdict {
            farness_pass: farness >= candidate.farness_threshold,
            indistinguishability_not_refuted: adv <= advantage_tolerance,
        },
    })
}

fn same_width(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.num_bits() != b.num_bits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_bits(),
            actual: b.num_bits(),
        });
    }
    Ok(())
}

/// Single-copy decider built from a `t`-copy decider by the hybrid argument.
pub struct HybridDecider<D> {
    decider: D,
    gen0: Sampler,
    gen1: Sampler,
    t: usize,
    seed: u64,
}

/// Wrap `decider` so that it decides one sample: pick `i` uniform in
/// `0..t`, fill positions `0..i` from `gen0`, put the challenge at `i`, and
/// fill the remaining `t - i - 1` positions from `gen1`.
pub fn hybrid_amplify<D>(decider: D, gen0: &Distribution, gen1: &Distribution, t: usize, seed: u64) -> Result<HybridDecider<D>>
where
    D: Fn(&[u64]) -> bool,
{
    same_width(gen0, gen1)?;
    if t == 0 {
        return Err(invalid("t", "need at least one copy"));
    }
    Ok(HybridDecider {
        decider,
        gen0: Sampler::new(gen0),
        gen1: Sampler::new(gen1),
        t,
        seed,
    })
}

impl<D: Fn(&[u64]) -> bool> HybridDecider<D> {
    pub fn copies(&self) -> usize {
        self.t
    }

    /// Decision on `challenge`; the hybrid's randomness is keyed by `index`.
    pub fn decide(&self, challenge: u64, index: u64) -> bool {
        let mut rng = seed::rng_at(self.seed, &[stream::CHALLENGE, index]);
        let i = rng.random_range(0..self.t);
        let mut input = Vec::with_capacity(self.t);
        input.extend((0..i).map(|_| self.gen0.draw(&mut rng)));
        input.push(challenge);
        input.extend((i + 1..self.t).map(|_| self.gen1.draw(&mut rng)));
        (self.decider)(&input)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub advantage: f64,
    pub std_error: f64,
    pub accept_rate0: f64,
    pub accept_rate1: f64,
    pub trials: usize,
}

fn estimate(outcomes: &[(bool, bool)]) -> AdvantageEstimate {
    let k = outcomes.len().max(1) as f64;
    let r0 = outcomes.iter().filter(|o| o.0).count() as f64 / k;
    let r1 = outcomes.iter().filter(|o| o.1).count() as f64 / k;
    AdvantageEstimate {
        advantage: (r0 - r1).abs(),
        std_error: ((r0 * (1.0 - r0) + r1 * (1.0 - r1)) / k).sqrt(),
        accept_rate0: r0,
        accept_rate1: r1,
        trials: outcomes.len(),
    }
}

/// `|Pr[A(rho_0^t)=1] - Pr[A(rho_1^t)=1]|` by Monte Carlo.
pub fn multi_copy_advantage<D>(
    decider: D,
    gen0: &Distribution,
    gen1: &Distribution,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<AdvantageEstimate>
where
    D: Fn(&[u64]) -> bool + Sync,
{
    same_width(gen0, gen1)?;
    let (s0, s1) = (Sampler::new(gen0), Sampler::new(gen1));
    let outcomes: Vec<(bool, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let b0 = s0.batch(t, seed::derive_path(seed, &[stream::SAMPLE, i, 0]), "gen0");
            let b1 = s1.batch(t, seed::derive_path(seed, &[stream::SAMPLE, i, 1]), "gen1");
            (decider(&b0.samples), decider(&b1.samples))
        })
        .collect();
    Ok(estimate(&outcomes))
}

/// Advantage of a hybrid decider on `challenges` single-sample challenges
/// per side.
pub fn single_copy_advantage<D>(
    hybrid: &HybridDecider<D>,
    gen0: &Distribution,
    gen1: &Distribution,
    challenges: usize,
    seed: u64,
) -> Result<AdvantageEstimate>
where
    D: Fn(&[u64]) -> bool + Sync,
{
    same_width(gen0, gen1)?;
    let (s0, s1) = (Sampler::new(gen0), Sampler::new(gen1));
    let outcomes: Vec<(bool, bool)> = (0..challenges as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_at(seed, &[stream::SAMPLE, i]);
            let (x0, x1) = (s0.draw(&mut rng), s1.draw(&mut rng));
            (hybrid.decide(x0, 2 * i), hybrid.decide(x1, 2 * i + 1))
        })
        .collect();
    Ok(estimate(&outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Gate;

    fn dist(d: Distribution) -> EfiGenerator {
        EfiGenerator::Distribution { dist: d }
    }

    #[test]
    fn pure_zero_vs_uniform_is_half() {
        let c = EfiCandidate {
            gen0: EfiGenerator::Pure { circuit: Circuit::new(1) },
            gen1: dist(Distribution::uniform(1).unwrap()),
            lambda: 1,
            farness_threshold: 0.1,
        };
        assert!((efi_statistical_farness(&c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_plus_state_differs_from_its_dephasing() {
        let plus = Circuit::with_gates(1, vec![Gate::H(0)]);
        let c = EfiCandidate {
            gen0: EfiGenerator::Pure { circuit: plus.clone() },
            gen1: EfiGenerator::Dephased { circuit: plus },
            lambda: 1,
            farness_threshold: 0.1,
        };
        assert!((efi_statistical_farness(&c).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_copy_decider_is_identity_for_one_copy() {
        let d0 = Distribution::point_mass(1, 0).unwrap();
        let d1 = Distribution::point_mass(1, 1).unwrap();
        let h = hybrid_amplify(|s: &[u64]| s[0] == 1, &d0, &d1, 1, 3).unwrap();
        for i in 0..20 {
            assert!(!h.decide(0, i));
            assert!(h.decide(1, i));
        }
    }

    #[test]
    fn hybrid_fills_positions_in_order() {
        let d0 = Distribution::point_mass(2, 1).unwrap();
        let d1 = Distribution::point_mass(2, 2).unwrap();
        let h = hybrid_amplify(
            |s: &[u64]| {
                let i = s.iter().position(|&x| x == 3).unwrap();
                s[..i].iter().all(|&x| x == 1) && s[i + 1..].iter().all(|&x| x == 2)
            },
            &d0,
            &d1,
            6,
            1,
        )
        .unwrap();
        assert!((0..100).all(|i| h.decide(3, i)));
    }
}
