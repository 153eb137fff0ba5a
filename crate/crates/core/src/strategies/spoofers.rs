use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::qsim::{output_distribution, Circuit, Distribution, SampleBatch, Sampler, MAX_DIST_BITS};
use crate::seed;

/// What the classical skeptic ships alongside its samples: a program that
/// regenerates them and its declared size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerDescription {
    pub program: String,
    pub size: usize,
}

/// Built-in classical samplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpooferSpec {
    Uniform,
    DistinctUniform,
    /// Samples the exact `D_C` of the circuit it is shown.
    Omniscient,
    PointMass { x: u64 },
    /// Samples a fixed explicit distribution.
    Table { dist: Distribution },
}

impl SpooferSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SpooferSpec::Uniform => "uniform",
            SpooferSpec::DistinctUniform => "distinct_uniform",
            SpooferSpec::Omniscient => "omniscient",
            SpooferSpec::PointMass { .. } => "point_mass",
            SpooferSpec::Table { .. } => "table",
        }
    }

    /// Exact output distribution when it does not depend on the circuit.
    pub fn fixed_distribution(&self, num_bits: usize) -> Result<Option<Distribution>> {
        Ok(match self {
            SpooferSpec::Uniform => Some(Distribution::uniform(num_bits)?),
            SpooferSpec::PointMass { x } => Some(Distribution::point_mass(num_bits, *x)?),
            SpooferSpec::Table { dist } => Some(dist.clone()),
            SpooferSpec::DistinctUniform | SpooferSpec::Omniscient => None,
        })
    }

    /// Run the spoofer. `exact` may carry a precomputed `D_C` for the
    /// omniscient spoofer.
    pub fn sample(
        &self,
        circuit: &Circuit,
        exact: Option<&Distribution>,
        m: usize,
        seed: u64,
    ) -> Result<(SamplerDescription, SampleBatch)> {
        let n = circuit.num_outcome_bits();
        match self {
            SpooferSpec::Uniform => uniform_spoofer(n, m, seed),
            SpooferSpec::DistinctUniform => distinct_uniform_spoofer(n, m, seed),
            SpooferSpec::Omniscient => match exact {
                Some(d) => Ok(omniscient_from(d, circuit.size(), m, seed)),
                None => omniscient_spoofer(circuit, m, seed),
            },
            SpooferSpec::PointMass { x } => Ok((
                describe(&serde_json::json!({"spoofer": "point_mass", "n": n, "x": x}), 1),
                SampleBatch::new(n, vec![*x; m], "point_mass", seed)?,
            )),
            SpooferSpec::Table { dist } => {
                if dist.num_bits() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: dist.num_bits(),
                    });
                }
                let desc = describe(&serde_json::json!({"spoofer": "table", "dist": dist}), dist.probs().len());
                Ok((desc, Sampler::new(dist).batch(m, seed, "table")))
            }
        }
    }
}

fn describe(program: &serde_json::Value, size: usize) -> SamplerDescription {
    SamplerDescription {
        program: program.to_string(),
        size,
    }
}

/// `m` i.i.d. uniform strings.
pub fn uniform_spoofer(n: usize, m: usize, seed: u64) -> Result<(SamplerDescription, SampleBatch)> {
    check_width(n)?;
    let mut rng = seed::rng(seed);
    let samples = (0..m).map(|_| rng.random::<u64>() & mask(n)).collect();
    Ok((
        describe(&serde_json::json!({"spoofer": "uniform", "n": n}), 1),
        SampleBatch::new(n, samples, "uniform", seed)?,
    ))
}

/// `m` distinct uniform strings by rejection.
pub fn distinct_uniform_spoofer(n: usize, m: usize, seed: u64) -> Result<(SamplerDescription, SampleBatch)> {
    check_width(n)?;
    if n < 64 && m as u128 > 1u128 << n {
        return Err(invalid("m", format!("{m} distinct strings do not exist on {n} bits")));
    }
    let mut rng = seed::rng(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut samples = Vec::with_capacity(m);
    while samples.len() < m {
        let x = rng.random::<u64>() & mask(n);
        if seen.insert(x) {
            samples.push(x);
        }
    }
    Ok((
        describe(&serde_json::json!({"spoofer": "distinct_uniform", "n": n}), 1),
        SampleBatch::new(n, samples, "distinct_uniform", seed)?,
    ))
}

/// Samples the circuit's own output distribution.
pub fn omniscient_spoofer(circuit: &Circuit, m: usize, seed: u64) -> Result<(SamplerDescription, SampleBatch)> {
    if circuit.num_qubits > MAX_DIST_BITS {
        return Err(Error::CapExceeded {
            what: "omniscient spoofer register",
            value: circuit.num_qubits,
            cap: MAX_DIST_BITS,
        });
    }
    let d = output_distribution(circuit)?;
    Ok(omniscient_from(&d, circuit.size(), m, seed))
}

fn omniscient_from(d: &Distribution, size: usize, m: usize, seed: u64) -> (SamplerDescription, SampleBatch) {
    (
        describe(&serde_json::json!({"spoofer": "omniscient", "n": d.num_bits()}), size),
        Sampler::new(d).batch(m, seed, "omniscient"),
    )
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > 63 {
        return Err(invalid("n", format!("{n} bits is outside 1..=63")));
    }
    Ok(())
}

fn mask(n: usize) -> u64 {
    (1u64 << n) - 1
}
