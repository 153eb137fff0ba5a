use rand::distr::Distribution as _;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::state::run_circuit;
use super::gather;
use crate::error::{invalid, Error, Result};
use crate::seed;

pub(crate) const PROB_TOL: f64 = 1e-9;
/// Widest outcome register an exact distribution may describe.
pub const MAX_DIST_BITS: usize = 26;

/// Exact probability vector over `{0,1}^n`, indexed little-endian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct Distribution {
    num_bits: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    num_bits: usize,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;
    fn try_from(r: RawDistribution) -> Result<Self> {
        Distribution::new(r.num_bits, r.probs)
    }
}

impl Distribution {
    /// Validate and wrap a probability vector. Entries down to `-1e-12` are
    /// treated as round-off and clamped to zero.
    pub fn new(num_bits: usize, mut probs: Vec<f64>) -> Result<Self> {
        if num_bits > MAX_DIST_BITS {
            return Err(Error::CapExceeded {
                what: "distribution width",
                value: num_bits,
                cap: MAX_DIST_BITS,
            });
        }
        if probs.len() != 1usize << num_bits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_bits,
                actual: probs.len(),
            });
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Distribution { num_bits, probs })
    }

    /// Normalize nonnegative weights into a distribution.
    pub fn from_weights(num_bits: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution("weights do not have positive finite sum".into()));
        }
        Distribution::new(num_bits, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(num_bits: usize) -> Result<Self> {
        let len = 1usize << num_bits;
        Distribution::new(num_bits, vec![1.0 / len as f64; len])
    }

    pub fn point_mass(num_bits: usize, x: u64) -> Result<Self> {
        let len = 1usize << num_bits;
        if x as usize >= len {
            return Err(invalid("x", format!("{x} does not fit {num_bits} bits")));
        }
        let mut probs = vec![0.0; len];
        probs[x as usize] = 1.0;
        Distribution::new(num_bits, probs)
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: u64) -> f64 {
        self.probs.get(x as usize).copied().unwrap_or(0.0)
    }

    /// `sum_x p(x)^k`.
    pub fn power_sum(&self, k: i32) -> f64 {
        self.probs.iter().map(|p| p.powi(k)).sum()
    }

    pub fn support_size(&self, eps: f64) -> usize {
        self.probs.iter().filter(|&&p| p > eps).count()
    }

    /// Marginal on the listed bit positions; outcome bit `j` is `bits[j]`.
    pub fn marginal(&self, bits: &[usize]) -> Result<Distribution> {
        if bits.iter().any(|&b| b >= self.num_bits) {
            return Err(invalid("bits", "marginal bit out of range"));
        }
        let mut out = vec![0.0; 1usize << bits.len()];
        for (x, p) in self.probs.iter().enumerate() {
            out[gather(x, bits)] += p;
        }
        Distribution::new(bits.len(), out)
    }

    /// Elementwise mean of equally weighted distributions.
    pub fn mean_of(dists: &[Distribution]) -> Result<Distribution> {
        let first = dists.first().ok_or_else(|| invalid("dists", "empty mixture"))?;
        let mut acc = vec![0.0; first.probs.len()];
        for d in dists {
            if d.num_bits != first.num_bits {
                return Err(Error::DimensionMismatch {
                    expected: first.num_bits,
                    actual: d.num_bits,
                });
            }
            for (a, p) in acc.iter_mut().zip(&d.probs) {
                *a += p;
            }
        }
        let k = dists.len() as f64;
        Distribution::new(first.num_bits, acc.into_iter().map(|a| a / k).collect())
    }
}

/// Reusable O(1) sampler over a fixed distribution.
pub struct Sampler {
    num_bits: usize,
    alias: WeightedAliasIndex<f64>,
}

impl Sampler {
    pub fn new(dist: &Distribution) -> Sampler {
        let alias = WeightedAliasIndex::new(dist.probs.clone())
            .expect("validated distribution has positive finite mass");
        Sampler {
            num_bits: dist.num_bits,
            alias,
        }
    }

    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.alias.sample(rng) as u64
    }

    pub fn batch(&self, m: usize, seed: u64, source_tag: &str) -> SampleBatch {
        let mut rng = seed::rng(seed);
        SampleBatch {
            num_bits: self.num_bits,
            samples: (0..m).map(|_| self.draw(&mut rng)).collect(),
            source_tag: source_tag.to_string(),
            seed,
        }
    }
}

/// `m` i.i.d. draws from `dist`; deterministic per seed.
pub fn sample(dist: &Distribution, m: usize, seed: u64) -> Result<SampleBatch> {
    if m == 0 {
        return Err(invalid("m", "sample count must be at least 1"));
    }
    Ok(Sampler::new(dist).batch(m, seed, "exact"))
}

/// `m` classical outcomes with provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBatch {
    pub num_bits: usize,
    pub samples: Vec<u64>,
    pub source_tag: String,
    pub seed: u64,
}

impl SampleBatch {
    pub fn new(num_bits: usize, samples: Vec<u64>, source_tag: &str, seed: u64) -> Result<Self> {
        let b = SampleBatch {
            num_bits,
            samples,
            source_tag: source_tag.to_string(),
            seed,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bits > 63 {
            return Err(invalid("num_bits", "outcomes wider than 63 bits"));
        }
        if let Some(x) = self.samples.iter().find(|&&x| x >> self.num_bits != 0) {
            return Err(invalid(
                "samples",
                format!("outcome {x:#x} has more than {} bits", self.num_bits),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Empirical distribution of the batch (`None` when empty).
    pub fn empirical(&self) -> Option<Distribution> {
        if self.samples.is_empty() {
            return None;
        }
        let mut counts = vec![0.0; 1usize << self.num_bits];
        for &x in &self.samples {
            counts[x as usize] += 1.0;
        }
        Distribution::from_weights(self.num_bits, counts).ok()
    }

    /// Number of unordered pairs `i < j` with equal outcomes.
    pub fn collision_pairs(&self) -> u64 {
        let mut s = self.samples.clone();
        s.sort_unstable();
        let mut total = 0u64;
        let mut run = 1u64;
        for w in s.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        if !s.is_empty() {
            total += run * (run - 1) / 2;
        }
        total
    }

    pub fn has_collision(&self) -> bool {
        let mut s = self.samples.clone();
        s.sort_unstable();
        s.windows(2).any(|w| w[0] == w[1])
    }
}

/// Measurement distribution of `circuit` (on its measured register).
pub fn output_distribution(circuit: &Circuit) -> Result<Distribution> {
    let state = run_circuit(circuit)?;
    let full = Distribution::new(circuit.num_qubits, state.probabilities())?;
    match &circuit.measure {
        Some(bits) => full.marginal(bits),
        None => Ok(full),
    }
}

/// `|<x|C|0^n>|^2`, marginalized when the circuit measures a sub-register.
/// `x` is a bit string whose character `j` is outcome bit `j`.
pub fn amplitude_probability(circuit: &Circuit, x: &str) -> Result<f64> {
    let bits = circuit.num_outcome_bits();
    let value = parse_bits(x, bits)?;
    match &circuit.measure {
        None => {
            let state = run_circuit(circuit)?;
            Ok(state.amplitudes()[value as usize].norm_sqr())
        }
        Some(_) => Ok(output_distribution(circuit)?.prob(value)),
    }
}

/// Parse a `0`/`1` string; character `j` is bit `j`.
pub fn parse_bits(s: &str, expected_len: usize) -> Result<u64> {
    if s.len() != expected_len {
        return Err(Error::DimensionMismatch {
            expected: expected_len,
            actual: s.len(),
        });
    }
    s.bytes().enumerate().try_fold(0u64, |acc, (j, b)| match b {
        b'0' => Ok(acc),
        b'1' => Ok(acc | (1 << j)),
        _ => Err(invalid("x", format!("`{s}` is not a bit string"))),
    })
}

pub fn format_bits(x: u64, len: usize) -> String {
    (0..len)
        .map(|j| if (x >> j) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// `1/2 sum_x |d0(x) - d1(x)|`.
pub fn total_variation_distance(d0: &Distribution, d1: &Distribution) -> Result<f64> {
    if d0.num_bits != d1.num_bits {
        return Err(Error::DimensionMismatch {
            expected: d0.num_bits,
            actual: d1.num_bits,
        });
    }
    let s: f64 = d0.probs.iter().zip(&d1.probs).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).min(1.0))
}
