//! Fixed goodness-of-fit battery.
//!
//! Tests a batch against a reference distribution (the circuit's `D_C` when a
//! circuit is supplied, uniform otherwise) with per-bit frequency,
//! pairwise-bit correlation, collision-count and, with a circuit, XEB
//! statistics. Each test yields a two-sided p-value; the batch is flagged
//! (decision 1) when any p-value falls below `alpha / #tests`. Passing the
//! battery says nothing about distinguishers outside it.

use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::erf::erfc;

use super::{Distinguisher, DistinguisherInput, DistinguisherResult};
use crate::error::{invalid, Error, Result};
use crate::qsim::{output_distribution, Distribution, SampleBatch};

/// Family-wise false-positive rate of a single battery run.
pub const DEFAULT_BATTERY_ALPHA: f64 = 1e-3;
const DEGENERATE_VAR: f64 = 1e-18;
/// Below this expected count the collision test uses a Poisson tail.
const POISSON_REGIME: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryTest {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryOutcome {
    pub decision: bool,
    pub tests: Vec<BatteryTest>,
}

impl BatteryOutcome {
    pub fn min_p_value(&self) -> f64 {
        self.tests.iter().map(|t| t.p_value).fold(1.0, f64::min)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Battery {
    pub alpha: f64,
}

impl Default for Battery {
    fn default() -> Self {
        Battery {
            alpha: DEFAULT_BATTERY_ALPHA,
        }
    }
}

/// First and second moments of the `+-1` spin variables under a reference.
struct Moments {
    bits: Vec<f64>,
    pairs: Vec<f64>,
    q2: f64,
    q3: f64,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn spin(x: u64, i: usize) -> f64 {
    1.0 - 2.0 * ((x >> i) & 1) as f64
}

impl Moments {
    fn of(d: &Distribution) -> Moments {
        let n = d.num_bits();
        let npairs = n * n.saturating_sub(1) / 2;
        let probs = d.probs();
        let (lo, hi) = probs
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        if hi - lo <= 1e-15 {
            let inv = 1.0 / probs.len() as f64;
            return Moments {
                bits: vec![0.0; n],
                pairs: vec![0.0; npairs],
                q2: inv,
                q3: inv * inv,
            };
        }
        let mut bits = vec![0.0; n];
        let mut pairs = vec![0.0; npairs];
        for (x, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let s: Vec<f64> = (0..n).map(|i| spin(x as u64, i)).collect();
            for i in 0..n {
                bits[i] += p * s[i];
                for j in i + 1..n {
                    pairs[pair_index(n, i, j)] += p * s[i] * s[j];
                }
            }
        }
        Moments {
            bits,
            pairs,
            q2: d.power_sum(2),
            q3: d.power_sum(3),
        }
    }
}

/// Two-sided normal p-value; degenerate variance means exact agreement is
/// required.
fn z_test(observed: f64, expected: f64, var: f64) -> (f64, f64) {
    if var <= DEGENERATE_VAR {
        let p = if (observed - expected).abs() > 1e-9 { 0.0 } else { 1.0 };
        return (if p == 0.0 { f64::MAX } else { 0.0 }, p);
    }
    let z = (observed - expected) / var.sqrt();
    (z, erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
}

impl Battery {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", format!("{alpha} is not in (0, 1)")));
        }
        Ok(Battery { alpha })
    }

    /// Run every test of the battery. `reference = None` means uniform;
    /// `include_xeb` adds the XEB statistic against the reference.
    pub fn run(&self, batch: &SampleBatch, reference: Option<&Distribution>, include_xeb: bool) -> Result<BatteryOutcome> {
        let n = batch.num_bits;
        let uniform;
        let reference = match reference {
            Some(r) => r,
            None => {
                uniform = Distribution::uniform(n)?;
                &uniform
            }
        };
        if reference.num_bits() != n {
            return Err(Error::DimensionMismatch {
                expected: reference.num_bits(),
                actual: n,
            });
        }
        let m = batch.len();
        if m == 0 {
            return Ok(BatteryOutcome {
                decision: false,
                tests: Vec::new(),
            });
        }
        let mf = m as f64;
        let mom = Moments::of(reference);
        let mut raw: Vec<(String, f64, f64)> = Vec::new();

        let mut bit_sums = vec![0.0; n];
        let mut pair_sums = vec![0.0; mom.pairs.len()];
        for &x in &batch.samples {
            let s: Vec<f64> = (0..n).map(|i| spin(x, i)).collect();
            for i in 0..n {
                bit_sums[i] += s[i];
                for j in i + 1..n {
                    pair_sums[pair_index(n, i, j)] += s[i] * s[j];
                }
            }
        }
        for i in 0..n {
            let e = mom.bits[i];
            let (z, p) = z_test(bit_sums[i] / mf, e, (1.0 - e * e) / mf);
            raw.push((format!("bit_frequency[{i}]"), z, p));
        }
        for i in 0..n {
            for j in i + 1..n {
                let k = pair_index(n, i, j);
                let e = mom.pairs[k];
                let (z, p) = z_test(pair_sums[k] / mf, e, (1.0 - e * e) / mf);
                raw.push((format!("pair_correlation[{i},{j}]"), z, p));
            }
        }
        if m >= 2 {
            raw.push(collision_test(batch, &mom));
        }
        if include_xeb {
            let score = batch.samples.iter().map(|&x| reference.prob(x)).sum::<f64>() / mf;
            let (z, p) = z_test(score, mom.q2, (mom.q3 - mom.q2 * mom.q2).max(0.0) / mf);
            raw.push(("xeb".into(), z, p));
        }

        let cutoff = self.alpha / raw.len() as f64;
        let tests: Vec<BatteryTest> = raw
            .into_iter()
            .map(|(name, statistic, p_value)| BatteryTest {
                name,
                statistic,
                p_value,
                reject: p_value < cutoff,
            })
            .collect();
        Ok(BatteryOutcome {
            decision: tests.iter().any(|t| t.reject),
            tests,
        })
    }
}

/// Number of colliding pairs against its reference mean
/// `C(m,2) q2` and variance `C(m,2)(q2 - q2^2) + 6 C(m,3)(q3 - q2^2)`.
fn collision_test(batch: &SampleBatch, mom: &Moments) -> (String, f64, f64) {
    let m = batch.len() as f64;
    let pairs = m * (m - 1.0) / 2.0;
    let triples = m * (m - 1.0) * (m - 2.0) / 6.0;
    let observed = batch.collision_pairs() as f64;
    let mean = pairs * mom.q2;
    let var = (pairs * (mom.q2 - mom.q2 * mom.q2) + 6.0 * triples * (mom.q3 - mom.q2 * mom.q2)).max(0.0);
    let name = "collisions".to_string();
    if var <= DEGENERATE_VAR {
        let (z, p) = z_test(observed, mean, 0.0);
        return (name, z, p);
    }
    let z = (observed - mean) / var.sqrt();
    if mean < POISSON_REGIME {
        let pois = Poisson::new(mean.max(1e-300)).expect("positive rate");
        let c = observed as u64;
        let lower = pois.cdf(c);
        let upper = if c == 0 { 1.0 } else { pois.sf(c - 1) };
        return (name, z, (2.0 * lower.min(upper)).min(1.0));
    }
    (name, z, erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
}

/// Battery decision for one batch, optionally against a circuit's `D_C`.
pub fn battery_distinguisher(batch: &SampleBatch, reference: Option<&Distribution>) -> Result<DistinguisherResult> {
    let out = Battery::default().run(batch, reference, reference.is_some())?;
    Ok(DistinguisherResult {
        decision: out.decision,
        score: out.min_p_value(),
    })
}

impl Distinguisher for Battery {
    fn name(&self) -> String {
        "battery".into()
    }

    fn decide(&self, input: &DistinguisherInput<'_>) -> Result<DistinguisherResult> {
        let computed;
        let reference = match (input.exact, input.circuit) {
            (Some(d), _) => Some(d),
            (None, Some(c)) => {
                computed = output_distribution(c)?;
                Some(&computed)
            }
            (None, None) => None,
        };
        let out = self.run(input.batch, reference, input.circuit.is_some())?;
        Ok(DistinguisherResult {
            decision: out.decision,
            score: out.min_p_value(),
        })
    }
}
