//! Brute-force minimum-size sampler search at micro scale.
//!
//! A sampler reads `r` fresh uniform bits and evaluates a straight-line
//! program of AND/OR/XOR/NOT gates. Wire 0 is the constant 0, wires
//! `1..=r` are the random bits, and gate `k` drives wire `r + 1 + k`. Wire
//! values are stored as truth tables over all `2^r` random inputs, so every
//! exact output distribution is a vector of counts out of `2^r`.
//!
//! Enumeration goes breadth-first by gate count and yields one sampler per
//! distinct output distribution, the first (hence smallest) one found.
//! Closeness to a sample batch is exact total variation distance to its
//! empirical distribution; that serves both the description-aware and the
//! description-free variant of the problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::qsim::{Distribution, SampleBatch, Sampler};

pub const MAX_OUTPUT_BITS: usize = 4;
pub const MAX_RANDOM_BITS: usize = 6;
pub const MAX_SIZE_BOUND: usize = 5;
/// Default cap on the estimated number of (state, output tuple) evaluations.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum McspGate {
    And { a: usize, b: usize },
    Or { a: usize, b: usize },
    Xor { a: usize, b: usize },
    Not { a: usize },
}

impl McspGate {
    fn inputs(&self) -> (usize, Option<usize>) {
        match *self {
            McspGate::And { a, b } | McspGate::Or { a, b } | McspGate::Xor { a, b } => (a, Some(b)),
            McspGate::Not { a } => (a, None),
        }
    }

    fn eval(&self, w: &[u64], mask: u64) -> u64 {
        match *self {
            McspGate::And { a, b } => w[a] & w[b],
            McspGate::Or { a, b } => w[a] | w[b],
            McspGate::Xor { a, b } => w[a] ^ w[b],
            McspGate::Not { a } => !w[a] & mask,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            McspGate::And { .. } => "and",
            McspGate::Or { .. } => "or",
            McspGate::Xor { .. } => "xor",
            McspGate::Not { .. } => "not",
        }
    }
}

/// A straight-line sampler on `r` random bits with `outputs.len()` output bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroSampler {
    pub r: usize,
    pub gates: Vec<McspGate>,
    /// Output bit `j` is the value of wire `outputs[j]`.
    pub outputs: Vec<usize>,
}

fn table_mask(r: usize) -> u64 {
    if r >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << r)) - 1
    }
}

/// Truth tables of the constant and random wires.
fn base_wires(r: usize) -> Vec<u64> {
    let mut w = vec![0u64];
    for i in 0..r {
        let mut t = 0u64;
        for z in 0..1u64 << r {
            t |= ((z >> i) & 1) << z;
        }
        w.push(t);
    }
    w
}

fn output_counts(wires: &[u64], outputs: &[usize], r: usize) -> Vec<u32> {
    let mut counts = vec![0u32; 1 << outputs.len()];
    for z in 0..1u32 << r {
        let mut x = 0usize;
        for (j, &o) in outputs.iter().enumerate() {
            x |= (((wires[o] >> z) & 1) as usize) << j;
        }
        counts[x] += 1;
    }
    counts
}

impl MicroSampler {
    pub fn n(&self) -> usize {
        self.outputs.len()
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn num_wires(&self) -> usize {
        1 + self.r + self.gates.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.r > MAX_RANDOM_BITS {
            return Err(invalid("r", format!("at most {MAX_RANDOM_BITS} random bits")));
        }
        if self.outputs.is_empty() || self.outputs.len() > 16 {
            return Err(invalid("outputs", "need 1..=16 output bits"));
        }
        for (k, g) in self.gates.iter().enumerate() {
            let wire = 1 + self.r + k;
            let (a, b) = g.inputs();
            if a >= wire || b.is_some_and(|b| b >= wire) {
                return Err(invalid("gates", format!("gate {k} reads a wire that is not yet defined")));
            }
        }
        if let Some(&o) = self.outputs.iter().find(|&&o| o >= self.num_wires()) {
            return Err(invalid("outputs", format!("wire {o} does not exist")));
        }
        Ok(())
    }

    /// Truth table of every wire.
    pub fn wire_tables(&self) -> Vec<u64> {
        let mask = table_mask(self.r);
        let mut w = base_wires(self.r);
        for g in &self.gates {
            let v = g.eval(&w, mask);
            w.push(v);
        }
        w
    }

    /// Exact output counts out of `2^r`, indexed by outcome.
    pub fn counts(&self) -> Vec<u32> {
        output_counts(&self.wire_tables(), &self.outputs, self.r)
    }

    pub fn exact_distribution(&self) -> Result<Distribution> {
        self.validate()?;
        let total = (1u64 << self.r) as f64;
        Distribution::new(self.n(), self.counts().iter().map(|&c| c as f64 / total).collect())
    }

    /// `m` samples from the exact distribution.
    pub fn sample(&self, m: usize, seed: u64) -> Result<SampleBatch> {
        Ok(Sampler::new(&self.exact_distribution()?).batch(m, seed, "micro_sampler"))
    }

    /// Evaluate gate by gate on one assignment of the random bits.
    pub fn eval(&self, randomness: u64) -> u64 {
        let mut w: Vec<bool> = std::iter::once(false)
            .chain((0..self.r).map(|i| (randomness >> i) & 1 == 1))
            .collect();
        for g in &self.gates {
            let v = match *g {
                McspGate::And { a, b } => w[a] && w[b],
                McspGate::Or { a, b } => w[a] || w[b],
                McspGate::Xor { a, b } => w[a] ^ w[b],
                McspGate::Not { a } => !w[a],
            };
            w.push(v);
        }
        self.outputs
            .iter()
            .enumerate()
            .map(|(j, &o)| (w[o] as u64) << j)
            .sum()
    }
}

fn wire_name(w: usize) -> String {
    format!("w{w}")
}

impl fmt::Display for MicroSampler {
    /// Netlist text: an `inputs` line, one line per gate, an `outputs` line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs {}", self.r)?;
        for (k, g) in self.gates.iter().enumerate() {
            let (a, b) = g.inputs();
            write!(f, "{} = {} {}", wire_name(1 + self.r + k), g.name(), wire_name(a))?;
            if let Some(b) = b {
                write!(f, " {}", wire_name(b))?;
            }
            writeln!(f)?;
        }
        let outs: Vec<String> = self.outputs.iter().map(|&o| wire_name(o)).collect();
        writeln!(f, "outputs {}", outs.join(" "))
    }
}

impl FromStr for MicroSampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_wire = |t: &str| -> Result<usize> {
            t.strip_prefix('w')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| invalid("netlist", format!("bad wire `{t}`")))
        };
        let mut r = None;
        let mut gates = Vec::new();
        let mut outputs = None;
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["inputs", k] => r = Some(k.parse().map_err(|_| invalid("netlist", "bad input count"))?),
                ["outputs", rest @ ..] => outputs = Some(rest.iter().map(|t| parse_wire(t)).collect::<Result<Vec<_>>>()?),
                [dst, "=", op, args @ ..] => {
                    let r = r.ok_or_else(|| invalid("netlist", "`inputs` must come first"))?;
                    if parse_wire(dst)? != 1 + r + gates.len() {
                        return Err(invalid("netlist", format!("gate output `{dst}` out of order")));
                    }
                    let args = args.iter().map(|t| parse_wire(t)).collect::<Result<Vec<_>>>()?;
                    gates.push(match (*op, args.as_slice()) {
                        ("and", &[a, b]) => McspGate::And { a, b },
                        ("or", &[a, b]) => McspGate::Or { a, b },
                        ("xor", &[a, b]) => McspGate::Xor { a, b },
                        ("not", &[a]) => McspGate::Not { a },
                        _ => return Err(invalid("netlist", format!("bad gate line `{line}`"))),
                    });
                }
                _ => return Err(invalid("netlist", format!("unrecognized line `{line}`"))),
            }
        }
        let s = MicroSampler {
            r: r.ok_or_else(|| invalid("netlist", "missing `inputs`"))?,
            gates,
            outputs: outputs.ok_or_else(|| invalid("netlist", "missing `outputs`"))?,
        };
        s.validate()?;
        Ok(s)
    }
}

fn gates_on(w: usize) -> f64 {
    (3 * w * w.saturating_sub(1) / 2 + w) as f64
}

/// Estimated number of output-tuple evaluations for an enumeration, without
/// credit for deduplication.
pub fn estimate_enumeration(n: usize, r: usize, size_bound: usize) -> f64 {
    let mut states = 1.0;
    let mut total = 0.0;
    for s in 0..=size_bound {
        let w = 1 + r + s;
        total += states * (w as f64).powi(n as i32);
        states *= gates_on(w);
    }
    total
}

fn check_bounds(n: usize, r: usize, size_bound: usize, budget: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "need at least one output bit"));
    }
    let estimate = estimate_enumeration(n, r, size_bound);
    if n > MAX_OUTPUT_BITS || r > MAX_RANDOM_BITS || size_bound > MAX_SIZE_BOUND || estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    Ok(())
}

#[derive(Clone)]
struct State {
    gates: Vec<McspGate>,
    wires: Vec<u64>,
}

/// Lazy canonical enumeration; see [`enumerate_samplers`].
pub struct SamplerEnumeration {
    n: usize,
    r: usize,
    size_bound: usize,
    level: usize,
    frontier: Vec<State>,
    seen_states: HashSet<Vec<u64>>,
    seen_dists: HashSet<Vec<u32>>,
    pending: VecDeque<MicroSampler>,
    done: bool,
}

/// One sampler per distinct output distribution with at most `size_bound`
/// gates, in order of increasing size.
pub fn enumerate_samplers(n: usize, r: usize, size_bound: usize) -> Result<SamplerEnumeration> {
    enumerate_samplers_with_budget(n, r, size_bound, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_samplers_with_budget(n: usize, r: usize, size_bound: usize, budget: f64) -> Result<SamplerEnumeration> {
    check_bounds(n, r, size_bound, budget)?;
    let wires = base_wires(r);
    let mut key = wires.clone();
    key.sort_unstable();
    Ok(SamplerEnumeration {
        n,
        r,
        size_bound,
        level: 0,
        frontier: vec![State { gates: Vec::new(), wires }],
        seen_states: HashSet::from([key]),
        seen_dists: HashSet::new(),
        pending: VecDeque::new(),
        done: false,
    })
}

/// Output tuples over `w` wires, first output varying slowest.
fn tuples(n: usize, w: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = w.pow(n as u32);
    (0..total).map(move |mut k| {
        let mut t = vec![0; n];
        for j in (0..n).rev() {
            t[j] = k % w;
            k /= w;
        }
        t
    })
}

impl SamplerEnumeration {
    /// Distinct distributions of the current level, then advance the frontier.
    fn process_level(&mut self) {
        let (n, r) = (self.n, self.r);
        let found: Vec<Vec<(Vec<u32>, MicroSampler)>> = self
            .frontier
            .par_iter()
            .map(|st| {
                let mut local = HashSet::new();
                tuples(n, st.wires.len())
                    .filter_map(|outs| {
                        let c = output_counts(&st.wires, &outs, r);
                        local.insert(c.clone()).then(|| {
                            (
                                c,
                                MicroSampler {
                                    r,
                                    gates: st.gates.clone(),
                                    outputs: outs,
                                },
                            )
                        })
                    })
                    .collect()
            })
            .collect();
        for (c, s) in found.into_iter().flatten() {
            if self.seen_dists.insert(c) {
                self.pending.push_back(s);
            }
        }

        if self.level == self.size_bound {
            self.frontier.clear();
            self.done = true;
            return;
        }
        let mask = table_mask(r);
        let children: Vec<Vec<(Vec<u64>, State)>> = self
            .frontier
            .par_iter()
            .map(|st| {
                let w = st.wires.len();
                let mut out = Vec::new();
                for a in 0..w {
                    let mut cands = vec![McspGate::Not { a }];
                    for b in a + 1..w {
                        cands.extend([McspGate::And { a, b }, McspGate::Or { a, b }, McspGate::Xor { a, b }]);
                    }
                    for g in cands {
                        let v = g.eval(&st.wires, mask);
                        if st.wires.contains(&v) {
                            continue;
                        }
                        let mut wires = st.wires.clone();
                        wires.push(v);
                        let mut key = wires.clone();
                        key.sort_unstable();
                        let mut gates = st.gates.clone();
                        gates.push(g);
                        out.push((key, State { gates, wires }));
                    }
                }
                out
            })
            .collect();
        let mut next = Vec::new();
        for (key, st) in children.into_iter().flatten() {
            if self.seen_states.insert(key) {
                next.push(st);
            }
        }
        self.frontier = next;
        self.level += 1;
    }
}

impl Iterator for SamplerEnumeration {
    type Item = MicroSampler;

    fn next(&mut self) -> Option<MicroSampler> {
        loop {
            if let Some(s) = self.pending.pop_front() {
                return Some(s);
            }
            if self.done || self.frontier.is_empty() {
                return None;
            }
            self.process_level();
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McspVariant {
    /// The distinguisher may read the sampler's description.
    #[default]
    Described,
    /// The distinguisher only sees samples.
    Oblivious,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McspParams {
    pub random_bits: usize,
    pub size_bound: usize,
    pub tolerance: f64,
    #[serde(default)]
    pub variant: McspVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum McspAnswer {
    Yes,
    No,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McspVerdict {
    pub answer: McspAnswer,
    pub witness: Option<MicroSampler>,
    /// Distance of the witness, or the smallest distance seen on NO.
    pub achieved_distance: f64,
    pub variant: McspVariant,
    pub candidates_examined: usize,
}

fn empirical_counts(batch: &SampleBatch) -> Vec<u64> {
    let mut c = vec![0u64; 1 << batch.num_bits];
    for &x in &batch.samples {
        c[x as usize] += 1;
    }
    c
}

fn tvd_counts(emp: &[u64], m: u64, cand: &[u32], r: usize) -> f64 {
    let total = (1u64 << r) as f64;
    let m = m as f64;
    0.5 * emp
        .iter()
        .zip(cand)
        .map(|(&e, &c)| (e as f64 / m - c as f64 / total).abs())
        .sum::<f64>()
}

/// Smallest sampler whose exact distribution is within `tolerance` TVD of
/// the empirical distribution of `samples`.
pub fn samp_mcsp_bruteforce(samples: &SampleBatch, params: &McspParams) -> Result<McspVerdict> {
    samp_mcsp_with_budget(samples, params, DEFAULT_ENUMERATION_BUDGET)
}

pub fn samp_mcsp_with_budget(samples: &SampleBatch, params: &McspParams, budget: f64) -> Result<McspVerdict> {
    if !(params.tolerance >= 0.0 && params.tolerance.is_finite()) {
        return Err(invalid("tolerance", "must be a nonnegative number"));
    }
    samples.validate()?;
    let n = samples.num_bits;
    let r = params.random_bits;
    let enumeration = enumerate_samplers_with_budget(n, r, params.size_bound, budget)?;
    let emp = empirical_counts(samples);
    let m = samples.len() as u64;
    let mut best = f64::INFINITY;
    let mut examined = 0;
    for s in enumeration {
        examined += 1;
        let counts = s.counts();
        let d = if m == 0 { 0.0 } else { tvd_counts(&emp, m, &counts, r) };
        best = best.min(d);
        if d <= params.tolerance {
            let mut resim = vec![0u32; 1 << n];
            for z in 0..1u64 << r {
                resim[s.eval(z) as usize] += 1;
            }
            let recheck = if m == 0 { 0.0 } else { tvd_counts(&emp, m, &resim, r) };
            if recheck > params.tolerance + 1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "witness re-check failed: {recheck} > {}",
                    params.tolerance
                )));
            }
            return Ok(McspVerdict {
                answer: McspAnswer::Yes,
                witness: Some(s),
                achieved_distance: d,
                variant: params.variant,
                candidates_examined: examined,
            });
        }
    }
    Ok(McspVerdict {
        answer: McspAnswer::No,
        witness: None,
        achieved_distance: best,
        variant: params.variant,
        candidates_examined: examined,
    })
}

/// `false` ("classical") iff a sampler of at most `declared_spoofer_size`
/// gates fits the samples; `true` ("quantum") otherwise.
pub fn universal_verifier(
    samples: &SampleBatch,
    declared_spoofer_size: usize,
    tolerance: f64,
    random_bits: usize,
) -> Result<bool> {
    let v = samp_mcsp_bruteforce(
        samples,
        &McspParams {
            random_bits,
            size_bound: declared_spoofer_size,
            tolerance,
            variant: McspVariant::Oblivious,
        },
    )?;
    Ok(v.answer == McspAnswer::No)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_zero_single_bit_is_constant_and_random() {
        let all: Vec<_> = enumerate_samplers(1, 1, 0).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].counts(), vec![2, 0]);
        assert_eq!(all[1].counts(), vec![1, 1]);
    }

    #[test]
    fn netlist_round_trip() {
        let s = MicroSampler {
            r: 2,
            gates: vec![McspGate::And { a: 1, b: 2 }, McspGate::Not { a: 3 }],
            outputs: vec![4, 1],
        };
        let text = s.to_string();
        assert_eq!(text.parse::<MicroSampler>().unwrap(), s);
        assert!("inputs 1\nw2 = not w5\noutputs w2".parse::<MicroSampler>().is_err());
    }

    #[test]
    fn eval_agrees_with_tables() {
        let s = MicroSampler {
            r: 2,
            gates: vec![McspGate::Xor { a: 1, b: 2 }],
            outputs: vec![3, 0],
        };
        assert_eq!(s.eval(0b01), 1);
        assert_eq!(s.eval(0b11), 0);
        assert_eq!(s.counts(), vec![2, 2, 0, 0]);
    }

    #[test]
    fn refuses_outside_box() {
        assert!(matches!(enumerate_samplers(5, 1, 0), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(enumerate_samplers(4, 6, 5), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(enumerate_samplers(1, 7, 0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn empty_batch_is_vacuously_classical() {
        let b = SampleBatch::new(2, vec![], "t", 0).unwrap();
        assert!(!universal_verifier(&b, 0, 0.0, 1).unwrap());
    }
}
