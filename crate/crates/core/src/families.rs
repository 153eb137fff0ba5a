//! Seeded circuit families: Simon instances, brickwork random circuits,
//! binary-phase pseudorandom states, finite lists, plus the fan-out
//! extension and the family-mixture distribution.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::qsim::{output_distribution, Circuit, Distribution, Gate, Matrix4, C64, MAX_QUBITS};
use crate::seed::{self, stream};

pub const MAX_SIMON_BITS: usize = 12;
pub const MAX_FAMILY_QUBITS: usize = 14;

/// How the phase function of a phase-state family is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PhaseMode {
    /// `(-1)^{f_k(x)}` with a one-bit keyed hash.
    #[default]
    Binary,
    /// `omega^{f_k(x)}` with `omega = exp(2 pi i / 2^bits)`.
    RootOfUnity { bits: u32 },
    /// `f_k = 0`; the state is `H^n |0^n>`.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Simon circuits on `n` input bits; `shift` pins `s` for every draw.
    Simon {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<u64>,
    },
    RandomCircuit { n: usize, depth: usize },
    PhasePrs {
        n: usize,
        #[serde(default)]
        phase: PhaseMode,
    },
    /// A fixed list, drawn uniformly.
    Finite { circuits: Vec<Circuit> },
}

/// A named, seeded generator of circuits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFamily {
    pub name: String,
    pub spec: FamilySpec,
    #[serde(default)]
    pub seed: u64,
}

/// Secrets and parameters of one draw; enough to rebuild its circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyMetadata {
    Simon(SimonInstance),
    PhasePrs { key: u64, phase: PhaseMode },
    RandomCircuit { gate_seeds: Vec<u64> },
    Finite { index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyDraw {
    pub circuit: Circuit,
    pub metadata: FamilyMetadata,
}

#[derive(Serialize)]
struct FamilyHeader<'a> {
    name: &'a str,
    kind: &'static str,
    num_qubits: usize,
    seed: u64,
}

#[derive(Serialize)]
struct DrawDescriptor<'a> {
    family: FamilyHeader<'a>,
    metadata: &'a FamilyMetadata,
    #[serde(flatten)]
    circuit: &'a Circuit,
}

impl FamilyDraw {
    /// Circuit document with a `family` header and `metadata` block.
    pub fn to_json(&self, family: &CircuitFamily) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DrawDescriptor {
            family: FamilyHeader {
                name: &family.name,
                kind: family.spec.kind(),
                num_qubits: family.num_qubits(),
                seed: family.seed,
            },
            metadata: &self.metadata,
            circuit: &self.circuit,
        })?)
    }
}

impl FamilySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::Simon { .. } => "simon",
            FamilySpec::RandomCircuit { .. } => "random_circuit",
            FamilySpec::PhasePrs { .. } => "phase_prs",
            FamilySpec::Finite { .. } => "finite",
        }
    }
}

impl CircuitFamily {
    pub fn new(name: impl Into<String>, spec: FamilySpec, seed: u64) -> Result<Self> {
        let f = CircuitFamily {
            name: name.into(),
            spec,
            seed,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.spec {
            FamilySpec::Simon { n, shift } => {
                if !(2..=MAX_SIMON_BITS).contains(n) {
                    return Err(invalid("n", format!("Simon input size {n} outside 2..={MAX_SIMON_BITS}")));
                }
                if let Some(s) = shift {
                    check_shift(*n, *s)?;
                }
            }
            FamilySpec::RandomCircuit { n, depth } => {
                if !(2..=MAX_FAMILY_QUBITS).contains(n) {
                    return Err(invalid("n", format!("random circuits need 2..={MAX_FAMILY_QUBITS} qubits")));
                }
                if *depth == 0 {
                    return Err(invalid("depth", "depth must be at least 1"));
                }
            }
            FamilySpec::PhasePrs { n, phase } => {
                if !(1..=MAX_FAMILY_QUBITS).contains(n) {
                    return Err(invalid("n", format!("phase states need 1..={MAX_FAMILY_QUBITS} qubits")));
                }
                if let PhaseMode::RootOfUnity { bits } = phase {
                    if !(1..=32).contains(bits) {
                        return Err(invalid("bits", "phase resolution must be 1..=32 bits"));
                    }
                }
            }
            FamilySpec::Finite { circuits } => {
                let first = circuits.first().ok_or_else(|| invalid("circuits", "empty family"))?;
                for c in circuits {
                    c.validate()?;
                    if c.num_qubits != first.num_qubits || c.num_outcome_bits() != first.num_outcome_bits() {
                        return Err(invalid("circuits", "family members disagree on register sizes"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Qubits in each drawn circuit.
    pub fn num_qubits(&self) -> usize {
        match &self.spec {
            FamilySpec::Simon { n, .. } => 2 * n - 1,
            FamilySpec::RandomCircuit { n, .. } | FamilySpec::PhasePrs { n, .. } => *n,
            FamilySpec::Finite { circuits } => circuits[0].num_qubits,
        }
    }

    /// Bits in each measurement outcome.
    pub fn num_outcome_bits(&self) -> usize {
        match &self.spec {
            FamilySpec::Simon { n, .. } => *n,
            FamilySpec::RandomCircuit { n, .. } | FamilySpec::PhasePrs { n, .. } => *n,
            FamilySpec::Finite { circuits } => circuits[0].num_outcome_bits(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.spec, FamilySpec::Finite { .. })
    }

    /// Deterministic draw for `draw_seed`.
    pub fn draw(&self, draw_seed: u64) -> Result<FamilyDraw> {
        let s = seed::derive_path(self.seed, &[stream::DRAW, draw_seed]);
        let mut rng = seed::rng(s);
        match &self.spec {
            FamilySpec::Simon { n, shift } => {
                let shift = match shift {
                    Some(v) => *v,
                    None => rng.random_range(1..(1u64 << n)),
                };
                let inst = SimonInstance::generate(*n, shift, rng.random())?;
                Ok(FamilyDraw {
                    circuit: inst.circuit(),
                    metadata: FamilyMetadata::Simon(inst),
                })
            }
            FamilySpec::RandomCircuit { n, depth } => {
                let gate_seeds = brickwork_pairs(*n, *depth)
                    .iter()
                    .enumerate()
                    .map(|(i, _)| seed::derive_path(s, &[stream::GATE, i as u64]))
                    .collect::<Vec<_>>();
                let circuit = brickwork_circuit(*n, *depth, &gate_seeds)?;
                Ok(FamilyDraw {
                    circuit,
                    metadata: FamilyMetadata::RandomCircuit { gate_seeds },
                })
            }
            FamilySpec::PhasePrs { n, phase } => {
                let key: u64 = rng.random();
                Ok(FamilyDraw {
                    circuit: phase_state_circuit(*n, key, *phase),
                    metadata: FamilyMetadata::PhasePrs { key, phase: *phase },
                })
            }
            FamilySpec::Finite { circuits } => {
                let index = rng.random_range(0..circuits.len());
                Ok(FamilyDraw {
                    circuit: circuits[index].clone(),
                    metadata: FamilyMetadata::Finite { index },
                })
            }
        }
    }

    /// Every member, for finite families.
    pub fn enumerate(&self) -> Option<Vec<FamilyDraw>> {
        match &self.spec {
            FamilySpec::Finite { circuits } => Some(
                circuits
                    .iter()
                    .enumerate()
                    .map(|(index, c)| FamilyDraw {
                        circuit: c.clone(),
                        metadata: FamilyMetadata::Finite { index },
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Rebuild a drawn circuit from its metadata alone.
    pub fn reconstruct(&self, metadata: &FamilyMetadata) -> Result<Circuit> {
        match (&self.spec, metadata) {
            (FamilySpec::Simon { .. }, FamilyMetadata::Simon(inst)) => {
                SimonInstance::from_table(inst.n, inst.shift, inst.table.clone()).map(|i| i.circuit())
            }
            (FamilySpec::RandomCircuit { n, depth }, FamilyMetadata::RandomCircuit { gate_seeds }) => {
                brickwork_circuit(*n, *depth, gate_seeds)
            }
            (FamilySpec::PhasePrs { n, .. }, FamilyMetadata::PhasePrs { key, phase }) => {
                Ok(phase_state_circuit(*n, *key, *phase))
            }
            (FamilySpec::Finite { circuits }, FamilyMetadata::Finite { index }) => circuits
                .get(*index)
                .cloned()
                .ok_or_else(|| invalid("index", "member index out of range")),
            _ => Err(invalid("metadata", "metadata does not belong to this family")),
        }
    }
}

fn check_shift(n: usize, s: u64) -> Result<()> {
    if s == 0 {
        return Err(invalid("shift", "Simon shift must be nonzero (f would not be 2-to-1)"));
    }
    if s >> n != 0 {
        return Err(invalid("shift", format!("shift {s:#x} does not fit {n} bits")));
    }
    Ok(())
}

/// Hidden-shift instance: `f(x) = f(y)` iff `y in {x, x ^ s}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SimonRecord", into = "SimonRecord")]
pub struct SimonInstance {
    pub n: usize,
    pub shift: u64,
    pub table: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimonRecord {
    n: usize,
    shift: String,
    table: Vec<String>,
}

impl From<SimonInstance> for SimonRecord {
    fn from(s: SimonInstance) -> Self {
        SimonRecord {
            n: s.n,
            shift: format!("{:x}", s.shift),
            table: s.table.iter().map(|v| format!("{v:x}")).collect(),
        }
    }
}

impl TryFrom<SimonRecord> for SimonInstance {
    type Error = Error;
    fn try_from(r: SimonRecord) -> Result<Self> {
        let hex = |s: &str| u64::from_str_radix(s, 16).map_err(|e| invalid("table", e.to_string()));
        let table = r.table.iter().map(|s| hex(s)).collect::<Result<Vec<_>>>()?;
        SimonInstance::from_table(r.n, hex(&r.shift)?, table)
    }
}

impl SimonInstance {
    /// Random pairing of the cosets `{x, x ^ s}` onto distinct `(n-1)`-bit values.
    pub fn generate(n: usize, shift: u64, pairing_seed: u64) -> Result<Self> {
        if !(2..=MAX_SIMON_BITS).contains(&n) {
            return Err(invalid("n", format!("Simon input size {n} outside 2..={MAX_SIMON_BITS}")));
        }
        check_shift(n, shift)?;
        let size = 1usize << n;
        let mut values: Vec<u64> = (0..(size as u64 / 2)).collect();
        values.shuffle(&mut seed::rng_at(pairing_seed, &[stream::SHUFFLE]));
        let mut table = vec![u64::MAX; size];
        let mut next = 0;
        for x in 0..size as u64 {
            if table[x as usize] == u64::MAX {
                table[x as usize] = values[next];
                table[(x ^ shift) as usize] = values[next];
                next += 1;
            }
        }
        Ok(SimonInstance { n, shift, table })
    }

    pub fn from_table(n: usize, shift: u64, table: Vec<u64>) -> Result<Self> {
        if !(2..=MAX_SIMON_BITS).contains(&n) {
            return Err(invalid("n", format!("Simon input size {n} outside 2..={MAX_SIMON_BITS}")));
        }
        check_shift(n, shift)?;
        if table.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                actual: table.len(),
            });
        }
        let mut seen = vec![0u8; 1 << (n - 1)];
        for (x, &v) in table.iter().enumerate() {
            if v >> (n - 1) != 0 {
                return Err(invalid("table", format!("value {v:#x} exceeds {} bits", n - 1)));
            }
            if table[x ^ shift as usize] != v {
                return Err(invalid("table", format!("f({x:#x}) != f({x:#x} ^ s)")));
            }
            seen[v as usize] += 1;
        }
        if seen.iter().any(|&c| c != 2) {
            return Err(invalid("table", "function is not exactly 2-to-1"));
        }
        Ok(SimonInstance { n, shift, table })
    }

    /// `H^n . U_f . H^n` on the input register, measuring that register.
    pub fn circuit(&self) -> Circuit {
        let n = self.n;
        let inputs: Vec<usize> = (0..n).collect();
        let mut c = Circuit::new(2 * n - 1);
        for q in 0..n {
            c.push(Gate::H(q));
        }
        c.push(Gate::Oracle {
            inputs: inputs.clone(),
            outputs: (n..2 * n - 1).collect(),
            table: self.table.clone(),
        });
        for q in 0..n {
            c.push(Gate::H(q));
        }
        c.measuring(inputs)
    }
}

/// Simon family over fresh random shifts.
pub fn simon_family(n: usize, seed: u64) -> Result<CircuitFamily> {
    CircuitFamily::new(format!("simon-{n}"), FamilySpec::Simon { n, shift: None }, seed)
}

/// Simon subfamily with every draw sharing `shift`.
pub fn simon_family_with_shift(n: usize, shift: u64, seed: u64) -> Result<CircuitFamily> {
    CircuitFamily::new(
        format!("simon-{n}-s{shift:x}"),
        FamilySpec::Simon {
            n,
            shift: Some(shift),
        },
        seed,
    )
}

pub fn random_circuit_family(n: usize, depth: usize, seed: u64) -> Result<CircuitFamily> {
    CircuitFamily::new(format!("brickwork-{n}x{depth}"), FamilySpec::RandomCircuit { n, depth }, seed)
}

pub fn phase_prs_family(n: usize, key_seed: u64) -> Result<CircuitFamily> {
    phase_family_with_mode(n, PhaseMode::Binary, key_seed)
}

pub fn phase_family_with_mode(n: usize, phase: PhaseMode, key_seed: u64) -> Result<CircuitFamily> {
    CircuitFamily::new(format!("phase-prs-{n}"), FamilySpec::PhasePrs { n, phase }, key_seed)
}

pub fn finite_family(name: impl Into<String>, circuits: Vec<Circuit>) -> Result<CircuitFamily> {
    CircuitFamily::new(name, FamilySpec::Finite { circuits }, 0)
}

/// Neighbour pairs of each brickwork layer, flattened in gate order.
fn brickwork_pairs(n: usize, depth: usize) -> Vec<(usize, usize)> {
    (0..depth)
        .flat_map(|layer| (layer % 2..n.saturating_sub(1)).step_by(2).map(|q| (q, q + 1)))
        .collect()
}

fn brickwork_circuit(n: usize, depth: usize, gate_seeds: &[u64]) -> Result<Circuit> {
    let pairs = brickwork_pairs(n, depth);
    if pairs.len() != gate_seeds.len() {
        return Err(Error::DimensionMismatch {
            expected: pairs.len(),
            actual: gate_seeds.len(),
        });
    }
    let gates = pairs
        .iter()
        .zip(gate_seeds)
        .map(|(&(a, b), &s)| Gate::unitary2(a, b, haar_unitary4(&mut seed::rng(s))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Circuit::with_gates(n, gates))
}

/// Haar-random 4x4 unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`, which makes the decomposition unique.
pub fn haar_unitary4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4 {
    let z = DMatrix::<C64>::from_fn(4, 4, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = [[C64::default(); 4]; 4];
    for c in 0..4 {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for (row, out_row) in out.iter_mut().enumerate() {
            out_row[c] = q[(row, c)] * phase;
        }
    }
    out
}

/// `f_k(x)`: leading bits of SHA-256 over a domain tag, the key and `x`.
pub fn keyed_phase_value(key: u64, x: u64, bits: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(b"vqalab/phase-prf/v1");
    h.update(key.to_le_bytes());
    h.update(x.to_le_bytes());
    let digest = h.finalize();
    let lead = u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"));
    lead >> (64 - bits)
}

fn phase_state_circuit(n: usize, key: u64, mode: PhaseMode) -> Circuit {
    let dim = 1u64 << n;
    let phases: Vec<f64> = match mode {
        PhaseMode::Zero => vec![0.0; dim as usize],
        PhaseMode::Binary => (0..dim).map(|x| PI * keyed_phase_value(key, x, 1) as f64).collect(),
        PhaseMode::RootOfUnity { bits } => (0..dim)
            .map(|x| 2.0 * PI * keyed_phase_value(key, x, bits) as f64 / (1u64 << bits) as f64)
            .collect(),
    };
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::H(q));
    }
    c.push(Gate::PhaseOracle {
        targets: (0..n).collect(),
        phases,
    });
    c
}

/// `C*`: `c` on register A followed by CNOT fan-out from A into a fresh B.
pub fn extend_circuit(c: &Circuit) -> Result<Circuit> {
    c.validate()?;
    let n = c.num_qubits;
    if 2 * n > MAX_QUBITS {
        return Err(Error::CapExceeded {
            what: "extended register",
            value: 2 * n,
            cap: MAX_QUBITS,
        });
    }
    let mut ext = Circuit::new(2 * n);
    ext.gates = c.gates.clone();
    for q in 0..n {
        ext.push(Gate::Cnot {
            control: q,
            target: n + q,
        });
    }
    ext.measure = c.measure.clone();
    Ok(ext)
}

/// `D_F`: mean of the exact per-circuit distributions. Finite families
/// average over every member; other families average `num_draws` draws.
pub fn family_mixture_distribution(fam: &CircuitFamily, num_draws: usize, seed: u64) -> Result<Distribution> {
    let members = member_distributions(fam, num_draws, seed)?;
    Distribution::mean_of(&members)
}

/// Exact distributions of the family members used for family-level averages.
pub fn member_distributions(fam: &CircuitFamily, num_draws: usize, seed: u64) -> Result<Vec<Distribution>> {
    if let Some(all) = fam.enumerate() {
        return all.par_iter().map(|d| output_distribution(&d.circuit)).collect();
    }
    if num_draws == 0 {
        return Err(invalid("num_draws", "need at least one draw"));
    }
    (0..num_draws)
        .into_par_iter()
        .map(|i| output_distribution(&fam.draw(seed::derive(seed, i as u64))?.circuit))
        .collect()
}
