//! Experiment configuration: parsing, defaults and validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use vqalab_core::cryptocheck::{EfiCandidate, EfiGenerator, DEFAULT_COLLISION_BATCHES, MAX_HAAR_BITS};
use vqalab_core::dvqa::{SimStrategy, DEFAULT_MODULUS_BITS};
use vqalab_core::families::PhaseMode;
use vqalab_core::harness::{GameConfig, DEFAULT_BATCHES_PER_DRAW};
use vqalab_core::mcsp::{self, McspParams, MicroSampler};
use vqalab_core::{CircuitFamily, DistinguisherSpec, Distribution, FamilySpec, SpooferSpec};

use crate::CliError;

/// Bumped whenever the config or report layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Jsonl,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn jsonl(self) -> bool {
        matches!(self, OutputFormat::Jsonl | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format `{other}` (expected jsonl, csv or both)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

/// The file as written by the user; `params` is checked against `kind` later.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: String,
    #[serde(default = "empty_object")]
    params: Value,
    seed: u64,
    #[serde(default)]
    output: OutputSpec,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameParams {
    pub family: CircuitFamily,
    pub spoofer: SpooferSpec,
    pub distinguisher: DistinguisherSpec,
    pub samples_per_side: usize,
    pub num_circuit_draws: usize,
    #[serde(default = "default_batches_per_draw")]
    pub batches_per_draw: usize,
}

fn default_batches_per_draw() -> usize {
    DEFAULT_BATCHES_PER_DRAW
}

impl GameParams {
    pub fn game_config(&self, seed: u64) -> GameConfig {
        GameConfig {
            family: self.family.clone(),
            spoofer: self.spoofer.clone(),
            distinguisher: self.distinguisher.clone(),
            samples_per_side: self.samples_per_side,
            num_circuit_draws: self.num_circuit_draws,
            batches_per_draw: self.batches_per_draw,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XebParams {
    pub n: usize,
    pub depth: usize,
    pub num_circuits: usize,
    pub samples: usize,
    /// Accept iff the score reaches this; `None` means `1.5 / 2^n`.
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimonParams {
    pub n: usize,
    pub samples: usize,
    pub num_draws: usize,
    #[serde(default)]
    pub shift: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrsShadowParams {
    pub n: usize,
    pub samples: usize,
    pub trials: usize,
    #[serde(default)]
    pub phase: PhaseMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnidentifiabilityParams {
    pub family: FamilySpec,
    pub samples: usize,
    pub trials: usize,
    /// Compare a member with itself instead of with a second member.
    #[serde(default)]
    pub control: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarCollisionParams {
    pub n: usize,
    pub samples: usize,
    pub num_distributions: usize,
    #[serde(default = "default_collision_batches")]
    pub batches_per_draw: usize,
}

fn default_collision_batches() -> usize {
    DEFAULT_COLLISION_BATCHES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chi2TailParams {
    pub k: u64,
    pub x: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfiCheckParams {
    pub candidate: EfiCandidate,
    pub samples: usize,
    pub trials: usize,
    #[serde(default = "default_advantage_tolerance")]
    pub tolerance: f64,
}

fn default_advantage_tolerance() -> f64 {
    0.06
}

/// Multi-copy deciders available from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeciderSpec {
    /// Accept iff more than half of the copies equal `target`.
    Majority { target: u64 },
    /// Accept iff any copy equals `target`.
    Contains { target: u64 },
}

impl DeciderSpec {
    pub fn decide(&self, samples: &[u64]) -> bool {
        match *self {
            DeciderSpec::Majority { target } => 2 * samples.iter().filter(|&&x| x == target).count() > samples.len(),
            DeciderSpec::Contains { target } => samples.contains(&target),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridParams {
    pub gen0: EfiGenerator,
    pub gen1: EfiGenerator,
    pub decider: DeciderSpec,
    pub copies: usize,
    pub multi_copy_trials: usize,
    pub challenges: usize,
}

/// Where an MCSP instance's samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSource {
    Planted { sampler: MicroSampler, samples: usize },
    Distribution { dist: Distribution, samples: usize },
    Uniform { n: usize, samples: usize },
    Explicit { n: usize, values: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum McspTask {
    /// Smallest sampler fitting the samples.
    Solve { source: SampleSource, params: McspParams },
    /// The size-threshold verifier: classical iff a small sampler fits.
    Verify {
        source: SampleSource,
        declared_size: usize,
        tolerance: f64,
        random_bits: usize,
    },
    /// Plant every enumerable sampler in the box and try to recover it.
    PlantedSweep {
        max_outputs: usize,
        max_random_bits: usize,
        max_size: usize,
        samples: usize,
        tolerance: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvqaParams {
    #[serde(default = "default_modulus_bits")]
    pub modulus_bits: u32,
    pub rounds: usize,
    pub transcripts: usize,
    pub strategy: SimStrategy,
    #[serde(default = "one")]
    pub key_draws: usize,
}

fn default_modulus_bits() -> u32 {
    DEFAULT_MODULUS_BITS
}

fn one() -> usize {
    1
}

/// One experiment with its typed parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    VqaGame(GameParams),
    UvqaGame(GameParams),
    Xeb(XebParams),
    Simon(SimonParams),
    PrsShadow(PrsShadowParams),
    Unidentifiability(UnidentifiabilityParams),
    HaarCollision(HaarCollisionParams),
    Chi2Tail(Chi2TailParams),
    EfiCheck(EfiCheckParams),
    Hybrid(HybridParams),
    Mcsp(McspTask),
    Dvqa(DvqaParams),
}

/// A parameter as shown by `vqalab list`.
pub struct ParamDoc {
    pub name: &'static str,
    pub ty: &'static str,
    pub default: Option<&'static str>,
}

fn req(name: &'static str, ty: &'static str) -> ParamDoc {
    ParamDoc { name, ty, default: None }
}

fn opt(name: &'static str, ty: &'static str, default: &'static str) -> ParamDoc {
    ParamDoc {
        name,
        ty,
        default: Some(default),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    VqaGame,
    UvqaGame,
    Xeb,
    Simon,
    PrsShadow,
    Unidentifiability,
    HaarCollision,
    Chi2Tail,
    EfiCheck,
    Hybrid,
    Mcsp,
    Dvqa,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 12] = [
        ExperimentKind::VqaGame,
        ExperimentKind::UvqaGame,
        ExperimentKind::Xeb,
        ExperimentKind::Simon,
        ExperimentKind::PrsShadow,
        ExperimentKind::Unidentifiability,
        ExperimentKind::HaarCollision,
        ExperimentKind::Chi2Tail,
        ExperimentKind::EfiCheck,
        ExperimentKind::Hybrid,
        ExperimentKind::Mcsp,
        ExperimentKind::Dvqa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VqaGame => "vqa-game",
            ExperimentKind::UvqaGame => "uvqa-game",
            ExperimentKind::Xeb => "xeb",
            ExperimentKind::Simon => "simon",
            ExperimentKind::PrsShadow => "prs-shadow",
            ExperimentKind::Unidentifiability => "unidentifiability",
            ExperimentKind::HaarCollision => "haar-collision",
            ExperimentKind::Chi2Tail => "chi2-tail",
            ExperimentKind::EfiCheck => "efi-check",
            ExperimentKind::Hybrid => "hybrid",
            ExperimentKind::Mcsp => "mcsp",
            ExperimentKind::Dvqa => "dvqa",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::VqaGame => "verification game; the distinguisher sees the circuit",
            ExperimentKind::UvqaGame => "verification game without the spoofer's program",
            ExperimentKind::Xeb => "cross-entropy scores of honest and uniform samples",
            ExperimentKind::Simon => "Simon acceptance of honest and uniform samples",
            ExperimentKind::PrsShadow => "phase-state samples against Haar-state samples",
            ExperimentKind::Unidentifiability => "can samples be matched to their circuit",
            ExperimentKind::HaarCollision => "collision probability of Haar-state outcomes",
            ExperimentKind::Chi2Tail => "two-sided chi-squared tail frequency",
            ExperimentKind::EfiCheck => "statistical farness and battery indistinguishability",
            ExperimentKind::Hybrid => "multi-copy to single-copy hybrid amplification",
            ExperimentKind::Mcsp => "brute-force sample circuit minimisation",
            ExperimentKind::Dvqa => "designated-verifier protocol game",
        }
    }

    pub fn params(self) -> Vec<ParamDoc> {
        match self {
            ExperimentKind::VqaGame | ExperimentKind::UvqaGame => vec![
                req("family", "circuit family {name, spec, seed}"),
                req("spoofer", "spoofer spec"),
                req("distinguisher", "distinguisher spec"),
                req("samples_per_side", "integer"),
                req("num_circuit_draws", "integer"),
                opt("batches_per_draw", "integer", "20"),
            ],
            ExperimentKind::Xeb => vec![
                req("n", "integer"),
                req("depth", "integer"),
                req("num_circuits", "integer"),
                req("samples", "integer"),
                opt("threshold", "number", "1.5/2^n"),
            ],
            ExperimentKind::Simon => vec![
                req("n", "integer"),
                req("samples", "integer"),
                req("num_draws", "integer"),
                opt("shift", "integer", "random per draw"),
            ],
            ExperimentKind::PrsShadow => vec![
                req("n", "integer"),
                req("samples", "integer"),
                req("trials", "integer"),
                opt("phase", "phase mode", "binary"),
            ],
            ExperimentKind::Unidentifiability => vec![
                req("family", "family spec"),
                req("samples", "integer"),
                req("trials", "integer"),
                opt("control", "bool", "false"),
            ],
            ExperimentKind::HaarCollision => vec![
                req("n", "integer"),
                req("samples", "integer"),
                req("num_distributions", "integer"),
                opt("batches_per_draw", "integer", "10000"),
            ],
            ExperimentKind::Chi2Tail => vec![req("k", "integer"), req("x", "number"), req("trials", "integer")],
            ExperimentKind::EfiCheck => vec![
                req("candidate", "{gen0, gen1, lambda, farness_threshold}"),
                req("samples", "integer"),
                req("trials", "integer"),
                opt("tolerance", "number", "0.06"),
            ],
            ExperimentKind::Hybrid => vec![
                req("gen0", "generator"),
                req("gen1", "generator"),
                req("decider", "majority|contains {target}"),
                req("copies", "integer"),
                req("multi_copy_trials", "integer"),
                req("challenges", "integer"),
            ],
            ExperimentKind::Mcsp => vec![req("task", "solve|verify|planted_sweep (task fields inline)")],
            ExperimentKind::Dvqa => vec![
                opt("modulus_bits", "integer", "32"),
                req("rounds", "integer"),
                req("transcripts", "integer"),
                req("strategy", "one_root_guess|replay|random_response|honest"),
                opt("key_draws", "integer", "1"),
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Validation(format!("kind: unknown experiment `{s}`; run `vqalab list`")))
    }
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::VqaGame(_) => ExperimentKind::VqaGame,
            Experiment::UvqaGame(_) => ExperimentKind::UvqaGame,
            Experiment::Xeb(_) => ExperimentKind::Xeb,
            Experiment::Simon(_) => ExperimentKind::Simon,
            Experiment::PrsShadow(_) => ExperimentKind::PrsShadow,
            Experiment::Unidentifiability(_) => ExperimentKind::Unidentifiability,
            Experiment::HaarCollision(_) => ExperimentKind::HaarCollision,
            Experiment::Chi2Tail(_) => ExperimentKind::Chi2Tail,
            Experiment::EfiCheck(_) => ExperimentKind::EfiCheck,
            Experiment::Hybrid(_) => ExperimentKind::Hybrid,
            Experiment::Mcsp(_) => ExperimentKind::Mcsp,
            Experiment::Dvqa(_) => ExperimentKind::Dvqa,
        }
    }

    fn parse(kind: ExperimentKind, params: Value) -> Result<Self, CliError> {
        fn typed<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, CliError> {
            serde_json::from_value(v).map_err(|e| CliError::Validation(format!("params: {e}")))
        }
        Ok(match kind {
            ExperimentKind::VqaGame => Experiment::VqaGame(typed(params)?),
            ExperimentKind::UvqaGame => Experiment::UvqaGame(typed(params)?),
            ExperimentKind::Xeb => Experiment::Xeb(typed(params)?),
            ExperimentKind::Simon => Experiment::Simon(typed(params)?),
            ExperimentKind::PrsShadow => Experiment::PrsShadow(typed(params)?),
            ExperimentKind::Unidentifiability => Experiment::Unidentifiability(typed(params)?),
            ExperimentKind::HaarCollision => Experiment::HaarCollision(typed(params)?),
            ExperimentKind::Chi2Tail => Experiment::Chi2Tail(typed(params)?),
            ExperimentKind::EfiCheck => Experiment::EfiCheck(typed(params)?),
            ExperimentKind::Hybrid => Experiment::Hybrid(typed(params)?),
            ExperimentKind::Mcsp => Experiment::Mcsp(typed(params)?),
            ExperimentKind::Dvqa => Experiment::Dvqa(typed(params)?),
        })
    }

    /// Parameters with every default filled in.
    pub fn params_value(&self) -> Value {
        let v = match self {
            Experiment::VqaGame(p) | Experiment::UvqaGame(p) => serde_json::to_value(p),
            Experiment::Xeb(p) => serde_json::to_value(p),
            Experiment::Simon(p) => serde_json::to_value(p),
            Experiment::PrsShadow(p) => serde_json::to_value(p),
            Experiment::Unidentifiability(p) => serde_json::to_value(p),
            Experiment::HaarCollision(p) => serde_json::to_value(p),
            Experiment::Chi2Tail(p) => serde_json::to_value(p),
            Experiment::EfiCheck(p) => serde_json::to_value(p),
            Experiment::Hybrid(p) => serde_json::to_value(p),
            Experiment::Mcsp(p) => serde_json::to_value(p),
            Experiment::Dvqa(p) => serde_json::to_value(p),
        };
        v.expect("parameter types serialize")
    }

    /// Cheap checks run before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Validation(format!("params.{field}: {why}")));
        match self {
            Experiment::VqaGame(p) | Experiment::UvqaGame(p) => p.game_config(0).validate().map_err(core_invalid)?,
            Experiment::Xeb(p) => {
                CircuitFamily::new("xeb", FamilySpec::RandomCircuit { n: p.n, depth: p.depth }, 0).map_err(core_invalid)?;
                if p.num_circuits == 0 {
                    return bad("num_circuits", "must be at least 1");
                }
                if p.samples == 0 {
                    return bad("samples", "must be at least 1");
                }
                if let Some(t) = p.threshold {
                    if !t.is_finite() {
                        return bad("threshold", "must be finite");
                    }
                }
            }
            Experiment::Simon(p) => {
                let spec = FamilySpec::Simon { n: p.n, shift: p.shift };
                CircuitFamily::new("simon", spec, 0).map_err(core_invalid)?;
                if p.samples == 0 || p.num_draws == 0 {
                    return bad("samples", "samples and num_draws must be at least 1");
                }
            }
            Experiment::PrsShadow(p) => {
                CircuitFamily::new("phase", FamilySpec::PhasePrs { n: p.n, phase: p.phase }, 0).map_err(core_invalid)?;
                if p.n > MAX_HAAR_BITS {
                    return bad("n", "too many qubits for the Haar model");
                }
                if p.trials == 0 {
                    return bad("trials", "must be at least 1");
                }
            }
            Experiment::Unidentifiability(p) => {
                CircuitFamily::new("family", p.family.clone(), 0).map_err(core_invalid)?;
                if p.trials == 0 {
                    return bad("trials", "must be at least 1");
                }
            }
            Experiment::HaarCollision(p) => {
                if p.n == 0 || p.n > MAX_HAAR_BITS {
                    return bad("n", "must be in 1..=26");
                }
                if p.samples == 0 || p.num_distributions == 0 || p.batches_per_draw == 0 {
                    return bad("samples", "samples, num_distributions and batches_per_draw must be at least 1");
                }
            }
            Experiment::Chi2Tail(p) => {
                if p.k == 0 {
                    return bad("k", "must be at least 1");
                }
                if !(p.x.is_finite() && p.x > 0.0) {
                    return bad("x", "must be positive");
                }
                if p.trials == 0 {
                    return bad("trials", "must be at least 1");
                }
            }
            Experiment::EfiCheck(p) => {
                p.candidate.gen0.distribution().map_err(core_invalid)?;
                p.candidate.gen1.distribution().map_err(core_invalid)?;
                if !(0.0..=1.0).contains(&p.tolerance) {
                    return bad("tolerance", "must lie in [0, 1]");
                }
            }
            Experiment::Hybrid(p) => {
                let d0 = p.gen0.distribution().map_err(core_invalid)?;
                let d1 = p.gen1.distribution().map_err(core_invalid)?;
                if d0.num_bits() != d1.num_bits() {
                    return bad("gen1", "must have the same width as gen0");
                }
                if p.copies == 0 || p.multi_copy_trials == 0 || p.challenges == 0 {
                    return bad("copies", "copies, multi_copy_trials and challenges must be at least 1");
                }
            }
            Experiment::Mcsp(task) => validate_mcsp(task)?,
            Experiment::Dvqa(p) => {
                if !(16..=64).contains(&p.modulus_bits) {
                    return bad("modulus_bits", "must be in 16..=64");
                }
                if p.rounds == 0 || p.transcripts == 0 || p.key_draws == 0 {
                    return bad("rounds", "rounds, transcripts and key_draws must be at least 1");
                }
            }
        }
        Ok(())
    }
}

fn core_invalid(e: vqalab_core::Error) -> CliError {
    CliError::Validation(format!("params: {e}"))
}

fn source_width(source: &SampleSource) -> Result<usize, CliError> {
    let bad = |why: String| Err(CliError::Validation(format!("params.source: {why}")));
    match source {
        SampleSource::Planted { sampler, .. } => {
            sampler.validate().map_err(core_invalid)?;
            Ok(sampler.n())
        }
        SampleSource::Distribution { dist, .. } => Ok(dist.num_bits()),
        SampleSource::Uniform { n, .. } => Ok(*n),
        SampleSource::Explicit { n, values } => match values.iter().find(|&&v| *n < 64 && v >> n != 0) {
            Some(v) => bad(format!("value {v} does not fit in {n} bits")),
            None => Ok(*n),
        },
    }
}

fn validate_mcsp(task: &McspTask) -> Result<(), CliError> {
    let check_box = |n: usize, r: usize, size: usize| -> Result<(), CliError> {
        mcsp::enumerate_samplers(n, r, size).map(|_| ()).map_err(core_invalid)
    };
    let check_tol = |t: f64| {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(CliError::Validation("params.tolerance: must be a nonnegative number".into()))
        }
    };
    match task {
        McspTask::Solve { source, params } => {
            check_tol(params.tolerance)?;
            check_box(source_width(source)?, params.random_bits, params.size_bound)
        }
        McspTask::Verify {
            source,
            declared_size,
            tolerance,
            random_bits,
        } => {
            check_tol(*tolerance)?;
            check_box(source_width(source)?, *random_bits, *declared_size)
        }
        McspTask::PlantedSweep {
            max_outputs,
            max_random_bits,
            max_size,
            samples,
            tolerance,
        } => {
            check_tol(*tolerance)?;
            if *max_outputs == 0 || *samples == 0 {
                return Err(CliError::Validation(
                    "params: max_outputs and samples must be at least 1".into(),
                ));
            }
            check_box(*max_outputs, *max_random_bits, *max_size)
        }
    }
}

/// A parsed, validated run request.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        let kind: ExperimentKind = raw.kind.parse()?;
        let experiment = Experiment::parse(kind, raw.params)?;
        experiment.validate()?;
        Ok(ExperimentConfig {
            experiment,
            seed: raw.seed,
            output: raw.output,
        })
    }

    /// The fields that determine the results; output location is excluded.
    pub fn canonical(&self) -> Value {
        serde_json::json!({
            "kind": self.experiment.kind().name(),
            "params": self.experiment.params_value(),
            "seed": self.seed,
        })
    }

    /// Hex SHA-256 of the compact canonical form.
    pub fn hash(&self) -> String {
        config_hash(&self.canonical())
    }
}

/// Hash of a canonical config value, as recorded in manifests.
pub fn config_hash(canonical: &Value) -> String {
    let bytes = serde_json::to_vec(canonical).expect("json values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}
