//! Distinguishers and spoofers.
//!
//! A distinguisher sees one sample batch plus whatever context the game
//! grants it (the circuit, its metadata, the spoofer's description). All of
//! them are deterministic functions of that input.

mod battery;
mod simon;
mod spoofers;
mod xeb;

pub use battery::{battery_distinguisher, Battery, BatteryOutcome, BatteryTest, DEFAULT_BATTERY_ALPHA};
pub use simon::{gf2_null_space, gf2_rank, simon_distinguisher, SimonDistinguisher};
pub use spoofers::{
    distinct_uniform_spoofer, omniscient_spoofer, uniform_spoofer, SamplerDescription, SpooferSpec,
};
pub use xeb::{default_xeb_threshold, xeb_distinguisher, xeb_score, xeb_score_with, XebDistinguisher};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::FamilyMetadata;
use crate::qsim::{Circuit, Distribution, SampleBatch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherResult {
    pub decision: bool,
    pub score: f64,
}

/// Everything a distinguisher may look at for one decision.
#[derive(Clone, Copy, Debug)]
pub struct DistinguisherInput<'a> {
    pub circuit: Option<&'a Circuit>,
    pub metadata: Option<&'a FamilyMetadata>,
    /// Exact `D_C`, when the caller has it at hand; saves recomputation.
    pub exact: Option<&'a Distribution>,
    /// `None` in the universal (description-free) game.
    pub sampler: Option<&'a SamplerDescription>,
    pub batch: &'a SampleBatch,
}

impl<'a> DistinguisherInput<'a> {
    pub fn batch_only(batch: &'a SampleBatch) -> Self {
        DistinguisherInput {
            circuit: None,
            metadata: None,
            exact: None,
            sampler: None,
            batch,
        }
    }
}

pub trait Distinguisher: Send + Sync {
    fn name(&self) -> String;
    fn decide(&self, input: &DistinguisherInput<'_>) -> Result<DistinguisherResult>;
}

/// Distinguisher selection by identifier, as it appears in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistinguisherSpec {
    Xeb {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
    },
    Simon,
    Battery {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
}

impl Distinguisher for DistinguisherSpec {
    fn name(&self) -> String {
        match self {
            DistinguisherSpec::Xeb { .. } => "xeb".into(),
            DistinguisherSpec::Simon => "simon".into(),
            DistinguisherSpec::Battery { .. } => "battery".into(),
        }
    }

    fn decide(&self, input: &DistinguisherInput<'_>) -> Result<DistinguisherResult> {
        match self {
            DistinguisherSpec::Xeb { threshold } => XebDistinguisher { threshold: *threshold }.decide(input),
            DistinguisherSpec::Simon => SimonDistinguisher.decide(input),
            DistinguisherSpec::Battery { alpha } => Battery {
                alpha: alpha.unwrap_or(DEFAULT_BATTERY_ALPHA),
            }
            .decide(input),
        }
    }
}
