//! Empirical checks of the cryptographic characterizations: EFI farness and
//! battery indistinguishability, the hybrid amplifier, Haar measurement
//! statistics with their collision and chi-squared bounds, and the
//! unidentifiability and pseudorandom-state shadow tests.
//!
//! Battery-based checks only ever give a lower bound on distinguishing
//! advantage. A small value is reported as "not refuted", never as proof.

mod efi;
mod haar;
mod identify;

pub use efi::{
    efi_empirical_indistinguishability, efi_report, efi_statistical_farness, hybrid_amplify,
    multi_copy_advantage, single_copy_advantage, AdvantageEstimate, EfiCandidate, EfiGenerator,
    EfiReport, EfiVerdict, HybridDecider,
};
pub use haar::{
    chi_squared_tail_check, collision_probability_check, haar_measurement_distribution, ChiSquaredReport,
    CollisionReport, HaarOutcomeModel, DEFAULT_COLLISION_BATCHES, MAX_HAAR_BITS,
};
pub use identify::{prs_shadow_test, unidentifiability_control, unidentifiability_test};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::strategies::BatteryOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The bound exceeds 1 and constrains nothing.
    Vacuous,
}

/// One line of a check report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub parameters: serde_json::Value,
    pub estimate: f64,
    pub bound: f64,
    pub status: CheckStatus,
}

impl CheckRecord {
    /// Upper-bound check: passes iff `estimate <= bound`.
    pub(crate) fn upper(check: &str, parameters: serde_json::Value, estimate: f64, bound: f64) -> Self {
        let status = if estimate <= bound {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckRecord {
            check: check.into(),
            parameters,
            estimate,
            bound,
            status,
        }
    }
}

/// Largest acceptance-rate gap between the two sides over the combined
/// battery decision and every individual test.
pub(crate) fn max_rate_difference(pairs: &[(BatteryOutcome, BatteryOutcome)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (a, b) in pairs {
        let e = tally.entry(String::new()).or_default();
        e.0 += a.decision as usize;
        e.1 += b.decision as usize;
        for t in &a.tests {
            tally.entry(t.name.clone()).or_default().0 += t.reject as usize;
        }
        for t in &b.tests {
            tally.entry(t.name.clone()).or_default().1 += t.reject as usize;
        }
    }
    let k = pairs.len() as f64;
    tally
        .values()
        .map(|&(a, b)| (a as f64 - b as f64).abs() / k)
        .fold(0.0, f64::max)
}
