use serde::{Deserialize, Serialize};

use super::gate::Gate;
use super::MAX_QUBITS;
use crate::error::{Error, Result};

/// A gate program on `num_qubits` qubits, started from `|0^n>`.
///
/// `measure` optionally restricts the computational-basis measurement to a
/// sub-register; outcome bit `j` is qubit `measure[j]`. When absent every
/// qubit is measured and outcome bit `q` is qubit `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            measure: None,
        }
    }

    pub fn with_gates(num_qubits: usize, gates: Vec<Gate>) -> Self {
        Circuit {
            num_qubits,
            gates,
            measure: None,
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn measuring(mut self, qubits: Vec<usize>) -> Self {
        self.measure = Some(qubits);
        self
    }

    /// Number of outcome bits produced by measuring this circuit.
    pub fn num_outcome_bits(&self) -> usize {
        self.measure.as_ref().map_or(self.num_qubits, Vec::len)
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::MalformedCircuit("zero-qubit circuit".into()));
        }
        if self.num_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "qubit count",
                value: self.num_qubits,
                cap: MAX_QUBITS,
            });
        }
        for g in &self.gates {
            g.validate(self.num_qubits)?;
        }
        if let Some(m) = &self.measure {
            if m.is_empty() {
                return Err(Error::MalformedCircuit("empty measured register".into()));
            }
            for (i, &q) in m.iter().enumerate() {
                if q >= self.num_qubits || m[..i].contains(&q) {
                    return Err(Error::MalformedCircuit(format!(
                        "measured qubit {q} is out of range or repeated"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The exact inverse program (gates reversed and inverted).
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            measure: self.measure.clone(),
        }
    }

    /// `self` followed by `other` on the same register.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        let mut c = self.clone();
        c.gates.extend(other.gates.iter().cloned());
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }
}
