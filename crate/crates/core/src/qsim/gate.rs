use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix2 = [[C64; 2]; 2];
/// Two-qubit matrix. Basis index is `bit(targets[0]) + 2 * bit(targets[1])`.
pub type Matrix4 = [[C64; 4]; 4];

pub(crate) const UNITARY_TOL: f64 = 1e-9;
/// Oracle registers are table-backed; 2^20 entries is the desk limit.
pub const MAX_ORACLE_INPUTS: usize = 20;

/// One gate of the lab's open gate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GateRecord", try_from = "GateRecord")]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    T(usize),
    Phase { target: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    Unitary1 { target: usize, matrix: Matrix2 },
    Unitary2 { targets: [usize; 2], matrix: Matrix4 },
    /// `|x>|y> -> |x>|y xor table[x]>`, `x` read from `inputs` (bit j = inputs[j]).
    Oracle {
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        table: Vec<u64>,
    },
    /// Diagonal `|x> -> exp(i phases[x]) |x>` over `targets`.
    PhaseOracle { targets: Vec<usize>, phases: Vec<f64> },
}

impl Gate {
    pub fn unitary1(target: usize, matrix: Matrix2) -> Result<Self> {
        let g = Gate::Unitary1 { target, matrix };
        g.check_matrix()?;
        Ok(g)
    }

    pub fn unitary2(q0: usize, q1: usize, matrix: Matrix4) -> Result<Self> {
        let g = Gate::Unitary2 {
            targets: [q0, q1],
            matrix,
        };
        g.check_matrix()?;
        Ok(g)
    }

    /// Every qubit this gate touches.
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match self {
            H(q) | X(q) | Y(q) | Z(q) | S(q) | T(q) => vec![*q],
            Phase { target, .. } | Unitary1 { target, .. } => vec![*target],
            Cnot { control, target } => vec![*control, *target],
            Cz(a, b) | Swap(a, b) => vec![*a, *b],
            Unitary2 { targets, .. } => targets.to_vec(),
            Oracle {
                inputs, outputs, ..
            } => inputs.iter().chain(outputs).copied().collect(),
            PhaseOracle { targets, .. } => targets.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        use Gate::*;
        match self {
            H(_) => "h",
            X(_) => "x",
            Y(_) => "y",
            Z(_) => "z",
            S(_) => "s",
            T(_) => "t",
            Phase { .. } => "phase",
            Cnot { .. } => "cnot",
            Cz(..) => "cz",
            Swap(..) => "swap",
            Unitary1 { .. } => "unitary1",
            Unitary2 { .. } => "unitary2",
            Oracle { .. } => "oracle",
            PhaseOracle { .. } => "phase_oracle",
        }
    }

    /// Check the gate against a register of `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::MalformedCircuit(format!(
                    "{} gate targets qubit {q} on a {num_qubits}-qubit register",
                    self.kind()
                )));
            }
            if qs[..i].contains(&q) {
                return Err(Error::MalformedCircuit(format!(
                    "{} gate repeats qubit {q}",
                    self.kind()
                )));
            }
        }
        match self {
            Gate::Phase { theta, .. } if !theta.is_finite() => {
                Err(Error::MalformedCircuit("non-finite phase angle".into()))
            }
            Gate::Unitary1 { .. } | Gate::Unitary2 { .. } => self.check_matrix(),
            Gate::Oracle {
                inputs,
                outputs,
                table,
            } => {
                if inputs.is_empty() || outputs.is_empty() {
                    return Err(Error::MalformedCircuit(
                        "oracle needs non-empty input and output registers".into(),
                    ));
                }
                if inputs.len() > MAX_ORACLE_INPUTS || outputs.len() > 63 {
                    return Err(Error::MalformedCircuit("oracle register too wide".into()));
                }
                if table.len() != 1usize << inputs.len() {
                    return Err(Error::MalformedCircuit(format!(
                        "oracle table has {} entries, expected {}",
                        table.len(),
                        1usize << inputs.len()
                    )));
                }
                if let Some(v) = table.iter().find(|&&v| v >> outputs.len() != 0) {
                    return Err(Error::MalformedCircuit(format!(
                        "oracle value {v:#x} does not fit {} output bits",
                        outputs.len()
                    )));
                }
                Ok(())
            }
            Gate::PhaseOracle { targets, phases } => {
                if targets.is_empty() || targets.len() > MAX_ORACLE_INPUTS {
                    return Err(Error::MalformedCircuit("bad phase-oracle register".into()));
                }
                if phases.len() != 1usize << targets.len() {
                    return Err(Error::MalformedCircuit(format!(
                        "phase table has {} entries, expected {}",
                        phases.len(),
                        1usize << targets.len()
                    )));
                }
                if phases.iter().any(|p| !p.is_finite()) {
                    return Err(Error::MalformedCircuit("non-finite phase".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check_matrix(&self) -> Result<()> {
        let ok = match self {
            Gate::Unitary1 { matrix, .. } => is_unitary(&matrix.map(|r| r.to_vec())),
            Gate::Unitary2 { matrix, .. } => is_unitary(&matrix.map(|r| r.to_vec())),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedCircuit(format!(
                "{} matrix is not unitary within {UNITARY_TOL:e}",
                self.kind()
            )))
        }
    }

    /// The exact inverse gate.
    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match self {
            S(q) => Phase {
                target: *q,
                theta: -FRAC_PI_2,
            },
            T(q) => Phase {
                target: *q,
                theta: -FRAC_PI_4,
            },
            Phase { target, theta } => Phase {
                target: *target,
                theta: -theta,
            },
            Unitary1 { target, matrix } => Unitary1 {
                target: *target,
                matrix: dagger2(matrix),
            },
            Unitary2 { targets, matrix } => Unitary2 {
                targets: *targets,
                matrix: dagger4(matrix),
            },
            PhaseOracle { targets, phases } => PhaseOracle {
                targets: targets.clone(),
                phases: phases.iter().map(|p| -p).collect(),
            },
            // Self-inverse: Paulis, H, CNOT, CZ, SWAP and XOR oracles.
            g => g.clone(),
        }
    }

    /// 2x2 matrix for the single-qubit named gates.
    pub(crate) fn single_qubit_matrix(&self) -> Option<Matrix2> {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Some(match self {
            Gate::H(_) => [[h, h], [h, -h]],
            Gate::X(_) => [[z, one], [one, z]],
            Gate::Y(_) => [[z, -i], [i, z]],
            Gate::Z(_) => [[one, z], [z, -one]],
            Gate::S(_) => [[one, z], [z, i]],
            Gate::T(_) => [[one, z], [z, C64::from_polar(1.0, FRAC_PI_4)]],
            Gate::Phase { theta, .. } => [[one, z], [z, C64::from_polar(1.0, *theta)]],
            Gate::Unitary1 { matrix, .. } => *matrix,
            _ => return None,
        })
    }
}

fn is_unitary(m: &[Vec<C64>]) -> bool {
    let d = m.len();
    for r in 0..d {
        for c in 0..d {
            let dot: C64 = (0..d).map(|k| m[k][r].conj() * m[k][c]).sum();
            let expect = if r == c { 1.0 } else { 0.0 };
            if (dot - expect).norm() > UNITARY_TOL {
                return false;
            }
        }
    }
    true
}

fn dagger2(m: &Matrix2) -> Matrix2 {
    let mut out = *m;
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[c][r].conj();
        }
    }
    out
}

fn dagger4(m: &Matrix4) -> Matrix4 {
    let mut out = *m;
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[c][r].conj();
        }
    }
    out
}

/// On-disk form: `{kind, targets, params?, table?}`.
///
/// * `phase`: `params = [theta]`
/// * `unitary1` / `unitary2`: `params` holds row-major `(re, im)` pairs
/// * `oracle`: `targets` = inputs then outputs, `params = [#inputs]`, `table`
/// * `phase_oracle`: `params` = phase per basis index of `targets`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<u64>>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        let kind = g.kind().to_string();
        let targets = match &g {
            Gate::Cnot { control, target } => vec![*control, *target],
            _ => g.qubits(),
        };
        let flat = |rows: &[&[C64]]| -> Vec<f64> {
            rows.iter()
                .flat_map(|r| r.iter().flat_map(|c| [c.re, c.im]))
                .collect()
        };
        let (params, table) = match g {
            Gate::Phase { theta, .. } => (Some(vec![theta]), None),
            Gate::Unitary1 { matrix, .. } => {
                (Some(flat(&matrix.iter().map(|r| &r[..]).collect::<Vec<_>>())), None)
            }
            Gate::Unitary2 { matrix, .. } => {
                (Some(flat(&matrix.iter().map(|r| &r[..]).collect::<Vec<_>>())), None)
            }
            Gate::Oracle { inputs, table, .. } => (Some(vec![inputs.len() as f64]), Some(table)),
            Gate::PhaseOracle { phases, .. } => (Some(phases), None),
            _ => (None, None),
        };
        GateRecord {
            kind,
            targets,
            params,
            table,
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: GateRecord) -> Result<Self> {
        let bad = |why: &str| Error::MalformedCircuit(format!("gate `{}`: {why}", r.kind));
        let arity = |n: usize| -> Result<()> {
            if r.targets.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} targets, got {}", r.targets.len())))
            }
        };
        let params = |n: usize| -> Result<&[f64]> {
            match &r.params {
                Some(p) if p.len() == n => Ok(p),
                _ => Err(bad(&format!("expected {n} params"))),
            }
        };
        let cplx = |p: &[f64], k: usize| C64::new(p[2 * k], p[2 * k + 1]);
        let t = &r.targets;
        let gate = match r.kind.as_str() {
            "h" | "x" | "y" | "z" | "s" | "t" => {
                arity(1)?;
                match r.kind.as_str() {
                    "h" => Gate::H(t[0]),
                    "x" => Gate::X(t[0]),
                    "y" => Gate::Y(t[0]),
                    "z" => Gate::Z(t[0]),
                    "s" => Gate::S(t[0]),
                    _ => Gate::T(t[0]),
                }
            }
            "phase" => {
                arity(1)?;
                Gate::Phase {
                    target: t[0],
                    theta: params(1)?[0],
                }
            }
            "cnot" => {
                arity(2)?;
                Gate::Cnot {
                    control: t[0],
                    target: t[1],
                }
            }
            "cz" => {
                arity(2)?;
                Gate::Cz(t[0], t[1])
            }
            "swap" => {
                arity(2)?;
                Gate::Swap(t[0], t[1])
            }
            "unitary1" => {
                arity(1)?;
                let p = params(8)?;
                let mut m = [[C64::default(); 2]; 2];
                for (k, v) in m.iter_mut().flatten().enumerate() {
                    *v = cplx(p, k);
                }
                Gate::unitary1(t[0], m)?
            }
            "unitary2" => {
                arity(2)?;
                let p = params(32)?;
                let mut m = [[C64::default(); 4]; 4];
                for (k, v) in m.iter_mut().flatten().enumerate() {
                    *v = cplx(p, k);
                }
                Gate::unitary2(t[0], t[1], m)?
            }
            "oracle" => {
                let p = params(1)?;
                let k = p[0];
                if k.fract() != 0.0 || k < 1.0 || k as usize >= t.len() {
                    return Err(bad("input count must split targets"));
                }
                let k = k as usize;
                Gate::Oracle {
                    inputs: t[..k].to_vec(),
                    outputs: t[k..].to_vec(),
                    table: r.table.clone().ok_or_else(|| bad("missing table"))?,
                }
            }
            "phase_oracle" => Gate::PhaseOracle {
                targets: t.clone(),
                phases: r.params.clone().ok_or_else(|| bad("missing phases"))?,
            },
            other => return Err(Error::MalformedCircuit(format!("unknown gate kind `{other}`"))),
        };
        Ok(gate)
    }
}
