//! Dense statevector kernels.
//!
//! Amplitude index bit `q` is the value of qubit `q`. Kernels split the
//! amplitude array into aligned chunks and, above a size threshold, process
//! the chunks on the rayon pool. Each chunk is updated independently so the
//! result does not depend on the number of workers.

use num_complex::Complex64;
use rayon::prelude::*;

use super::circuit::Circuit;
use super::gate::{Gate, Matrix2, Matrix4, C64};
use super::MAX_QUBITS;
use crate::error::{Error, Result};

const PAR_THRESHOLD: usize = 1 << 14;
pub(crate) const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0^n>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "qubit count",
                value: num_qubits,
                cap: MAX_QUBITS,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("length {len} is not a power of two >= 2"),
            });
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "qubit count",
                value: num_qubits,
                cap: MAX_QUBITS,
            });
        }
        let s = StateVector {
            num_qubits,
            amplitudes,
        };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("squared norm {n} differs from 1"),
            });
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Apply one gate. The gate is validated against the register first.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        let amps = &mut self.amplitudes;
        match gate {
            Gate::X(q) => apply_x(amps, *q),
            Gate::Z(q) => apply_diag1(amps, *q, C64::new(-1.0, 0.0)),
            Gate::S(q) => apply_diag1(amps, *q, C64::new(0.0, 1.0)),
            Gate::T(q) => apply_diag1(amps, *q, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Phase { target, theta } => apply_diag1(amps, *target, C64::from_polar(1.0, *theta)),
            Gate::H(_) | Gate::Y(_) | Gate::Unitary1 { .. } => {
                let q = gate.qubits()[0];
                let m = gate.single_qubit_matrix().expect("single-qubit gate");
                apply_1q(amps, q, &m);
            }
            Gate::Cnot { control, target } => apply_cnot(amps, *control, *target),
            Gate::Cz(a, b) => apply_cz(amps, *a, *b),
            Gate::Swap(a, b) => apply_swap(amps, *a, *b),
            Gate::Unitary2 { targets, matrix } => apply_2q(amps, targets[0], targets[1], matrix),
            Gate::Oracle {
                inputs,
                outputs,
                table,
            } => {
                let next = apply_oracle(amps, inputs, outputs, table);
                *amps = next;
            }
            Gate::PhaseOracle { targets, phases } => apply_phase_oracle(amps, targets, phases),
        }
    }
}

/// Gather the bits of `idx` at positions `qubits` into a packed integer.
#[inline]
pub(crate) fn gather(idx: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((idx >> q) & 1) << j))
}

fn for_chunks<F>(amps: &mut [C64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [C64]) + Sync + Send,
{
    if amps.len() >= PAR_THRESHOLD && amps.len() / chunk > 1 {
        amps.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    } else {
        amps.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    }
}

fn apply_1q(amps: &mut [C64], q: usize, m: &Matrix2) {
    let stride = 1usize << q;
    let m = *m;
    for_chunks(amps, stride << 1, move |_, c| {
        let (lo, hi) = c.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    });
}

fn apply_x(amps: &mut [C64], q: usize) {
    let stride = 1usize << q;
    for_chunks(amps, stride << 1, move |_, c| {
        let (lo, hi) = c.split_at_mut(stride);
        lo.swap_with_slice(hi);
    });
}

fn apply_diag1(amps: &mut [C64], q: usize, phase: C64) {
    let stride = 1usize << q;
    for_chunks(amps, stride << 1, move |_, c| {
        for a in &mut c[stride..] {
            *a *= phase;
        }
    });
}

fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let hi = control.max(target);
    let (cb, tb) = (1usize << control, 1usize << target);
    for_chunks(amps, 2 << hi, move |_, c| {
        for i in 0..c.len() {
            if i & cb != 0 && i & tb == 0 {
                c.swap(i, i | tb);
            }
        }
    });
}

fn apply_cz(amps: &mut [C64], a: usize, b: usize) {
    let hi = a.max(b);
    let mask = (1usize << a) | (1usize << b);
    for_chunks(amps, 2 << hi, move |_, c| {
        for (i, v) in c.iter_mut().enumerate() {
            if i & mask == mask {
                *v = -*v;
            }
        }
    });
}

fn apply_swap(amps: &mut [C64], a: usize, b: usize) {
    let hi = a.max(b);
    let (ab, bb) = (1usize << a, 1usize << b);
    for_chunks(amps, 2 << hi, move |_, c| {
        for i in 0..c.len() {
            if i & ab != 0 && i & bb == 0 {
                c.swap(i, (i & !ab) | bb);
            }
        }
    });
}

fn apply_2q(amps: &mut [C64], q0: usize, q1: usize, m: &Matrix4) {
    let hi = q0.max(q1);
    let (b0, b1) = (1usize << q0, 1usize << q1);
    let m = *m;
    for_chunks(amps, 2 << hi, move |_, c| {
        for i in 0..c.len() {
            if i & (b0 | b1) != 0 {
                continue;
            }
            let idx = [i, i | b0, i | b1, i | b0 | b1];
            let v = idx.map(|k| c[k]);
            for (r, &k) in idx.iter().enumerate() {
                c[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    });
}

fn apply_oracle(amps: &[C64], inputs: &[usize], outputs: &[usize], table: &[u64]) -> Vec<C64> {
    let out_mask: usize = outputs.iter().map(|&q| 1usize << q).sum();
    let scatter = |y: usize| -> usize {
        outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &q)| acc | (((y >> j) & 1) << q))
    };
    let target = |idx: usize| -> usize {
        let x = gather(idx, inputs);
        let y = gather(idx, outputs) ^ table[x] as usize;
        (idx & !out_mask) | scatter(y)
    };
    // The map idx -> target(idx) is an involution, so reading through it
    // computes the permuted vector without scatter writes.
    if amps.len() >= PAR_THRESHOLD {
        (0..amps.len()).into_par_iter().map(|i| amps[target(i)]).collect()
    } else {
        (0..amps.len()).map(|i| amps[target(i)]).collect()
    }
}

fn apply_phase_oracle(amps: &mut [C64], targets: &[usize], phases: &[f64]) {
    let factors: Vec<C64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    for_chunks(amps, PAR_THRESHOLD.min(amps.len()), |offset, c| {
        for (i, v) in c.iter_mut().enumerate() {
            *v *= factors[gather(offset + i, targets)];
        }
    });
}

/// Apply every gate of `circuit` to `|0^n>`.
pub fn run_circuit(circuit: &Circuit) -> Result<StateVector> {
    circuit.validate()?;
    let mut state = StateVector::zero(circuit.num_qubits)?;
    for g in &circuit.gates {
        state.apply_unchecked(g);
    }
    Ok(state)
}
