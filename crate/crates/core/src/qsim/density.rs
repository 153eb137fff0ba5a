use nalgebra::{DMatrix, SymmetricEigen};

use super::distribution::Distribution;
use super::gate::C64;
use super::state::StateVector;
use crate::error::{Error, Result};

/// Largest density-matrix dimension (`2^12`).
pub const MAX_DENSITY_DIM: usize = 1 << 12;
const HERMITIAN_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-8;

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        check_dim(dim)?;
        if matrix.ncols() != dim {
            return Err(Error::InvalidDensity(format!("{}x{} matrix is not square", dim, matrix.ncols())));
        }
        for r in 0..dim {
            for c in r..dim {
                if (matrix[(r, c)] - matrix[(c, r)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidDensity(format!("not Hermitian at ({r}, {c})")));
                }
            }
        }
        let trace: C64 = matrix.diagonal().iter().sum();
        if (trace - 1.0).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let min = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min}")));
        }
        Ok(DensityMatrix { matrix })
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let a = state.amplitudes();
        check_dim(a.len())?;
        let v = nalgebra::DVector::from_column_slice(a);
        Ok(DensityMatrix {
            matrix: &v * v.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re).collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DENSITY_DIM {
        return Err(Error::CapExceeded {
            what: "density-matrix dimension",
            value: dim,
            cap: MAX_DENSITY_DIM,
        });
    }
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidDensity(format!("dimension {dim} is not a power of two")));
    }
    Ok(())
}

/// `rho_D = sum_x p_x |x><x|`.
pub fn diagonal_density(dist: &Distribution) -> Result<DensityMatrix> {
    let dim = dist.probs().len();
    check_dim(dim)?;
    let diag = nalgebra::DVector::from_iterator(dim, dist.probs().iter().map(|&p| C64::new(p, 0.0)));
    Ok(DensityMatrix {
        matrix: DMatrix::from_diagonal(&diag),
    })
}

/// `1/2 ||rho0 - rho1||_1`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            actual: rho1.dim(),
        });
    }
    let diff = &rho0.matrix - &rho1.matrix;
    let eig = SymmetricEigen::new(diff).eigenvalues;
    let d = 0.5 * eig.iter().map(|l| l.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Reduced state on `keep` (row index bit `j` is qubit `keep[j]`).
pub fn reduced_density(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.num_qubits();
    if keep.iter().any(|&q| q >= n) {
        return Err(Error::InvalidParameter {
            name: "keep",
            reason: "qubit out of range".into(),
        });
    }
    let dim = 1usize << keep.len();
    check_dim(dim)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let compose = |a: usize, b: usize| -> usize {
        let mut idx = 0;
        for (j, &q) in keep.iter().enumerate() {
            idx |= ((a >> j) & 1) << q;
        }
        for (j, &q) in traced.iter().enumerate() {
            idx |= ((b >> j) & 1) << q;
        }
        idx
    };
    let amps = state.amplitudes();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..(1usize << traced.len()) {
        let col: Vec<C64> = (0..dim).map(|a| amps[compose(a, b)]).collect();
        for r in 0..dim {
            if col[r] == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..dim {
                m[(r, c)] += col[r] * col[c].conj();
            }
        }
    }
    Ok(DensityMatrix { matrix: m })
}
