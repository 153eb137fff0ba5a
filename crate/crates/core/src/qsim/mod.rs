//! Exact statevector simulation and the measurement model built on it.

mod circuit;
mod density;
mod distribution;
mod gate;
mod state;

pub use circuit::Circuit;
pub use density::{diagonal_density, reduced_density, trace_distance, DensityMatrix, MAX_DENSITY_DIM};
pub use distribution::{
    amplitude_probability, format_bits, output_distribution, parse_bits, sample,
    total_variation_distance, Distribution, SampleBatch, Sampler, MAX_DIST_BITS,
};
pub use gate::{Gate, GateRecord, Matrix2, Matrix4, C64, MAX_ORACLE_INPUTS};
pub use state::{run_circuit, StateVector};

use state::gather;


/// Statevector cap.
pub const MAX_QUBITS: usize = 24;
