//! Desk-scale tools for checking sampling-based claims of quantum advantage.
//!
//! [`qsim`] simulates circuits exactly. [`families`] generates the circuit
//! families under test, [`strategies`] holds spoofers and distinguishers,
//! and [`harness`] plays the verification game between them. The remaining
//! modules check cryptographic side conditions ([`cryptocheck`]), solve the
//! sample version of circuit minimisation by brute force ([`mcsp`]), and run
//! a designated-verifier protocol ([`dvqa`]).
//!
//! Every randomised routine takes an explicit `u64` seed and returns the
//! same result for any rayon pool size.

pub mod cryptocheck;
pub mod dvqa;
pub mod error;
pub mod families;
pub mod harness;
pub mod mcsp;
pub mod qsim;
pub mod seed;
pub mod strategies;

pub use error::{Error, Result};
pub use families::{CircuitFamily, FamilyDraw, FamilyMetadata, FamilySpec};
pub use harness::{GameConfig, GameMode, GameReport};
pub use qsim::{Circuit, DensityMatrix, Distribution, Gate, SampleBatch};
pub use strategies::{DistinguisherSpec, SpooferSpec};
