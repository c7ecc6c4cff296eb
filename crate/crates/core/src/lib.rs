//! Simulation and analysis of dipolar-recoupled two-qubit gates in rotating
//! solids.
//!
//! Small spin-1/2 registers are propagated under magic-angle-spinning
//! modulated dipolar couplings and continuous-wave RF drive. The crate also
//! solves the tilted-frame rotational resonance matching conditions, extracts
//! effective two-qubit gates and checks them against the ISWAP/CNS family.
//!
//! Internally every frequency is an angular frequency in rad/s and every
//! angle is in radians. Conversions to Hz, ppm and degrees happen at the
//! boundary (see [`units`]).
//!
//! Basis ordering: spin 0 is the leftmost tensor factor, so a two-spin ket
//! reads `|I⟩|S⟩`. `|0⟩` is the `+1/2` eigenstate of `I_z`.

pub mod analysis;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod propagator;
pub mod readout;
pub mod recoupling;
pub mod spin;
pub mod state;
pub mod system;
pub mod units;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use state::{BasisLabel, GateMatrix, QuantumState};
pub use system::{DipolarPair, RfDrive, SpinSystem};
