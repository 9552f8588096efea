//! Grover-style preparation of Dicke, GHZ and cat states in the symmetric
//! subspace of N qubits, with a cavity-QED error model for the phase
//! inversions.
//!
//! Layers, bottom up:
//!
//! * [`dicke`]: Dicke-basis kets, collective rotations, Liouville vectors.
//! * [`grover`]: ideal protocols, step counts and rotation-angle solvers.
//! * [`cavity`]: scattering amplitudes and wavepacket-averaged Kraus
//!   superoperators.
//! * [`channels`]: mode-mismatch channel and the physical Grover step.
//! * [`experiments`]: optimizers, sweeps, scaling fits, carving baseline.

pub mod cavity;
pub mod channels;
pub mod dicke;
pub mod error;
pub mod experiments;
pub mod grover;
mod numeric;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Tolerance for structural checks (orthogonality, Hermiticity, traces).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
