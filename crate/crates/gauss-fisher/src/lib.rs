//! Fisher-information analysis for a scalar parameter probed through an
//! array of optical phases with entangled Gaussian light.
//!
//! A parameter `x` modulates `M` phases `theta_m(x)` inside an array of
//! Mach-Zehnder interferometers fed by a squeezed vacuum and a coherent
//! state mixed through balanced Fourier gates. The crate computes, in
//! closed form, the quantum Fisher information of the modulated state under
//! uniform pure loss and the classical Fisher information delivered by a
//! structured homodyne receiver, and verifies both against independent
//! brute-force oracles: a truncated Fock-space SLD spectral sum and a
//! Monte-Carlo maximum-likelihood homodyne simulation.
//!
//! Module map:
//! - [`phase_space`]: Gaussian moments, symplectic maps, the pure-loss
//!   channel, symplectic spectra.
//! - [`circuit`]: the sensor circuit, receiver matrix elements, homodyne
//!   output moments (closed form and dense propagation).
//! - [`fisher`]: QFI/CFI closed forms, operating modes, homodyne-phase and
//!   energy-allocation optimization.
//! - [`fock`]: truncated Fock-space operators.
//! - [`oracle`]: the SLD eigensum QFI oracle and Monte-Carlo homodyne
//!   estimation.
//! - [`applications`]: phase models for RF arrays, beam-displacement
//!   tracking, and temperature gradiometry.
//!
//! All types are immutable values and all operations are pure functions,
//! safe to share across threads.

pub mod applications;
pub mod circuit;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod oracle;
pub mod phase_space;

pub use circuit::{PhaseModel, SensorConfig};
pub use error::{Error, Result};
pub use fisher::FisherReport;
pub use phase_space::{GaussianState, LossChannel, PassiveUnitary, Symplectic};
