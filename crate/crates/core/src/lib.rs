//! Numerical laboratory for the phase picked up by composed phase-space
//! displacements.
//!
//! The same closed-loop phase is computed three independent ways:
//!
//! * [`fock`]: truncated Fock-space displacement operators `D(α)` of the
//!   quantum harmonic oscillator,
//! * [`wave`]: position and spatial-frequency shifts of a sampled periodic
//!   wave, with loop phase `φ = X·K`,
//! * [`action`]: classical action integrals along polygonal phase-space paths
//!   generated by linear displacement Hamiltonians, with loop action equal to
//!   the enclosed area.
//!
//! [`interferometer`] simulates the fiber-delay / AOM interferometer that
//! measures the phase as a slope `Δφ/ΔK = X`.

pub mod action;
pub mod error;
pub mod expm;
pub mod fock;
pub mod interferometer;
pub mod numfmt;
pub mod phase;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;


pub use action::{LinearHamiltonian, PhasePoint, PolygonPath, Trajectory};
pub use fock::{DisplacementAmplitude, OperatorMatrix, OscillatorScales, StateVector};

pub use interferometer::{FringeFit, FringeImage, InterferometerConfig, SweepResult, SweepRow};
pub use wave::{FourierCoefficients, SampledWave};
