//! Adiabatic and non-transitional dynamics of two coupled spin-1/2 qubits in
//! a rotating magnetic field.
//!
//! Every routine is generic over the scalar type ([`Real`], `f32` or `f64`).
//! The aliases at the crate root fix the scalar to `f64`.
//!
//! Units: energies in `μB₀/2`, time in `2/(μB₀)`, `ħ = 1`. Basis order is
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` with qubit 1 the left tensor factor.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod regimes;
pub mod scalar;
pub mod schmidt;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{CouplingKind, DEFAULT_STEPS, MIN_LOOP_STEPS};
pub use regimes::{Metric, Regime};
pub use scalar::{wrap_phase, Real};

pub type Complex = num_complex::Complex<f64>;
pub type StateVector = linalg::StateVector<f64>;
pub type ComplexMatrix = linalg::ComplexMatrix<f64>;
pub type EigenPairSet = linalg::EigenPairSet<f64>;
pub type ModelSpec = model::ModelSpec<f64>;
pub type LoopSpec = model::LoopSpec<f64>;
pub type GaugeFixedFrame = spectra::GaugeFixedFrame<f64>;
pub type GammaSurface = spectra::GammaSurface<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type AmplitudeSeries = dynamics::AmplitudeSeries<f64>;
pub type SchmidtForm = schmidt::SchmidtForm<f64>;
pub type SchmidtSeries = schmidt::SchmidtSeries<f64>;
pub type PhaseReport = phases::PhaseReport<f64>;
pub type RegimeThresholds = regimes::RegimeThresholds<f64>;
pub type RegimeLabel = regimes::RegimeLabel<f64>;
pub type Seed = regimes::Seed<f64>;
pub type RunAnalysis = regimes::RunAnalysis<f64>;
