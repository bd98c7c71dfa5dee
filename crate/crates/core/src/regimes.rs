//! Four-way classification of a run: composite adiabatic or not, crossed with
//! subsystem non-transitional or not.

use std::fmt;

use crate::dynamics::{evolve_mixed, evolve_pure, validate_density_matrix, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, StateVector};
use crate::model::LoopSpec;
use crate::scalar::Real;
use crate::schmidt::{reduced_density_eigen, schmidt_series, SchmidtSeries};
use crate::spectra::{loop_frames, loop_gamma_max, GaugeFixedFrame};

/// Operational meaning of "much less than one" for each criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds<T> {
    pub adiabatic_eps: T,
    pub nontrans_eps: T,
    pub p_drift_eps: T,
}

impl<T: Real> Default for RegimeThresholds<T> {
    fn default() -> Self {
        Self { adiabatic_eps: T::lit(0.1), nontrans_eps: T::lit(0.1), p_drift_eps: T::lit(1e-3) }
    }
}

impl<T: Real> RegimeThresholds<T> {
    pub fn new(adiabatic_eps: T, nontrans_eps: T, p_drift_eps: T) -> Result<Self> {
        let th = Self { adiabatic_eps, nontrans_eps, p_drift_eps };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("adiabatic_eps", self.adiabatic_eps),
            ("nontrans_eps", self.nontrans_eps),
            ("p_drift_eps", self.p_drift_eps),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// A metric that may be undefined because of a degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric<T> {
    Value(T),
    Singular,
}

impl<T: Real> Metric<T> {
    pub fn from_option(v: Option<T>) -> Self {
        v.map_or(Metric::Singular, Metric::Value)
    }

    /// Singular metrics never pass.
    pub fn below(&self, eps: T) -> bool {
        matches!(*self, Metric::Value(v) if v < eps)
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            Metric::Value(v) => Some(v),
            Metric::Singular => None,
        }
    }
}

impl<T: Real> fmt::Display for Metric<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{:.6e}", v),
            Metric::Singular => f.write_str("singular"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Adiabatic and non-transitional.
    AdiabaticA,
    /// Adiabatic, subsystems transitional.
    QuasiAdiabatic1B,
    /// Non-adiabatic, subsystems non-transitional.
    QuasiAdiabatic2C,
    NonAdiabaticD,
}

impl Regime {
    pub fn code(self) -> &'static str {
        match self {
            Regime::AdiabaticA => "A",
            Regime::QuasiAdiabatic1B => "B",
            Regime::QuasiAdiabatic2C => "C",
            Regime::NonAdiabaticD => "D",
        }
    }

    pub fn from_flags(adiabatic: bool, nontransitional: bool) -> Self {
        match (adiabatic, nontransitional) {
            (true, true) => Regime::AdiabaticA,
            (true, false) => Regime::QuasiAdiabatic1B,
            (false, true) => Regime::QuasiAdiabatic2C,
            (false, false) => Regime::NonAdiabaticD,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A regime together with the evidence it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel<T> {
    pub regime: Regime,
    pub gamma_max: Metric<T>,
    pub ratio_max: Metric<T>,
    pub p_drift: Metric<T>,
}

impl<T: Real> RegimeLabel<T> {
    pub fn adiabatic(&self) -> bool {
        matches!(self.regime, Regime::AdiabaticA | Regime::QuasiAdiabatic1B)
    }

    pub fn nontransitional(&self) -> bool {
        matches!(self.regime, Regime::AdiabaticA | Regime::QuasiAdiabatic2C)
    }
}

pub fn classify<T: Real>(
    gamma_max: Metric<T>,
    ratio_max: Metric<T>,
    p_drift: Metric<T>,
    th: &RegimeThresholds<T>,
) -> RegimeLabel<T> {
    let adiabatic = gamma_max.below(th.adiabatic_eps);
    let nontransitional = ratio_max.below(th.nontrans_eps) && p_drift.below(th.p_drift_eps);
    RegimeLabel { regime: Regime::from_flags(adiabatic, nontransitional), gamma_max, ratio_max, p_drift }
}

/// Initial condition of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Seed<T> {
    Pure(StateVector<T>),
    Mixed(ComplexMatrix<T>),
}

/// A completed run with everything the classification looked at.
#[derive(Debug, Clone)]
pub struct RunAnalysis<T> {
    pub trajectory: Trajectory<T>,
    pub frames: Vec<GaugeFixedFrame<T>>,
    /// Schmidt series of a pure run; `None` for mixed runs.
    pub schmidt: Option<SchmidtSeries<T>>,
    /// `p₁(t)` of the qubit-1 reduced state.
    pub p1: Vec<T>,
    pub label: RegimeLabel<T>,
}

fn gamma_metric_of<T: Real>(loop_spec: &LoopSpec<T>, frames: &[GaugeFixedFrame<T>]) -> Result<Metric<T>> {
    match loop_gamma_max(&loop_spec.model, frames) {
        Ok(v) => Ok(Metric::Value(v)),
        Err(Error::DegenerateGap { .. }) => Ok(Metric::Singular),
        Err(e) => Err(e),
    }
}

fn drift<T: Real>(p1: &[T]) -> T {
    let p0 = p1[0];
    p1.iter().fold(T::zero(), |m, &p| m.max((p - p0).abs()))
}

/// Evolves `seed` around the loop and classifies the run.
///
/// For a mixed seed the ratio criterion is evaluated on each pure component of
/// its spectral decomposition (weights above `1e-12`) and the worst one is
/// kept; the weight drift comes from the reduced density matrix.
pub fn analyze<T: Real>(loop_spec: &LoopSpec<T>, seed: &Seed<T>, th: &RegimeThresholds<T>) -> Result<RunAnalysis<T>> {
    th.validate()?;
    let frames = loop_frames(loop_spec)?;
    let gamma_max = gamma_metric_of(loop_spec, &frames)?;
    match seed {
        Seed::Pure(psi0) => {
            let trajectory = evolve_pure(loop_spec, psi0)?;
            let schmidt = schmidt_series(&trajectory)?;
            let p1: Vec<T> = schmidt.p_series.iter().map(|p| p[0]).collect();
            let label = classify(
                gamma_max,
                Metric::from_option(schmidt.ratio_max()),
                Metric::Value(drift(&p1)),
                th,
            );
            Ok(RunAnalysis { trajectory, frames, schmidt: Some(schmidt), p1, label })
        }
        Seed::Mixed(rho0) => {
            validate_density_matrix(rho0)?;
            let trajectory = evolve_mixed(loop_spec, rho0)?;
            let p1: Vec<T> = reduced_density_eigen(&trajectory)?.iter().map(|r| r.values[0]).collect();
            let sym = (rho0 + &rho0.adjoint()).scale_real(T::lit(0.5));
            let eig = eig_hermitian(&sym)?;
            let mut ratio = Metric::Value(T::zero());
            for (w, v) in eig.values.iter().zip(&eig.vectors) {
                if *w <= T::lit(1e-12) {
                    continue;
                }
                let component = evolve_pure(loop_spec, v)?;
                let r = Metric::from_option(schmidt_series(&component)?.ratio_max());
                ratio = match (ratio, r) {
                    (Metric::Value(a), Metric::Value(b)) => Metric::Value(a.max(b)),
                    _ => Metric::Singular,
                };
            }
            let label = classify(gamma_max, ratio, Metric::Value(drift(&p1)), th);
            Ok(RunAnalysis { trajectory, frames, schmidt: None, p1, label })
        }
    }
}
