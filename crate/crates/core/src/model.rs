//! The driven two-qubit Hamiltonian and the parameter loop it is carried
//! around.
//!
//! Units: energies in `μB₀/2`, time in `2/(μB₀)`, `ħ = 1`. In these units the
//! Hamiltonian reads
//!
//! ```text
//! Ĥ(t) = g·C + F(θ, φ(t)) ⊗ I₂,      φ(t) = φ₀ + ω t
//! F(θ, φ) = [[cos θ, sin θ e^{+iφ}], [sin θ e^{−iφ}, −cos θ]]
//! ```
//!
//! with `C = σz⊗σz` (Ising), `σ⁺⊗σ⁻ + σ⁻⊗σ⁺` (flip-flop), or zero. The sign of
//! the azimuth in `F` is the one under which the closed-form eigenvectors
//! carry `e^{−iφ}` on their spin-flipped component (see [`crate::spectra`]).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, ComplexMatrix};
use crate::scalar::{c, cis, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// `σ₁ᶻ ⊗ σ₂ᶻ`
    IsingZ,
    /// `σ₁⁺σ₂⁻ + σ₁⁻σ₂⁺`
    FlipFlop,
    None,
}

impl CouplingKind {
    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::IsingZ => "ising_z",
            CouplingKind::FlipFlop => "flip_flop",
            CouplingKind::None => "none",
        }
    }

    pub fn matrix<T: Real>(self) -> ComplexMatrix<T> {
        match self {
            CouplingKind::IsingZ => tensor(&pauli::sigma_z(), &pauli::sigma_z()),
            CouplingKind::FlipFlop => &tensor(&pauli::sigma_plus(), &pauli::sigma_minus())
                + &tensor(&pauli::sigma_minus(), &pauli::sigma_plus()),
            CouplingKind::None => ComplexMatrix::zeros(4, 4),
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising_z" => Ok(CouplingKind::IsingZ),
            "flip_flop" => Ok(CouplingKind::FlipFlop),
            "none" => Ok(CouplingKind::None),
            other => Err(Error::InvalidParameter(format!(
                "unknown coupling `{other}` (expected ising_z, flip_flop or none)"
            ))),
        }
    }
}

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    pub coupling: CouplingKind,
    /// Rescaled exchange constant `2J/(μB₀)`.
    pub g: T,
    /// Polar angle of the field, held fixed along the loop.
    pub theta: T,
    /// Precession rate of the field azimuth.
    pub omega: T,
    /// Azimuth at `t = 0`.
    pub phi0: T,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(coupling: CouplingKind, g: T, theta: T, omega: T, phi0: T) -> Result<Self> {
        let spec = Self { coupling, g, theta, omega, phi0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= T::zero() && self.theta <= T::PI()) {
            return Err(Error::InvalidParameter(format!(
                "theta = {} outside [0, π]",
                self.theta.as_f64()
            )));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter("g must be finite".into()));
        }
        if !self.omega.is_finite() || self.omega < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "omega = {} must be finite and >= 0",
                self.omega.as_f64()
            )));
        }
        if !self.phi0.is_finite() {
            return Err(Error::InvalidParameter("phi0 must be finite".into()));
        }
        Ok(())
    }

    pub fn azimuth(&self, t: T) -> T {
        self.phi0 + self.omega * t
    }

    /// Single-qubit field term `F(θ, φ)`.
    pub fn field_matrix(&self, phi: T) -> ComplexMatrix<T> {
        let (s, co) = self.theta.sin_cos();
        let e = cis(phi).scale(s);
        ComplexMatrix::from_vec(2, 2, vec![c(co, T::zero()), e, e.conj(), c(-co, T::zero())])
            .expect("2x2")
    }

    pub fn hamiltonian_at(&self, t: T) -> ComplexMatrix<T> {
        let drive = tensor(&self.field_matrix(self.azimuth(t)), &pauli::identity());
        if self.coupling == CouplingKind::None {
            return drive;
        }
        &self.coupling.matrix::<T>().scale_real(self.g) + &drive
    }

    /// Exact `∂Ĥ/∂t = ω ∂F/∂φ ⊗ I₂`.
    pub fn hamiltonian_derivative_at(&self, t: T) -> ComplexMatrix<T> {
        let s = self.theta.sin();
        let e = cis(self.azimuth(t)).scale(s * self.omega);
        // ∂/∂φ (s e^{iφ}) = i s e^{iφ}
        let i_e = c(-e.im, e.re);
        let d = ComplexMatrix::from_vec(2, 2, vec![c(T::zero(), T::zero()), i_e, i_e.conj(), c(T::zero(), T::zero())])
            .expect("2x2");
        tensor(&d, &pauli::identity())
    }
}

pub fn hamiltonian_at<T: Real>(spec: &ModelSpec<T>, t: T) -> Result<ComplexMatrix<T>> {
    spec.validate()?;
    Ok(spec.hamiltonian_at(t))
}

pub fn hamiltonian_derivative_at<T: Real>(spec: &ModelSpec<T>, t: T) -> ComplexMatrix<T> {
    spec.hamiltonian_derivative_at(t)
}

/// Minimum number of time steps a loop may be sampled with.
pub const MIN_LOOP_STEPS: usize = 16;
/// Default number of integration steps per loop.
pub const DEFAULT_STEPS: usize = 4096;

/// One traversal of the parameter loop, sampled on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec<T> {
    pub model: ModelSpec<T>,
    /// Duration of the run; `2π/ω` for a closed loop.
    pub period: T,
    pub n_steps: usize,
}

impl<T: Real> LoopSpec<T> {
    /// One full precession period `2π/ω`.
    pub fn new(model: ModelSpec<T>, n_steps: usize) -> Result<Self> {
        model.validate()?;
        if !(model.omega > T::zero()) {
            return Err(Error::InvalidParameter("a closed loop needs omega > 0".into()));
        }
        Self::with_duration(model, T::TAU() / model.omega, n_steps)
    }

    /// Fixed-duration run; used for static (`ω = 0`) evolutions.
    pub fn with_duration(model: ModelSpec<T>, duration: T, n_steps: usize) -> Result<Self> {
        model.validate()?;
        if !(duration > T::zero()) || !duration.is_finite() {
            return Err(Error::InvalidParameter("duration must be positive and finite".into()));
        }
        if n_steps < MIN_LOOP_STEPS {
            return Err(Error::InvalidParameter(format!(
                "n_steps = {n_steps} below the minimum of {MIN_LOOP_STEPS}"
            )));
        }
        Ok(Self { model, period: duration, n_steps })
    }

    pub fn dt(&self) -> T {
        self.period / T::from_usize(self.n_steps).expect("n_steps")
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.n_steps {
            self.period
        } else {
            self.dt() * T::from_usize(k).expect("index")
        }
    }

    /// `n_steps + 1` uniform sample times covering `[0, period]`.
    pub fn times(&self) -> Vec<T> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    pub fn with_steps(&self, n_steps: usize) -> Result<Self> {
        Self::with_duration(self.model, self.period, n_steps)
    }
}
