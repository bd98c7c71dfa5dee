//! Phases acquired over one loop: the total/dynamical/geometric split of the
//! actual evolution, Berry phases of the instantaneous levels, and the
//! first-order non-adiabatic corrections built from them.

use num_complex::Complex;
use num_traits::Zero;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::LoopSpec;
use crate::scalar::{cis, wrap_phase, Real};
use crate::spectra::{gamma_from_frame, transition_element, GaugeFixedFrame};

/// Below this return overlap `|⟨Ψ(0)|Ψ(T)⟩|` the total phase is ill-conditioned.
pub const CYCLIC_OVERLAP_MIN: f64 = 0.1;

/// Total, dynamical and geometric phase of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPhases<T> {
    /// `arg⟨Ψ(0)|Ψ(T)⟩` in (−π, π].
    pub total: T,
    /// `∫⟨Ψ|Ĥ|Ψ⟩dt`, unwrapped.
    pub dynamical: T,
    /// `total + dynamical`, wrapped to (−π, π].
    pub geometric: T,
    /// `|⟨Ψ(0)|Ψ(T)⟩|`.
    pub overlap: T,
    /// False when `overlap` is below [`CYCLIC_OVERLAP_MIN`]; the values are
    /// still returned but the total phase carries little meaning.
    pub cyclic: bool,
}

/// Splits the phase of a pure run into its dynamical and geometric parts. The
/// dynamical part uses `i⟨Ψ|Ψ̇⟩ = ⟨Ψ|Ĥ|Ψ⟩` and the trapezoid rule.
pub fn geometric_phase<T: Real>(traj: &Trajectory<T>) -> Result<LoopPhases<T>> {
    if traj.is_mixed() || traj.states.len() < 2 {
        return Err(Error::InvalidParameter("the loop phase needs a pure trajectory with at least one step".into()));
    }
    let spec = &traj.loop_spec.model;
    let first = &traj.states[0];
    let last = traj.states.last().expect("non-empty");
    let ov = first.inner(last) / (first.norm() * last.norm());
    let energy: Vec<T> = traj
        .states
        .iter()
        .zip(&traj.times)
        .map(|(s, &t)| spec.hamiltonian_at(t).expectation(s).re / s.norm_sqr())
        .collect();
    let dynamical = trapezoid(&traj.times, &energy);
    let total = ov.arg();
    Ok(LoopPhases {
        total,
        dynamical,
        geometric: wrap_phase(total + dynamical),
        overlap: ov.norm(),
        cyclic: ov.norm() >= T::lit(CYCLIC_OVERLAP_MIN),
    })
}

fn trapezoid<T: Real>(t: &[T], f: &[T]) -> T {
    let half = T::lit(0.5);
    t.windows(2)
        .zip(f.windows(2))
        .fold(T::zero(), |acc, (tw, fw)| acc + (tw[1] - tw[0]) * half * (fw[0] + fw[1]))
}

fn check_loop<T: Real>(frames: &[GaugeFixedFrame<T>], n: usize) -> Result<()> {
    if frames.len() < 3 {
        return Err(Error::InsufficientSamples { required: 2, found: frames.len().saturating_sub(1) });
    }
    let levels = frames[0].eigen.len();
    if n >= levels {
        return Err(Error::InvalidParameter(format!("label {n} out of range for {levels} levels")));
    }
    let closure = frames[0].vector(n).fidelity(frames.last().expect("non-empty").vector(n));
    if closure < T::one() - T::lit(1e-6) {
        return Err(Error::InvalidParameter(format!(
            "frames do not close: |⟨φ(0)|φ(T)⟩|² = {:.6}",
            closure.as_f64()
        )));
    }
    for f in frames {
        if f.ambiguous && f.eigen.is_degenerate(n) {
            let other = f.eigen.group_of(n).iter().copied().find(|&k| k != n).unwrap_or(n);
            return Err(Error::DegenerateGap { i: n, j: other, gap: (f.energy(n) - f.energy(other)).abs().as_f64() });
        }
    }
    Ok(())
}

/// `−arg Π_k ⟨φ(t_k)|φ(t_{k+stride})⟩` around the closed loop, with the last
/// frame replaced by the first.
fn holonomy<T: Real>(frames: &[GaugeFixedFrame<T>], n: usize, stride: usize) -> T {
    let steps = frames.len() - 1;
    let mut prod = Complex::new(T::one(), T::zero());
    let mut k = 0;
    while k < steps {
        let next = if k + stride >= steps { 0 } else { k + stride };
        let ov = frames[k].vector(n).inner(frames[next].vector(n));
        // Renormalize each factor so the product's modulus stays near one.
        prod = prod * ov.unscale(ov.norm().max(T::min_positive_value()));
        k += stride;
    }
    -prod.arg()
}

/// Berry phase `γ_n = i∮⟨φ_n|φ̇_n⟩dt` of label `n` from the discrete holonomy,
/// with one Richardson step when the number of intervals is even.
///
/// Gauge invariant: each frame vector enters once as a ket and once as a bra.
pub fn berry_phase<T: Real>(frames: &[GaugeFixedFrame<T>], n: usize) -> Result<T> {
    check_loop(frames, n)?;
    let steps = frames.len() - 1;
    let fine = holonomy(frames, n, 1);
    if steps % 2 != 0 || steps < 4 {
        return Ok(wrap_phase(fine));
    }
    let coarse = holonomy(frames, n, 2);
    Ok(wrap_phase(fine + wrap_phase(fine - coarse) / T::lit(3.0)))
}

/// First-order amplitudes after one loop when the run starts in level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeAmplitudes<T> {
    pub seed: usize,
    /// `c_m(T)`; `c_n(T) = e^{iγ_n}`.
    pub c: Vec<Complex<T>>,
    /// Berry phase of every level.
    pub berry: Vec<T>,
    /// `Ω_jk(T) = ∫₀ᵀ (E_k − E_j) dτ`, unwrapped.
    pub omega: Vec<Vec<T>>,
    /// `Γ_mn` at the end of the loop (zero for `m = n` and decoupled pairs).
    pub gamma: Vec<T>,
    /// `⟨φ_n(T)|φ̇_m(T)⟩`.
    pub back_elements: Vec<Complex<T>>,
}

impl<T: Real> PerturbativeAmplitudes<T> {
    pub fn gamma_max(&self) -> T {
        self.gamma.iter().fold(T::zero(), |m, &g| m.max(g))
    }
}

fn omega_matrix<T: Real>(frames: &[GaugeFixedFrame<T>]) -> Vec<Vec<T>> {
    let levels = frames[0].eigen.len();
    let times: Vec<T> = frames.iter().map(|f| f.t).collect();
    let integrals: Vec<T> = (0..levels)
        .map(|j| trapezoid(&times, &frames.iter().map(|f| f.energy(j)).collect::<Vec<_>>()))
        .collect();
    (0..levels)
        .map(|j| (0..levels).map(|k| integrals[k] - integrals[j]).collect())
        .collect()
}

/// `c_n(T) ≃ e^{iγ_n}` and, for `m ≠ n`,
/// `c_m(T) ≃ e^{iΩ_nm(T) + iγ_n} ⟨φ_m|φ̇_n⟩ / (E_m − E_n)` with the matrix
/// elements taken at the end of the loop.
pub fn perturbative_amplitudes<T: Real>(
    loop_spec: &LoopSpec<T>,
    frames: &[GaugeFixedFrame<T>],
    n: usize,
) -> Result<PerturbativeAmplitudes<T>> {
    check_loop(frames, n)?;
    let levels = frames[0].eigen.len();
    let berry = (0..levels).map(|m| berry_phase(frames, m)).collect::<Result<Vec<_>>>()?;
    let omega = omega_matrix(frames);
    let end = frames.last().expect("non-empty");
    let dh = loop_spec.model.hamiltonian_derivative_at(end.t);
    let mut c = vec![Complex::zero(); levels];
    let mut gamma = vec![T::zero(); levels];
    let mut back_elements = vec![Complex::zero(); levels];
    c[n] = cis(berry[n]);
    for m in (0..levels).filter(|&m| m != n) {
        let forward = transition_element(end, &dh, m, n)?;
        if forward.is_zero() {
            continue;
        }
        let gap = end.energy(m) - end.energy(n);
        c[m] = cis(omega[n][m] + berry[n]) * forward.unscale(gap);
        gamma[m] = gamma_from_frame(end, &dh, m, n)?;
        back_elements[m] = transition_element(end, &dh, n, m)?;
    }
    Ok(PerturbativeAmplitudes { seed: n, c, berry, omega, gamma, back_elements })
}

/// The two first-order estimates of the geometric phase for a run seeded in
/// level `n`:
/// `φ₁₈ = arg[e^{iγ_n} + Σ_{m≠n} c_m(T)]` and
/// `φ₁₉ = γ_n + Σ_{m≠n} Γ_mn [Ω_nm(T) + γ_m + arg⟨φ_n|φ̇_m⟩]`.
///
/// `Ω_nm(T)` enters `φ₁₉` reduced to (−π, π]; the unreduced value grows like
/// `1/ω` and would swamp the `O(Γ)` correction.
pub fn geometric_phase_perturbative<T: Real>(amps: &PerturbativeAmplitudes<T>) -> (T, T) {
    let n = amps.seed;
    let sum = amps.c.iter().fold(Complex::zero(), |s, &z| s + z);
    let phi18 = sum.arg();
    let mut phi19 = amps.berry[n];
    for m in (0..amps.c.len()).filter(|&m| m != n) {
        if amps.gamma[m] > T::zero() {
            phi19 = phi19
                + amps.gamma[m] * (wrap_phase(amps.omega[n][m]) + amps.berry[m] + amps.back_elements[m].arg());
        }
    }
    (phi18, wrap_phase(phi19))
}

/// Everything phase-related about one loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport<T> {
    pub seed_label: usize,
    pub total_phase: T,
    pub dynamical_phase: T,
    pub geometric_phase: T,
    pub overlap: T,
    pub cyclic: bool,
    pub berry_phases: Vec<T>,
    pub perturbative_phase_18: T,
    pub perturbative_phase_19: T,
    /// `Ω_jk(T)`, unwrapped.
    pub omega_matrix: Vec<Vec<T>>,
    pub gamma_max: T,
}

/// Combines [`geometric_phase`] on the trajectory with the Berry and
/// perturbative phases of level `seed`.
pub fn phase_report<T: Real>(traj: &Trajectory<T>, frames: &[GaugeFixedFrame<T>], seed: usize) -> Result<PhaseReport<T>> {
    if frames.len() != traj.len() {
        return Err(Error::FrameMismatch(format!("{} frames for {} samples", frames.len(), traj.len())));
    }
    let loop_phases = geometric_phase(traj)?;
    let amps = perturbative_amplitudes(&traj.loop_spec, frames, seed)?;
    let (phi18, phi19) = geometric_phase_perturbative(&amps);
    Ok(PhaseReport {
        seed_label: seed,
        total_phase: loop_phases.total,
        dynamical_phase: loop_phases.dynamical,
        geometric_phase: loop_phases.geometric,
        overlap: loop_phases.overlap,
        cyclic: loop_phases.cyclic,
        gamma_max: amps.gamma_max(),
        berry_phases: amps.berry,
        perturbative_phase_18: phi18,
        perturbative_phase_19: phi19,
        omega_matrix: amps.omega,
    })
}
