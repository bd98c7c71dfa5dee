//! Time evolution around the loop.
//!
//! All integrators are fixed-step RK4 without renormalization. The per-step
//! change of the norm (or purity, for density matrices) is measured and the run
//! aborts with [`Error::StepTooLarge`] once it exceeds [`MAX_STEP_DRIFT`].

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, StateVector};
use crate::model::LoopSpec;
use crate::scalar::{c, cis, Real};
use crate::spectra::{diagonal_connection, numeric_eigensystem, transition_element, GaugeFixedFrame};

/// Largest tolerated per-step change in `‖ψ‖` (or `½ Tr ρ²`).
pub const MAX_STEP_DRIFT: f64 = 1e-6;
const NORM_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-8;

/// Sampled solution of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub loop_spec: LoopSpec<T>,
    pub times: Vec<T>,
    /// Pure states; empty for mixed runs.
    pub states: Vec<StateVector<T>>,
    pub rho_states: Option<Vec<ComplexMatrix<T>>>,
    /// Largest per-step norm (or purity) change seen by the integrator.
    pub max_step_drift: T,
}

impl<T: Real> Trajectory<T> {
    pub fn is_mixed(&self) -> bool {
        self.rho_states.is_some()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&StateVector<T>> {
        self.states.last()
    }

    /// Largest `|‖ψ(t_k)‖ − 1|` over the run (zero for mixed runs).
    pub fn max_norm_error(&self) -> T {
        self.states.iter().fold(T::zero(), |m, s| m.max((s.norm() - T::one()).abs()))
    }
}

/// Coefficients `c_j(t)` of `|Ψ⟩ = Σ c_j e^{−i∫E_j}|φ_j⟩` in the gauge-fixed
/// instantaneous basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries<T> {
    pub times: Vec<T>,
    /// `c[k][j]` at time `times[k]`.
    pub c: Vec<Vec<Complex<T>>>,
    /// `∫₀^{t_k} E_j dτ`, indexed like `c`.
    pub dynamical_phases: Vec<Vec<T>>,
}

impl<T: Real> AmplitudeSeries<T> {
    pub fn population(&self, k: usize, j: usize) -> T {
        self.c[k][j].norm_sqr()
    }

    pub fn final_amplitudes(&self) -> &[Complex<T>] {
        self.c.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_norm_error(&self) -> T {
        self.c.iter().fold(T::zero(), |m, row| {
            let n = row.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
            m.max((n - T::one()).abs())
        })
    }
}

/// `tol`, raised to what the scalar type can resolve.
fn precision_tol<T: Real>(tol: f64) -> T {
    T::lit(tol).max(T::lit(64.0) * T::epsilon())
}

fn minus_i<T: Real>() -> Complex<T> {
    c(T::zero(), -T::one())
}

fn suggested_steps<T: Real>(n_steps: usize, drift: T) -> usize {
    // RK4 norm loss per step scales as dt⁶; aim a factor four below the guard.
    let factor = (drift.as_f64() / (0.25 * MAX_STEP_DRIFT)).powf(1.0 / 6.0).max(2.0);
    let n = (n_steps as f64 * factor).ceil() as usize;
    n.div_ceil(64) * 64
}

fn guard<T: Real>(n_steps: usize, drift: T) -> Result<()> {
    if drift > T::lit(MAX_STEP_DRIFT) || !drift.is_finite() {
        return Err(Error::StepTooLarge { drift: drift.as_f64(), suggested_steps: suggested_steps(n_steps, drift) });
    }
    Ok(())
}

/// Integrates `i ∂ψ/∂t = Ĥ(t) ψ` over the loop.
pub fn evolve_pure<T: Real>(loop_spec: &LoopSpec<T>, psi0: &StateVector<T>) -> Result<Trajectory<T>> {
    if psi0.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: "4".into(), found: psi0.dim().to_string() });
    }
    psi0.validate_normalized(precision_tol(NORM_TOL))?;
    let spec = &loop_spec.model;
    let times = loop_spec.times();
    let dt = loop_spec.dt();
    let half = dt / T::lit(2.0);
    let mi = minus_i::<T>();
    let deriv = |h: &ComplexMatrix<T>, v: &StateVector<T>| h.apply(v).scaled(mi);

    let mut states = Vec::with_capacity(times.len());
    states.push(psi0.clone());
    let mut max_drift = T::zero();
    let mut h_start = spec.hamiltonian_at(times[0]);
    for k in 0..loop_spec.n_steps {
        let psi = &states[k];
        let t = times[k];
        let h_mid = spec.hamiltonian_at(t + half);
        let h_end = spec.hamiltonian_at(times[k + 1]);
        let k1 = deriv(&h_start, psi);
        let k2 = deriv(&h_mid, &psi.axpy(c(half, T::zero()), &k1));
        let k3 = deriv(&h_mid, &psi.axpy(c(half, T::zero()), &k2));
        let k4 = deriv(&h_end, &psi.axpy(c(dt, T::zero()), &k3));
        let w = dt / T::lit(6.0);
        let next = psi
            .axpy(c(w, T::zero()), &k1)
            .axpy(c(w * T::lit(2.0), T::zero()), &k2)
            .axpy(c(w * T::lit(2.0), T::zero()), &k3)
            .axpy(c(w, T::zero()), &k4);
        let drift = (next.norm() - psi.norm()).abs();
        guard(loop_spec.n_steps, drift)?;
        max_drift = max_drift.max(drift);
        states.push(next);
        h_start = h_end;
    }
    Ok(Trajectory { loop_spec: *loop_spec, times, states, rho_states: None, max_step_drift: max_drift })
}

/// Checks that `rho` is a 4×4 density matrix: Hermitian, unit trace and
/// positive semidefinite.
pub fn validate_density_matrix<T: Real>(rho: &ComplexMatrix<T>) -> Result<()> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    let dev = rho.hermitian_deviation();
    if dev > precision_tol(NORM_TOL) {
        return Err(Error::NonPhysicalState(format!("not Hermitian (deviation {:.3e})", dev.as_f64())));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > precision_tol(TRACE_TOL) || tr.im.abs() > precision_tol(TRACE_TOL) {
        return Err(Error::NonPhysicalState(format!("trace {:.6} differs from 1", tr.re.as_f64())));
    }
    let sym = (rho + &rho.adjoint()).scale_real(T::lit(0.5));
    let eig = eig_hermitian(&sym)?;
    let min = eig.values[0];
    if min < -precision_tol::<T>(NORM_TOL) {
        return Err(Error::NonPhysicalState(format!("negative eigenvalue {:.3e}", min.as_f64())));
    }
    Ok(())
}

/// Integrates `i ∂ρ/∂t = [Ĥ(t), ρ]` over the loop.
pub fn evolve_mixed<T: Real>(loop_spec: &LoopSpec<T>, rho0: &ComplexMatrix<T>) -> Result<Trajectory<T>> {
    validate_density_matrix(rho0)?;
    let spec = &loop_spec.model;
    let times = loop_spec.times();
    let dt = loop_spec.dt();
    let half = dt / T::lit(2.0);
    let mi = minus_i::<T>();
    let deriv = |h: &ComplexMatrix<T>, r: &ComplexMatrix<T>| h.commutator(r).scale(mi);
    let purity = |r: &ComplexMatrix<T>| (r * r).trace().re;

    let mut rhos = Vec::with_capacity(times.len());
    rhos.push(rho0.clone());
    let mut max_drift = T::zero();
    let mut h_start = spec.hamiltonian_at(times[0]);
    for k in 0..loop_spec.n_steps {
        let rho = &rhos[k];
        let h_mid = spec.hamiltonian_at(times[k] + half);
        let h_end = spec.hamiltonian_at(times[k + 1]);
        let k1 = deriv(&h_start, rho);
        let k2 = deriv(&h_mid, &(rho + &k1.scale_real(half)));
        let k3 = deriv(&h_mid, &(rho + &k2.scale_real(half)));
        let k4 = deriv(&h_end, &(rho + &k3.scale_real(dt)));
        let w = dt / T::lit(6.0);
        let incr = &(&k1 + &k4).scale_real(w) + &(&k2 + &k3).scale_real(w * T::lit(2.0));
        let next = rho + &incr;
        let drift = (purity(&next) - purity(rho)).abs() / T::lit(2.0);
        guard(loop_spec.n_steps, drift)?;
        max_drift = max_drift.max(drift);
        rhos.push(next);
        h_start = h_end;
    }
    Ok(Trajectory { loop_spec: *loop_spec, times, states: Vec::new(), rho_states: Some(rhos), max_step_drift: max_drift })
}

/// Composite-trapezoid running integrals `∫₀^{t_k} E_j dτ`.
fn running_phases<T: Real>(times: &[T], frames: &[GaugeFixedFrame<T>]) -> Vec<Vec<T>> {
    let n_levels = frames[0].eigen.len();
    let mut acc = vec![T::zero(); n_levels];
    let mut out = Vec::with_capacity(frames.len());
    out.push(acc.clone());
    for k in 1..frames.len() {
        let h = times[k] - times[k - 1];
        for (j, a) in acc.iter_mut().enumerate() {
            *a = *a + h * (frames[k - 1].energy(j) + frames[k].energy(j)) / T::lit(2.0);
        }
        out.push(acc.clone());
    }
    out
}

fn check_frames<T: Real>(times: &[T], frames: &[GaugeFixedFrame<T>]) -> Result<()> {
    if frames.len() != times.len() {
        return Err(Error::FrameMismatch(format!("{} frames for {} samples", frames.len(), times.len())));
    }
    let scale = T::one().max(times.last().copied().unwrap_or_else(T::one).abs());
    for (k, (f, &t)) in frames.iter().zip(times).enumerate() {
        if (f.t - t).abs() > T::lit(1e-9) * scale {
            return Err(Error::FrameMismatch(format!(
                "frame {k} is at t = {} but the sample is at t = {}",
                f.t.as_f64(),
                t.as_f64()
            )));
        }
    }
    Ok(())
}

/// Expands a pure trajectory in the instantaneous basis:
/// `c_j(t_k) = e^{i∫E_j}⟨φ_j(t_k)|Ψ(t_k)⟩`.
pub fn project_amplitudes<T: Real>(traj: &Trajectory<T>, frames: &[GaugeFixedFrame<T>]) -> Result<AmplitudeSeries<T>> {
    if traj.is_mixed() {
        return Err(Error::InvalidParameter("amplitudes need a pure-state trajectory".into()));
    }
    check_frames(&traj.times, frames)?;
    let phases = running_phases(&traj.times, frames);
    let c = frames
        .iter()
        .zip(&traj.states)
        .zip(&phases)
        .map(|((f, psi), ph)| {
            (0..f.eigen.len())
                .map(|j| cis(ph[j]) * f.vector(j).inner(psi))
                .collect()
        })
        .collect();
    Ok(AmplitudeSeries { times: traj.times.clone(), c, dynamical_phases: phases })
}

/// Everything the amplitude equation needs at one instant.
struct CouplingSample<T> {
    /// `⟨φ_j|φ̇_j⟩`
    diag: Vec<Complex<T>>,
    /// `⟨φ_j|φ̇_k⟩`, zero on the diagonal.
    off: Vec<Vec<Complex<T>>>,
    /// `∫₀^t E_j dτ`
    phase: Vec<T>,
}

fn coupling_sample<T: Real>(loop_spec: &LoopSpec<T>, frame: &GaugeFixedFrame<T>, h: T) -> Result<CouplingSample<T>> {
    let spec = &loop_spec.model;
    let dh = spec.hamiltonian_derivative_at(frame.t);
    let n = frame.eigen.len();
    let mut off = vec![vec![Complex::zero(); n]; n];
    for (j, row) in off.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            if j != k {
                *v = transition_element(frame, &dh, j, k)?;
            }
        }
    }
    Ok(CouplingSample { diag: diagonal_connection(spec, frame, h)?, off, phase: Vec::new() })
}

/// Integrates the amplitude equation
/// `ċ_j = −⟨φ_j|φ̇_j⟩c_j − Σ_{k≠j} e^{i∫(E_j−E_k)}⟨φ_j|φ̇_k⟩c_k`
/// directly in the instantaneous basis of `frames`.
///
/// `frames` must sit on the loop's sample times; midpoint frames are computed
/// internally and aligned with them.
pub fn integrate_amplitudes<T: Real>(
    loop_spec: &LoopSpec<T>,
    frames: &[GaugeFixedFrame<T>],
    c0: &[Complex<T>],
) -> Result<AmplitudeSeries<T>> {
    integrate(loop_spec, frames, c0, true)
}

/// Same as [`integrate_amplitudes`] with the inter-level coupling switched
/// off, so each amplitude only picks up its geometric phase.
pub fn integrate_amplitudes_uncoupled<T: Real>(
    loop_spec: &LoopSpec<T>,
    frames: &[GaugeFixedFrame<T>],
    c0: &[Complex<T>],
) -> Result<AmplitudeSeries<T>> {
    integrate(loop_spec, frames, c0, false)
}

fn integrate<T: Real>(
    loop_spec: &LoopSpec<T>,
    frames: &[GaugeFixedFrame<T>],
    c0: &[Complex<T>],
    coupled: bool,
) -> Result<AmplitudeSeries<T>> {
    let times = loop_spec.times();
    check_frames(&times, frames)?;
    let n_levels = frames[0].eigen.len();
    if c0.len() != n_levels {
        return Err(Error::DimensionMismatch { expected: n_levels.to_string(), found: c0.len().to_string() });
    }
    let spec = &loop_spec.model;
    let dt = loop_spec.dt();
    let half = dt / T::lit(2.0);
    let h = if spec.omega > T::zero() { T::lit(1e-4) / spec.omega } else { T::lit(1e-4) };

    // Half-step grid: even indices are the caller's frames, odd ones midpoints.
    let mut grid_frames: Vec<GaugeFixedFrame<T>> = Vec::with_capacity(2 * frames.len() - 1);
    for k in 0..frames.len() {
        if k > 0 {
            let mid = numeric_eigensystem(spec, times[k - 1] + half, Some(&frames[k - 1]))?;
            grid_frames.push(mid);
        }
        grid_frames.push(frames[k].clone());
    }
    let grid_times: Vec<T> = grid_frames.iter().map(|f| f.t).collect();
    let grid_phases = running_phases(&grid_times, &grid_frames);
    let mut samples = Vec::with_capacity(grid_frames.len());
    for (f, ph) in grid_frames.iter().zip(grid_phases) {
        let mut s = coupling_sample(loop_spec, f, h)?;
        s.phase = ph;
        samples.push(s);
    }

    let rhs = |s: &CouplingSample<T>, a: &[Complex<T>]| -> Vec<Complex<T>> {
        (0..n_levels)
            .map(|j| {
                let mut d = -s.diag[j] * a[j];
                if coupled {
                    for k in 0..n_levels {
                        if k != j && !s.off[j][k].is_zero() {
                            d = d - cis(s.phase[j] - s.phase[k]) * s.off[j][k] * a[k];
                        }
                    }
                }
                d
            })
            .collect()
    };
    let add = |a: &[Complex<T>], k: &[Complex<T>], w: T| -> Vec<Complex<T>> {
        a.iter().zip(k).map(|(x, y)| x + y.scale(w)).collect()
    };
    let norm = |a: &[Complex<T>]| a.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();

    let mut c = Vec::with_capacity(frames.len());
    c.push(c0.to_vec());
    for k in 0..loop_spec.n_steps {
        let a = &c[k];
        let (s0, sm, s1) = (&samples[2 * k], &samples[2 * k + 1], &samples[2 * k + 2]);
        let k1 = rhs(s0, a);
        let k2 = rhs(sm, &add(a, &k1, half));
        let k3 = rhs(sm, &add(a, &k2, half));
        let k4 = rhs(s1, &add(a, &k3, dt));
        let w = dt / T::lit(6.0);
        let next: Vec<Complex<T>> = (0..n_levels)
            .map(|j| a[j] + (k1[j] + k4[j]).scale(w) + (k2[j] + k3[j]).scale(w * T::lit(2.0)))
            .collect();
        guard(loop_spec.n_steps, (norm(&next) - norm(a)).abs())?;
        c.push(next);
    }
    let dynamical_phases = samples.into_iter().step_by(2).map(|s| s.phase).collect();
    Ok(AmplitudeSeries { times, c, dynamical_phases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, tensor};
    use crate::model::{CouplingKind, ModelSpec};
    use crate::spectra::{loop_frames, track_frames};
    use std::f64::consts::PI;

    fn ising(g: f64, theta: f64, omega: f64) -> ModelSpec<f64> {
        ModelSpec::new(CouplingKind::IsingZ, g, theta, omega, 0.0).unwrap()
    }

    fn ground_frame(spec: &ModelSpec<f64>) -> GaugeFixedFrame<f64> {
        numeric_eigensystem(spec, 0.0, None).unwrap()
    }

    #[test]
    fn stationary_state_only_gains_phase() {
        let spec = ising(0.6, 1.0, 0.0);
        let lp = LoopSpec::with_duration(spec, 5.0, 4096).unwrap();
        let f = ground_frame(&spec);
        let psi0 = f.vector(0).clone();
        let traj = evolve_pure(&lp, &psi0).unwrap();
        let expected = psi0.scaled(cis(-f.energy(0) * 5.0));
        assert!(traj.final_state().unwrap().fidelity(&expected) > 1.0 - 1e-8);
        let amps = project_amplitudes(&traj, &track_frames(&spec, &traj.times).unwrap()).unwrap();
        for row in &amps.c {
            assert!((row[0] - c(1.0, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn ising_preserves_qubit_two_polarization() {
        let spec = ising(1.0, PI / 3.0, 1.0);
        let lp = LoopSpec::new(spec, 2048).unwrap();
        let psi0 = StateVector::from_real(&[0.6, 0.0, 0.8, 0.0]).unwrap();
        let traj = evolve_pure(&lp, &psi0).unwrap();
        let z2 = tensor(&pauli::identity::<f64>(), &pauli::sigma_z());
        for s in &traj.states {
            assert!((z2.expectation(s).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fast_rotation_depletes_level() {
        let spec = ising(0.0, PI / 2.0, 10.0);
        let lp = LoopSpec::new(spec, 4096).unwrap();
        let traj = evolve_pure(&lp, ground_frame(&spec).vector(0)).unwrap();
        let frames = loop_frames(&lp).unwrap();
        let min_pop = traj
            .states
            .iter()
            .zip(&frames)
            .map(|(s, f)| f.vector(0).fidelity(s))
            .fold(1.0, f64::min);
        assert!(min_pop < 0.9, "{min_pop}");
    }

    #[test]
    fn coarse_steps_trip_the_guard() {
        let spec = ising(1.0, PI / 3.0, 0.01);
        let lp = LoopSpec::new(spec, 4096).unwrap();
        let psi0 = ground_frame(&spec).vector(0).clone();
        match evolve_pure(&lp, &psi0) {
            Err(Error::StepTooLarge { suggested_steps, .. }) => {
                assert!(suggested_steps > 4096);
                let retry = lp.with_steps(suggested_steps).unwrap();
                assert!(evolve_pure(&retry, &psi0).is_ok());
            }
            other => panic!("expected StepTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let lp = LoopSpec::new(ising(1.0, 1.0, 1.0), 64).unwrap();
        let unnorm = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(evolve_pure(&lp, &unnorm).is_err());
        let bad = ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.5, -0.5]);
        assert!(matches!(evolve_mixed(&lp, &bad), Err(Error::NonPhysicalState(_))));
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.5, 0.0]);
        assert!(matches!(evolve_mixed(&lp, &bad_trace), Err(Error::NonPhysicalState(_))));
    }

    #[test]
    fn maximally_mixed_is_invariant() {
        let lp = LoopSpec::new(ising(1.0, PI / 3.0, 1.0), 512).unwrap();
        let rho0 = ComplexMatrix::identity(4).scale_real(0.25);
        let traj = evolve_mixed(&lp, &rho0).unwrap();
        for r in traj.rho_states.as_ref().unwrap() {
            assert!(r.max_abs_diff(&rho0) < 1e-14);
        }
    }

    #[test]
    fn mixed_matches_pure() {
        let spec = ModelSpec::new(CouplingKind::FlipFlop, 1.0, PI / 3.0, 1.0, 0.2).unwrap();
        let lp = LoopSpec::new(spec, 2048).unwrap();
        let psi0 = StateVector::new(vec![c(0.5, 0.1), c(0.0, 0.5), c(0.3, -0.4), c(0.2, 0.0)])
            .unwrap()
            .normalized()
            .unwrap();
        let pure = evolve_pure(&lp, &psi0).unwrap();
        let mixed = evolve_mixed(&lp, &ComplexMatrix::projector(&psi0)).unwrap();
        for (s, r) in pure.states.iter().zip(mixed.rho_states.as_ref().unwrap()) {
            assert!(ComplexMatrix::projector(s).max_abs_diff(r) < 1e-8);
        }
    }

    #[test]
    fn mixed_spectrum_is_conserved() {
        let lp = LoopSpec::new(ising(0.4, 2.0, 0.7), 2048).unwrap();
        let rho0 = ComplexMatrix::from_rows(&[
            vec![c(0.4, 0.0), c(0.1, 0.05), c(0.0, 0.0), c(0.02, 0.0)],
            vec![c(0.1, -0.05), c(0.3, 0.0), c(0.0, 0.03), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -0.03), c(0.2, 0.0), c(0.01, 0.0)],
            vec![c(0.02, 0.0), c(0.0, 0.0), c(0.01, 0.0), c(0.1, 0.0)],
        ])
        .unwrap();
        let e0 = eig_hermitian(&rho0).unwrap().values;
        let traj = evolve_mixed(&lp, &rho0).unwrap();
        for r in traj.rho_states.as_ref().unwrap().iter().step_by(128) {
            assert!(r.hermitian_deviation() < 1e-12);
            assert!((r.trace().re - 1.0).abs() < 1e-8);
            let e = eig_hermitian(&((r + &r.adjoint()).scale_real(0.5))).unwrap().values;
            for (a, b) in e.iter().zip(&e0) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let spec = ising(1.0, PI / 3.0, 1.0);
        let psi0 = StateVector::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        let run = |n| evolve_pure(&LoopSpec::new(spec, n).unwrap(), &psi0).unwrap().states.pop().unwrap();
        let reference = run(1024);
        let e1 = run(128).max_abs_diff(&reference);
        let e2 = run(256).max_abs_diff(&reference);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn one_period_propagator_is_unitary() {
        let lp = LoopSpec::new(ising(1.0, PI / 3.0, 1.0), 4096).unwrap();
        let cols: Vec<StateVector<f64>> = (0..4)
            .map(|k| evolve_pure(&lp, &StateVector::basis(4, k)).unwrap().states.pop().unwrap())
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((cols[i].inner(&cols[j]) - c(d, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn amplitudes_stay_in_block_and_normalized() {
        let lp = LoopSpec::new(ising(1.0, PI / 3.0, 0.5), 4096).unwrap();
        let frames = loop_frames(&lp).unwrap();
        let traj = evolve_pure(&lp, frames[0].vector(0)).unwrap();
        let amps = project_amplitudes(&traj, &frames).unwrap();
        assert!(amps.max_norm_error() < 1e-8);
        for row in &amps.c {
            assert!(row[2].norm() < 1e-10 && row[3].norm() < 1e-10);
        }
        assert!(matches!(project_amplitudes(&traj, &frames[1..]), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn both_integrators_agree() {
        let lp = LoopSpec::new(ising(1.0, PI / 3.0, 0.1), 4096).unwrap();
        let frames = loop_frames(&lp).unwrap();
        let traj = evolve_pure(&lp, frames[0].vector(0)).unwrap();
        let proj = project_amplitudes(&traj, &frames).unwrap();
        let direct = integrate_amplitudes(&lp, &frames, &proj.c[0]).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in proj.c.iter().zip(&direct.c) {
            for j in 0..4 {
                worst = worst.max((a[j] - b[j]).norm());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn uncoupled_mode_gives_berry_phase() {
        let (g, th) = (1.0, PI / 3.0);
        let lp = LoopSpec::new(ising(g, th, 0.1), 1024).unwrap();
        let frames = loop_frames(&lp).unwrap();
        let c0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let amps = integrate_amplitudes_uncoupled(&lp, &frames, &c0).unwrap();
        let e1 = (g * g + 1.0 + 2.0 * g * th.cos()).sqrt();
        let m1 = th.sin().powi(2) + (g + th.cos() + e1).powi(2);
        let gamma = 2.0 * PI * th.sin().powi(2) / m1;
        let end = amps.final_amplitudes()[0];
        assert!((end.norm() - 1.0).abs() < 1e-10);
        assert!((crate::scalar::wrap_phase(end.arg() - gamma)).abs() < 1e-7, "{} vs {gamma}", end.arg());
    }

    #[test]
    fn slow_rotation_keeps_population() {
        let lp = LoopSpec::new(ising(1.0, PI / 3.0, 1e-3), 16384).unwrap();
        let frames = loop_frames(&lp).unwrap();
        let c0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let amps = integrate_amplitudes(&lp, &frames, &c0).unwrap();
        let worst = (0..amps.c.len()).map(|k| 1.0 - amps.population(k, 0)).fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
    }
}
