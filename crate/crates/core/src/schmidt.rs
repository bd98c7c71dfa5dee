//! Schmidt decomposition of the two-qubit state and the subsystem-level
//! non-transitional diagnostics built on it.
//!
//! For `|ψ⟩ = Σ_i c_i |E_i⟩|e_i⟩` the weights are `p_i = |c_i|²`, sorted
//! descending. A standalone decomposition fixes both local bases with the
//! spectral gauge rule (dominant component real positive); along a series each
//! vector is instead rephased to have a real positive overlap with its
//! predecessor, which keeps the bases smooth for finite differences. The
//! Schmidt coefficients `c_i` are complex in general.

use num_complex::Complex;
use num_traits::Zero;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace_2, ComplexMatrix, StateVector};
use crate::scalar::{c, cis, Real};

/// Weights closer than this are treated as degenerate.
pub const SCHMIDT_DEG_TOL: f64 = 1e-6;
/// Minimum number of steps the rate-equation residual needs.
pub const RESIDUAL_MIN_STEPS: usize = 64;
/// Phase of `v` rotated to make `⟨prev|v⟩` real and positive.
fn follow<T: Real>(v: &StateVector<T>, prev: &StateVector<T>) -> StateVector<T> {
    let ov = prev.inner(v);
    let mag = ov.norm();
    if mag > T::zero() {
        v.scaled(ov.conj().unscale(mag))
    } else {
        v.clone()
    }
}

/// Below this Schmidt amplitude the qubit-2 vector is completed by
/// orthogonality rather than read off the state.
const EMPTY_CHANNEL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm<T> {
    /// Weights, descending; they sum to one.
    pub p: [T; 2],
    /// `⟨E_i e_i|ψ⟩`, with `|c_i|² = p_i`.
    pub coefficients: [Complex<T>; 2],
    /// Qubit-1 vectors `|E_i⟩`.
    pub basis1: [StateVector<T>; 2],
    /// Qubit-2 vectors `|e_i⟩`.
    pub basis2: [StateVector<T>; 2],
    /// Set when `|p₁ − p₂|` is below [`SCHMIDT_DEG_TOL`] (bases taken from the
    /// previous sample when there is one) or when continuity would have
    /// swapped the labels.
    pub flagged: bool,
}

impl<T: Real> SchmidtForm<T> {
    /// Product vector `|E_i⟩|e_i⟩`.
    pub fn product(&self, i: usize) -> StateVector<T> {
        self.basis1[i].tensor(&self.basis2[i])
    }

    /// `Σ_i c_i |E_i⟩|e_i⟩`.
    pub fn reconstruct(&self) -> StateVector<T> {
        self.product(0)
            .scaled(self.coefficients[0])
            .axpy(self.coefficients[1], &self.product(1))
    }

    /// `⟨E_j e_j|A|E_k e_k⟩` as a 2×2 matrix.
    pub fn operator_matrix(&self, a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let prods = [self.product(0), self.product(1)];
        let mut m = ComplexMatrix::zeros(2, 2);
        for j in 0..2 {
            for k in 0..2 {
                m[(j, k)] = a.matrix_element(&prods[j], &prods[k]);
            }
        }
        m
    }
}

fn check_dim<T: Real>(psi: &StateVector<T>) -> Result<()> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: "4".into(), found: psi.dim().to_string() });
    }
    Ok(())
}

/// Schmidt form of a two-qubit state in the fixed gauge.
pub fn schmidt_decompose<T: Real>(psi: &StateVector<T>) -> Result<SchmidtForm<T>> {
    schmidt_decompose_after(psi, None)
}

/// Schmidt form aligned with `prev`: every basis vector is rephased onto its
/// predecessor, and near-degenerate weights reuse the previous bases.
pub fn schmidt_decompose_after<T: Real>(psi: &StateVector<T>, prev: Option<&SchmidtForm<T>>) -> Result<SchmidtForm<T>> {
    check_dim(psi)?;
    let psi = psi.normalized()?;
    // M[a][b] = ψ[2a + b]; ρ₁ = M M†.
    let m = ComplexMatrix::from_vec(2, 2, psi.amps().to_vec())?;
    let rho1 = &m * &m.adjoint();
    let eig = eig_hermitian(&rho1)?;
    let degenerate = (eig.values[1] - eig.values[0]).abs() < T::lit(SCHMIDT_DEG_TOL);

    let mut flagged = degenerate;
    let mut basis1: [StateVector<T>; 2] = match (degenerate, prev) {
        (true, Some(p)) => p.basis1.clone(),
        _ => [eig.vectors[1].with_canonical_phase(), eig.vectors[0].with_canonical_phase()],
    };
    if let (false, Some(p)) = (degenerate, prev) {
        let keep = basis1[0].fidelity(&p.basis1[0]) + basis1[1].fidelity(&p.basis1[1]);
        let swap = basis1[0].fidelity(&p.basis1[1]) + basis1[1].fidelity(&p.basis1[0]);
        flagged |= swap > keep;
        for (v, pv) in basis1.iter_mut().zip(&p.basis1) {
            *v = follow(v, pv);
        }
    }

    // w_i[b] = Σ_a conj(E_i[a]) M[a][b]
    let partial = |e: &StateVector<T>| {
        StateVector::from_vec((0..2).map(|b| (0..2).fold(Complex::<T>::zero(), |s, a| s + e[a].conj() * m[(a, b)])).collect())
    };
    let w = [partial(&basis1[0]), partial(&basis1[1])];
    let s = [w[0].norm(), w[1].norm()];
    let full = |i: usize| s[i] > T::lit(EMPTY_CHANNEL);
    let mut basis2: [StateVector<T>; 2] = match (full(0), full(1)) {
        (true, true) => [w[0].scaled(c(s[0].recip(), T::zero())), w[1].scaled(c(s[1].recip(), T::zero()))],
        (true, false) => {
            let e0 = w[0].scaled(c(s[0].recip(), T::zero()));
            let e1 = e0.qubit_complement();
            [e0, e1]
        }
        (false, true) => {
            let e1 = w[1].scaled(c(s[1].recip(), T::zero()));
            let e0 = e1.qubit_complement();
            [e0, e1]
        }
        (false, false) => return Err(Error::NonPhysicalState("state has zero norm".into())),
    };
    for (i, v) in basis2.iter_mut().enumerate() {
        *v = v.with_canonical_phase();
        if let Some(p) = prev {
            *v = follow(v, &p.basis2[i]);
        }
    }
    let coefficients = [basis2[0].inner(&w[0]), basis2[1].inner(&w[1])];
    let total = coefficients[0].norm_sqr() + coefficients[1].norm_sqr();
    let p = [coefficients[0].norm_sqr() / total, coefficients[1].norm_sqr() / total];
    Ok(SchmidtForm { p, coefficients, basis1, basis2, flagged })
}

/// Schmidt forms along a pure trajectory with the composite Hamiltonian
/// projected onto the product bases.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSeries<T> {
    pub times: Vec<T>,
    pub forms: Vec<SchmidtForm<T>>,
    pub p_series: Vec<[T; 2]>,
    /// `H_jk(t) = ⟨E_j e_j|Ĥ(t)|E_k e_k⟩`.
    pub h_series: Vec<ComplexMatrix<T>>,
    /// `R₁₂(t)`; `None` where `H₁₁ = H₂₂`.
    pub ratio_series: Vec<Option<T>>,
}

impl<T: Real> SchmidtSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |p₁(t) − p₁(0)|`.
    pub fn p_drift(&self) -> T {
        let p0 = self.p_series[0][0];
        self.p_series.iter().fold(T::zero(), |m, p| m.max((p[0] - p0).abs()))
    }

    /// `max_t R₁₂(t)`, or `None` if any sample is singular.
    pub fn ratio_max(&self) -> Option<T> {
        self.ratio_series
            .iter()
            .try_fold(T::zero(), |m, r| r.map(|v| m.max(v)))
    }

    pub fn flagged_samples(&self) -> usize {
        self.forms.iter().filter(|f| f.flagged).count()
    }
}

/// `|A₂₁| / |H₁₁ − H₂₂|` for a 2×2 Schmidt-basis matrix; `None` when the
/// diagonal is degenerate and the numerator does not vanish.
fn ratio<T: Real>(h: &ComplexMatrix<T>, numerator: T) -> Option<T> {
    let scale = T::one().max(h.max_abs());
    let tiny = T::lit(1e-12).max(T::lit(64.0) * T::epsilon()) * scale;
    if numerator <= tiny {
        return Some(T::zero());
    }
    let diff = (h[(0, 0)] - h[(1, 1)]).norm();
    if diff <= T::lit(1e-8) * scale {
        None
    } else {
        Some(numerator / diff)
    }
}

pub fn schmidt_series<T: Real>(traj: &Trajectory<T>) -> Result<SchmidtSeries<T>> {
    if traj.is_mixed() {
        return Err(Error::InvalidParameter("the Schmidt series needs a pure-state trajectory".into()));
    }
    let spec = &traj.loop_spec.model;
    let mut forms: Vec<SchmidtForm<T>> = Vec::with_capacity(traj.len());
    for psi in &traj.states {
        let f = schmidt_decompose_after(psi, forms.last())?;
        forms.push(f);
    }
    let h_series: Vec<ComplexMatrix<T>> = forms
        .iter()
        .zip(&traj.times)
        .map(|(f, &t)| f.operator_matrix(&spec.hamiltonian_at(t)))
        .collect();
    let mut series = SchmidtSeries {
        times: traj.times.clone(),
        p_series: forms.iter().map(|f| f.p).collect(),
        forms,
        h_series,
        ratio_series: Vec::new(),
    };
    series.ratio_series = nontransitional_ratios(&series);
    Ok(series)
}

/// `R₁₂(t) = |H₁₂(t)| / |H₁₁(t) − H₂₂(t)|` per sample.
pub fn nontransitional_ratios<T: Real>(series: &SchmidtSeries<T>) -> Vec<Option<T>> {
    series.h_series.iter().map(|h| ratio(h, h[(0, 1)].norm())).collect()
}

/// `|⟨E₂e₂|Γ_α|E₁e₁⟩| / |H₁₁ − H₂₂|` per sample (outer index) and operator.
pub fn open_system_ratio<T: Real>(series: &SchmidtSeries<T>, gamma_ops: &[ComplexMatrix<T>]) -> Result<Vec<Vec<Option<T>>>> {
    for g in gamma_ops {
        if g.rows() != 4 || g.cols() != 4 {
            return Err(Error::DimensionMismatch { expected: "4x4".into(), found: format!("{}x{}", g.rows(), g.cols()) });
        }
    }
    Ok(series
        .forms
        .iter()
        .zip(&series.h_series)
        .map(|(f, h)| {
            let (p1, p2) = (f.product(0), f.product(1));
            gamma_ops.iter().map(|g| ratio(h, g.matrix_element(&p2, &p1).norm())).collect()
        })
        .collect())
}

/// First derivative of uniformly spaced samples: centered inside, one-sided
/// second order at both ends.
fn derivative_at<V, F>(k: usize, n: usize, dt: V, f: F) -> Complex<V>
where
    V: Real,
    F: Fn(usize) -> Complex<V>,
{
    let two = V::lit(2.0);
    if k == 0 {
        (f(0).scale(-V::lit(3.0)) + f(1).scale(V::lit(4.0)) - f(2)).unscale(two * dt)
    } else if k == n - 1 {
        (f(n - 1).scale(V::lit(3.0)) - f(n - 2).scale(V::lit(4.0)) + f(n - 3)).unscale(two * dt)
    } else {
        (f(k + 1) - f(k - 1)).unscale(two * dt)
    }
}

/// `⟨v_k|v̇_k⟩` by the same stencils as [`derivative_at`].
fn connection_at<T: Real>(k: usize, vs: &[&StateVector<T>], dt: T) -> Complex<T> {
    derivative_at(k, vs.len(), dt, |m| vs[k].inner(vs[m]))
}

/// Largest modulus of the exact amplitude identity
/// `i ȧ_j + i a_j(⟨E_j|Ė_j⟩ + ⟨e_j|ė_j⟩) − Σ_{k≠j} a_k e^{−i∫(H_kk−H_jj)} H_jk`
/// over all samples and both channels, where `a_j = c_j e^{i∫H_jj}` and all
/// derivatives are finite differences.
pub fn rate_equation_residual<T: Real>(series: &SchmidtSeries<T>) -> Result<T> {
    let n = series.len();
    if n < RESIDUAL_MIN_STEPS + 1 {
        return Err(Error::InsufficientSamples { required: RESIDUAL_MIN_STEPS, found: n.saturating_sub(1) });
    }
    let dt = (series.times[n - 1] - series.times[0]) / T::from_usize(n - 1).expect("count");
    let half = T::lit(0.5);

    // ∫H_jj by composite trapezoid.
    let mut phase = vec![[T::zero(); 2]; n];
    for k in 1..n {
        let h = series.times[k] - series.times[k - 1];
        for j in 0..2 {
            phase[k][j] = phase[k - 1][j]
                + h * half * (series.h_series[k - 1][(j, j)].re + series.h_series[k][(j, j)].re);
        }
    }
    let a: Vec<[Complex<T>; 2]> = (0..n)
        .map(|k| {
            let f = &series.forms[k];
            [f.coefficients[0] * cis(phase[k][0]), f.coefficients[1] * cis(phase[k][1])]
        })
        .collect();
    let i = c(T::zero(), T::one());
    let mut worst = T::zero();
    for j in 0..2 {
        let b1: Vec<&StateVector<T>> = series.forms.iter().map(|f| &f.basis1[j]).collect();
        let b2: Vec<&StateVector<T>> = series.forms.iter().map(|f| &f.basis2[j]).collect();
        let other = 1 - j;
        for k in 0..n {
            let a_dot = derivative_at(k, n, dt, |m| a[m][j]);
            let conn = connection_at(k, &b1, dt) + connection_at(k, &b2, dt);
            let coupling = a[k][other] * cis(phase[k][j] - phase[k][other]) * series.h_series[k][(j, other)];
            let r = i * a_dot + i * a[k][j] * conn - coupling;
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Eigenpairs of the qubit-1 reduced density matrix at one sample, values
/// descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpectrum<T> {
    pub values: [T; 2],
    pub vectors: [StateVector<T>; 2],
}

/// Spectrum of `ρ₁(t)` along a pure or mixed trajectory, continuity-matched.
/// Pure states are normalized first, so integrator norm loss does not leak
/// into the weights.
pub fn reduced_density_eigen<T: Real>(traj: &Trajectory<T>) -> Result<Vec<ReducedSpectrum<T>>> {
    let rhos: Vec<ComplexMatrix<T>> = match &traj.rho_states {
        Some(r) => r.clone(),
        None => traj
            .states
            .iter()
            .map(|s| s.normalized().map(|v| ComplexMatrix::projector(&v)))
            .collect::<Result<_>>()?,
    };
    let mut out: Vec<ReducedSpectrum<T>> = Vec::with_capacity(rhos.len());
    for rho in &rhos {
        // Drop the integrator's tiny anti-Hermitian residue before tracing.
        let sym = (rho + &rho.adjoint()).scale_real(T::lit(0.5));
        let r1 = partial_trace_2(&sym)?;
        let eig = eig_hermitian(&r1)?;
        let values = [eig.values[1], eig.values[0]];
        let degenerate = (values[0] - values[1]).abs() < T::lit(SCHMIDT_DEG_TOL);
        let vectors = match (degenerate, out.last()) {
            (true, Some(prev)) => prev.vectors.clone(),
            (_, prev) => {
                let mut v = [eig.vectors[1].with_canonical_phase(), eig.vectors[0].with_canonical_phase()];
                if let Some(p) = prev {
                    for (x, px) in v.iter_mut().zip(&p.vectors) {
                        *x = follow(x, px);
                    }
                }
                v
            }
        };
        out.push(ReducedSpectrum { values, vectors });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_mixed, evolve_pure};
    use crate::linalg::{pauli, tensor};
    use crate::model::{CouplingKind, LoopSpec, ModelSpec};
    use crate::spectra::{analytic_eigensystem, numeric_eigensystem};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn v(xs: &[(f64, f64)]) -> StateVector<f64> {
        StateVector::new(xs.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn product_state() {
        let f = schmidt_decompose(&StateVector::<f64>::basis(4, 0)).unwrap();
        assert_eq!(f.p, [1.0, 0.0]);
        assert!(f.basis1[0].max_abs_diff(&StateVector::basis(2, 0)) < 1e-15);
        assert!(f.basis2[0].max_abs_diff(&StateVector::basis(2, 0)) < 1e-15);
    }

    #[test]
    fn bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = schmidt_decompose(&StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap()).unwrap();
        assert!((f.p[0] - 0.5).abs() < 1e-12 && (f.p[1] - 0.5).abs() < 1e-12);
        assert!(f.flagged);
        assert!(f.reconstruct().fidelity(&StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap()) > 1.0 - 1e-10);
    }

    #[test]
    fn ising_eigenstates_are_products() {
        for &(g, th, t) in &[(1.0, PI / 3.0, 0.4), (0.2, 2.8, 3.0), (2.5, 1.0, 0.0)] {
            let spec = ModelSpec::new(CouplingKind::IsingZ, g, th, 1.0, 0.0).unwrap();
            for vec in analytic_eigensystem(&spec, t).unwrap().vectors {
                let f = schmidt_decompose(&vec).unwrap();
                assert!((f.p[0] - 1.0).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn reconstruction_is_exact(xs in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let raw = v(&[(xs[0], xs[1]), (xs[2], xs[3]), (xs[4], xs[5]), (xs[6], xs[7])]);
            prop_assume!(raw.norm() > 1e-3);
            let psi = raw.normalized().unwrap();
            let f = schmidt_decompose(&psi).unwrap();
            prop_assert!(f.p[0] >= f.p[1] && f.p[1] >= 0.0);
            prop_assert!((f.p[0] + f.p[1] - 1.0).abs() < 1e-12);
            prop_assert!(f.reconstruct().fidelity(&psi) > 1.0 - 1e-10);
            prop_assert!(f.basis1[0].inner(&f.basis1[1]).norm() < 1e-12);
            prop_assert!(f.basis2[0].inner(&f.basis2[1]).norm() < 1e-12);
        }
    }

    fn phi1_run(omega: f64, n: usize) -> Trajectory<f64> {
        let spec = ModelSpec::new(CouplingKind::IsingZ, 1.0, PI / 3.0, omega, 0.0).unwrap();
        let lp = LoopSpec::new(spec, n).unwrap();
        evolve_pure(&lp, numeric_eigensystem(&spec, 0.0, None).unwrap().vector(0)).unwrap()
    }

    #[test]
    fn ising_run_stays_product_and_nontransitional() {
        let series = schmidt_series(&phi1_run(0.5, 2048)).unwrap();
        assert!(series.p_drift() < 1e-8);
        for r in &series.ratio_series {
            assert!(r.unwrap() < 1e-10);
        }
        // Local operators never connect the two Schmidt channels; a two-body
        // one does.
        let x1 = tensor(&pauli::sigma_x::<f64>(), &pauli::identity());
        let xx = tensor(&pauli::sigma_x::<f64>(), &pauli::sigma_x());
        let ops = [ComplexMatrix::identity(4), x1, xx];
        let open = open_system_ratio(&series, &ops).unwrap();
        assert!(open.iter().all(|row| row[0] == Some(0.0)));
        assert!(open.iter().all(|row| row[1].unwrap() < 1e-12));
        assert!(open.iter().any(|row| row[2].unwrap() > 1e-3));
    }

    #[test]
    fn hamiltonian_as_open_operator_matches_ratio() {
        let spec = ModelSpec::new(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.5, 0.0).unwrap();
        let lp = LoopSpec::new(spec, 1024).unwrap();
        let psi0 = numeric_eigensystem(&spec, 0.0, None).unwrap().vector(0).clone();
        let traj = evolve_pure(&lp, &psi0).unwrap();
        let series = schmidt_series(&traj).unwrap();
        let ops: Vec<ComplexMatrix<f64>> = traj.times.iter().map(|&t| spec.hamiltonian_at(t)).collect();
        for (k, r) in series.ratio_series.iter().enumerate().step_by(64) {
            let open = open_system_ratio(&series, std::slice::from_ref(&ops[k])).unwrap();
            assert!((open[k][0].unwrap() - r.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn static_run_keeps_weights() {
        let spec = ModelSpec::new(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.0, 0.0).unwrap();
        let lp = LoopSpec::with_duration(spec, 10.0, 2048).unwrap();
        let psi0 = numeric_eigensystem(&spec, 0.0, None).unwrap().vector(1).clone();
        let series = schmidt_series(&evolve_pure(&lp, &psi0).unwrap()).unwrap();
        assert!(series.p_drift() < 1e-9);
        // entangled eigenstate: the amplitudes rotate, so only truncation error remains
        assert!(rate_equation_residual(&series).unwrap() < 1e-4);

        let spec = ModelSpec::new(CouplingKind::IsingZ, 1.0, PI / 3.0, 0.0, 0.0).unwrap();
        let lp = LoopSpec::with_duration(spec, 10.0, 2048).unwrap();
        let psi0 = numeric_eigensystem(&spec, 0.0, None).unwrap().vector(0).clone();
        let series = schmidt_series(&evolve_pure(&lp, &psi0).unwrap()).unwrap();
        assert!(rate_equation_residual(&series).unwrap() < 1e-8);
    }

    #[test]
    fn residual_converges() {
        let spec = ModelSpec::new(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.5, 0.0).unwrap();
        let psi0 = numeric_eigensystem(&spec, 0.0, None).unwrap().vector(0).clone();
        let res = |n| {
            let traj = evolve_pure(&LoopSpec::new(spec, n).unwrap(), &psi0).unwrap();
            rate_equation_residual(&schmidt_series(&traj).unwrap()).unwrap()
        };
        let (r1, r2) = (res(1024), res(2048));
        assert!(r2 < r1 && r1 < 1e-3, "{r1} {r2}");
        let short = schmidt_series(&evolve_pure(&LoopSpec::with_duration(spec, 1.0, 32).unwrap(), &psi0).unwrap()).unwrap();
        assert!(matches!(rate_equation_residual(&short), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn reduced_spectrum_agrees_with_weights() {
        let spec = ModelSpec::new(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.5, 0.0).unwrap();
        let lp = LoopSpec::new(spec, 1024).unwrap();
        let psi0 = numeric_eigensystem(&spec, 0.0, None).unwrap().vector(0).clone();
        let traj = evolve_pure(&lp, &psi0).unwrap();
        let series = schmidt_series(&traj).unwrap();
        let red = reduced_density_eigen(&traj).unwrap();
        for (r, p) in red.iter().zip(&series.p_series) {
            assert!((r.values[0] - p[0]).abs() < 1e-9 && (r.values[1] - p[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn uncoupled_mixed_weights_are_constant() {
        let spec = ModelSpec::new(CouplingKind::IsingZ, 0.0, PI / 3.0, 1.0, 0.0).unwrap();
        let lp = LoopSpec::new(spec, 1024).unwrap();
        let rho0 = ComplexMatrix::from_real_diagonal(&[0.7, 0.0, 0.0, 0.3]);
        let red = reduced_density_eigen(&evolve_mixed(&lp, &rho0).unwrap()).unwrap();
        for r in &red {
            assert!((r.values[0] - 0.7).abs() < 1e-8 && (r.values[1] - 0.3).abs() < 1e-8);
        }
        let mm = ComplexMatrix::identity(4).scale_real(0.25);
        for r in reduced_density_eigen(&evolve_mixed(&lp, &mm).unwrap()).unwrap() {
            assert!((r.values[0] - 0.5).abs() < 1e-12);
        }
    }
}
