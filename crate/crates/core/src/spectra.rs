//! Instantaneous eigensystems along the loop and the adiabaticity metric
//! `Γ_ij = |⟨φ_i|φ̇_j⟩ / (E_i − E_j)|`.
//!
//! Level labels are 0-based: label `k` corresponds to `E_{k+1}`. For the
//! Ising and uncoupled models the order follows the closed form
//! `E₁,₂ = ±√(g² + 1 + 2g cos θ)`, `E₃,₄ = ±√(g² + 1 − 2g cos θ)`; for the
//! flip-flop model labels start in ascending energy order and are carried by
//! continuity from frame to frame.
//!
//! Gauge: every eigenvector is rephased so its dominant component is real and
//! positive. Along a track, a vector whose phase would jump by more than 60°
//! relative to the previous frame is rotated back onto it instead.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{degeneracy_groups, degeneracy_tolerance, eig_hermitian, ComplexMatrix, EigenPairSet, StateVector, DEFAULT_DEG_REL_TOL};
use crate::model::{CouplingKind, LoopSpec, ModelSpec};
use crate::scalar::{c, cis, Real};

/// Labels below this subspace weight are considered ambiguous.
const LABEL_OVERLAP_MIN: f64 = 0.6;
/// `cos 60°`: phase jumps beyond this trigger continuity alignment.
const PHASE_JUMP_COS: f64 = 0.5;

/// Eigenpairs at one instant, in label order and fixed gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFixedFrame<T> {
    pub t: T,
    /// Values, vectors and degeneracy groups indexed by label.
    pub eigen: EigenPairSet<T>,
    /// `ordering[k]` is the label assigned to the solver's `k`-th (ascending)
    /// eigenpair.
    pub ordering: Vec<usize>,
    /// Set when labels inside a degenerate subspace could not be resolved.
    pub ambiguous: bool,
}

impl<T: Real> GaugeFixedFrame<T> {
    pub fn energy(&self, label: usize) -> T {
        self.eigen.values[label]
    }

    pub fn vector(&self, label: usize) -> &StateVector<T> {
        &self.eigen.vectors[label]
    }

    pub fn energies(&self) -> &[T] {
        &self.eigen.values
    }

    pub fn degeneracy_tolerance(&self) -> T {
        degeneracy_tolerance(&self.eigen.values, T::lit(DEFAULT_DEG_REL_TOL))
    }
}

/// Closed-form eigenpairs of the Ising (or uncoupled) model in label order.
pub fn analytic_eigensystem<T: Real>(spec: &ModelSpec<T>, t: T) -> Result<EigenPairSet<T>> {
    let g = match spec.coupling {
        CouplingKind::IsingZ => spec.g,
        CouplingKind::None => T::zero(),
        CouplingKind::FlipFlop => return Err(Error::UnsupportedModel("flip_flop")),
    };
    spec.validate()?;
    let (s, co) = spec.theta.sin_cos();
    let phi = spec.azimuth(t);
    let two = T::lit(2.0);
    let e12 = (g * g + T::one() + two * g * co).max(T::zero()).sqrt();
    let e34 = (g * g + T::one() - two * g * co).max(T::zero()).sqrt();
    let values = vec![e12, -e12, e34, -e34];

    let mut vectors = Vec::with_capacity(4);
    for (label, &e) in values.iter().enumerate() {
        // (upper, lower) are the amplitudes on the qubit-1 |↑⟩, |↓⟩ states;
        // qubit 2 is |↑⟩ for labels 0,1 and |↓⟩ for labels 2,3.
        let a = if label < 2 { g + co } else { co - g };
        let (upper, lower) = block_eigenvector(a, s, phi, e, label % 2 == 0);
        let (i_up, i_dn) = if label < 2 { (0, 2) } else { (1, 3) };
        let mut v = StateVector::zeros(4);
        v[i_up] = upper;
        v[i_dn] = lower;
        vectors.push(v);
    }
    let degeneracy_groups = degeneracy_groups(&values, T::lit(DEFAULT_DEG_REL_TOL));
    Ok(EigenPairSet { values, vectors, degeneracy_groups })
}

/// Normalized eigenvector of `[[a, s e^{iφ}], [s e^{−iφ}, −a]]` for eigenvalue
/// `e`, in the closed form `(a + e, s e^{−iφ})/√M` or, when that vanishes, the
/// parallel form `(s e^{iφ}, e − a)`.
fn block_eigenvector<T: Real>(a: T, s: T, phi: T, e: T, upper_branch: bool) -> (Complex<T>, Complex<T>) {
    let primary = (c(a + e, T::zero()), cis(-phi).scale(s));
    let alternate = (cis(phi).scale(s), c(e - a, T::zero()));
    let norm = |p: &(Complex<T>, Complex<T>)| (p.0.norm_sqr() + p.1.norm_sqr()).sqrt();
    let (n1, n2) = (norm(&primary), norm(&alternate));
    let (v, n) = if n1 >= n2 { (primary, n1) } else { (alternate, n2) };
    if n <= T::epsilon() * T::lit(16.0) {
        // Zero block: the branch is a bare basis state.
        return if upper_branch {
            (c(T::one(), T::zero()), Complex::zero())
        } else {
            (Complex::zero(), c(T::one(), T::zero()))
        };
    }
    (v.0.unscale(n), v.1.unscale(n))
}

/// Rotates `v` back onto `prev` when its phase relative to `prev` has jumped
/// by more than 60°; otherwise returns it unchanged.
pub fn align_phase<T: Real>(v: &StateVector<T>, prev: &StateVector<T>) -> StateVector<T> {
    let ov = prev.inner(v);
    let mag = ov.norm();
    if mag > T::zero() && ov.re < T::lit(PHASE_JUMP_COS) * mag {
        v.scaled(ov.conj().unscale(mag))
    } else {
        v.clone()
    }
}

/// Diagonalizes `Ĥ(t)` and relabels the eigenpairs into model order.
///
/// Ising/uncoupled: labels come from overlap with the closed form, with
/// degenerate subspaces rotated onto it. Flip-flop: labels follow `prev`, or
/// ascending energy without one.
pub fn numeric_eigensystem<T: Real>(
    spec: &ModelSpec<T>,
    t: T,
    prev: Option<&GaugeFixedFrame<T>>,
) -> Result<GaugeFixedFrame<T>> {
    spec.validate()?;
    let h = spec.hamiltonian_at(t);
    let solved = eig_hermitian(&h)?;

    let reference: Option<(Vec<StateVector<T>>, bool)> = match spec.coupling {
        CouplingKind::IsingZ | CouplingKind::None => Some((analytic_eigensystem(spec, t)?.vectors, false)),
        CouplingKind::FlipFlop => prev.map(|p| (p.eigen.vectors.clone(), true)),
    };

    let (mut vectors, ordering, ambiguous) = match reference {
        Some((refs, from_prev)) => {
            let mut fit = assign_labels(&refs, &solved);
            if fit.min_weight < T::lit(LABEL_OVERLAP_MIN) && !from_prev {
                if let Some(p) = prev {
                    fit = assign_labels(&p.eigen.vectors, &solved);
                    fit.ambiguous = true;
                }
            }
            if fit.min_weight < T::lit(LABEL_OVERLAP_MIN) && prev.is_none() {
                return Err(Error::DegenerateLabeling { t: t.as_f64(), overlap: fit.min_weight.as_f64() });
            }
            let amb = fit.ambiguous || fit.min_weight < T::lit(LABEL_OVERLAP_MIN);
            (fit.vectors, fit.ordering, amb)
        }
        None => {
            let amb = solved.degeneracy_groups.iter().any(|g| g.len() > 1);
            (solved.vectors.clone(), (0..solved.len()).collect(), amb)
        }
    };

    for (label, v) in vectors.iter_mut().enumerate() {
        *v = v.with_canonical_phase();
        if let Some(p) = prev {
            *v = align_phase(v, p.vector(label));
        }
    }
    let values: Vec<T> = vectors.iter().map(|v| h.expectation(v).re).collect();
    let degeneracy_groups = degeneracy_groups(&values, T::lit(DEFAULT_DEG_REL_TOL));
    Ok(GaugeFixedFrame {
        t,
        eigen: EigenPairSet { values, vectors, degeneracy_groups },
        ordering,
        ambiguous,
    })
}

struct LabelFit<T> {
    vectors: Vec<StateVector<T>>,
    ordering: Vec<usize>,
    min_weight: T,
    ambiguous: bool,
}

/// Matches solver eigenpairs to reference vectors by subspace weight, rotating
/// degenerate subspaces onto the projected references.
fn assign_labels<T: Real>(refs: &[StateVector<T>], solved: &EigenPairSet<T>) -> LabelFit<T> {
    let n = refs.len();
    let groups = &solved.degeneracy_groups;
    let weight = |l: usize, gi: usize| -> T {
        groups[gi]
            .iter()
            .fold(T::zero(), |acc, &k| acc + refs[l].fidelity(&solved.vectors[k]))
    };
    let mut candidates: Vec<(T, usize, usize)> = Vec::with_capacity(n * groups.len());
    for l in 0..n {
        for gi in 0..groups.len() {
            candidates.push((weight(l, gi), l, gi));
        }
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut capacity: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut label_group = vec![usize::MAX; n];
    let mut label_weight = vec![T::zero(); n];
    for &(w, l, gi) in &candidates {
        if label_group[l] == usize::MAX && capacity[gi] > 0 {
            label_group[l] = gi;
            label_weight[l] = w;
            capacity[gi] -= 1;
        }
    }
    let min_weight = label_weight.iter().fold(T::infinity(), |m, &w| m.min(w));

    let mut vectors = vec![StateVector::zeros(refs[0].dim()); n];
    let mut ordering = vec![0usize; solved.len()];
    let mut ambiguous = false;
    for (gi, group) in groups.iter().enumerate() {
        let labels: Vec<usize> = (0..n).filter(|&l| label_group[l] == gi).collect();
        if group.len() == 1 {
            vectors[labels[0]] = solved.vectors[group[0]].clone();
            ordering[group[0]] = labels[0];
            continue;
        }
        // Project each reference into the degenerate subspace, then
        // Gram-Schmidt in label order.
        let mut basis: Vec<StateVector<T>> = Vec::with_capacity(labels.len());
        for &l in &labels {
            let mut p = StateVector::zeros(refs[l].dim());
            for &k in group {
                let u = &solved.vectors[k];
                p = p.axpy(u.inner(&refs[l]), u);
            }
            for b in &basis {
                p = p.axpy(-b.inner(&p), b);
            }
            let norm = p.norm();
            if norm < T::lit(1e-6) {
                ambiguous = true;
                // Fall back to any unit vector of the subspace orthogonal to the
                // ones already chosen.
                p = group
                    .iter()
                    .map(|&k| {
                        let mut q = solved.vectors[k].clone();
                        for b in &basis {
                            q = q.axpy(-b.inner(&q), b);
                        }
                        q
                    })
                    .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
                    .expect("non-empty group");
            }
            let p = p.normalized().expect("non-zero projection");
            basis.push(p.clone());
            vectors[l] = p;
        }
        for (&k, &l) in group.iter().zip(&labels) {
            ordering[k] = l;
        }
    }
    LabelFit { vectors, ordering, min_weight, ambiguous }
}

/// Gauge-fixed frames at the given times, each aligned with its predecessor.
pub fn track_frames<T: Real>(spec: &ModelSpec<T>, times: &[T]) -> Result<Vec<GaugeFixedFrame<T>>> {
    let mut frames: Vec<GaugeFixedFrame<T>> = Vec::with_capacity(times.len());
    for &t in times {
        let f = numeric_eigensystem(spec, t, frames.last())?;
        frames.push(f);
    }
    Ok(frames)
}

/// Frames at the loop's sample times.
pub fn loop_frames<T: Real>(loop_spec: &LoopSpec<T>) -> Result<Vec<GaugeFixedFrame<T>>> {
    track_frames(&loop_spec.model, &loop_spec.times())
}

/// `⟨φ_i|φ̇_j⟩ = ⟨φ_i|∂Ĥ/∂t|φ_j⟩ / (E_j − E_i)` for `i ≠ j`.
///
/// Returns zero for pairs with a vanishing matrix element even when their
/// levels cross; fails with `DegenerateGap` when coupled levels are degenerate.
pub fn transition_element<T: Real>(
    frame: &GaugeFixedFrame<T>,
    dh: &ComplexMatrix<T>,
    i: usize,
    j: usize,
) -> Result<Complex<T>> {
    let elem = dh.matrix_element(frame.vector(i), frame.vector(j));
    if elem.norm() <= decoupled_threshold(dh) {
        return Ok(Complex::zero());
    }
    let gap = frame.energy(j) - frame.energy(i);
    if gap.abs() <= frame.degeneracy_tolerance() {
        return Err(Error::DegenerateGap { i, j, gap: gap.abs().as_f64() });
    }
    Ok(elem.unscale(gap))
}

fn decoupled_threshold<T: Real>(dh: &ComplexMatrix<T>) -> T {
    T::lit(1e-12).max(T::lit(64.0) * T::epsilon()) * T::one().max(dh.max_abs())
}

/// `Γ_ij` from a frame: `|⟨φ_i|∂Ĥ/∂t|φ_j⟩| / (E_i − E_j)²`.
pub fn gamma_from_frame<T: Real>(frame: &GaugeFixedFrame<T>, dh: &ComplexMatrix<T>, i: usize, j: usize) -> Result<T> {
    if i == j {
        return Err(Error::InvalidParameter("gamma needs two distinct levels".into()));
    }
    let gap = frame.energy(i) - frame.energy(j);
    if gap.abs() <= frame.degeneracy_tolerance() {
        return Err(Error::DegenerateGap { i, j, gap: gap.abs().as_f64() });
    }
    let elem = dh.matrix_element(frame.vector(i), frame.vector(j));
    Ok(elem.norm() / (gap * gap))
}

pub fn gamma_metric<T: Real>(spec: &ModelSpec<T>, t: T, i: usize, j: usize) -> Result<T> {
    let frame = numeric_eigensystem(spec, t, None)?;
    gamma_from_frame(&frame, &spec.hamiltonian_derivative_at(t), i, j)
}

/// Largest `Γ_ij` over all frames and all coupled pairs. Pairs whose
/// derivative matrix element vanishes are skipped.
pub fn loop_gamma_max<T: Real>(spec: &ModelSpec<T>, frames: &[GaugeFixedFrame<T>]) -> Result<T> {
    let mut best = T::zero();
    for f in frames {
        let dh = spec.hamiltonian_derivative_at(f.t);
        let n = f.eigen.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let elem = dh.matrix_element(f.vector(i), f.vector(j)).norm();
                if elem <= decoupled_threshold(&dh) {
                    continue;
                }
                best = best.max(gamma_from_frame(f, &dh, i, j)?);
            }
        }
    }
    Ok(best)
}

/// `⟨φ_j|φ̇_j⟩` for every label by a centered difference of half-width `h`,
/// with the neighbouring frames aligned to `frame`.
pub fn diagonal_connection<T: Real>(spec: &ModelSpec<T>, frame: &GaugeFixedFrame<T>, h: T) -> Result<Vec<Complex<T>>> {
    let fwd = numeric_eigensystem(spec, frame.t + h, Some(frame))?;
    let bwd = numeric_eigensystem(spec, frame.t - h, Some(frame))?;
    Ok((0..frame.eigen.len())
        .map(|l| {
            let v = frame.vector(l);
            (v.inner(fwd.vector(l)) - v.inner(bwd.vector(l))).unscale(T::lit(2.0) * h)
        })
        .collect())
}

/// `Γ₁₂` and `Γ₃₄` over a `(θ, g)` grid at fixed `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSurface<T> {
    pub coupling: CouplingKind,
    pub omega: T,
    pub thetas: Vec<T>,
    pub gs: Vec<T>,
    /// Row-major over `(theta, g)`; `+∞` on singular cells.
    pub gamma12: Vec<T>,
    pub gamma34: Vec<T>,
    pub singular12: Vec<bool>,
    pub singular34: Vec<bool>,
}

impl<T: Real> GammaSurface<T> {
    pub fn index(&self, i_theta: usize, i_g: usize) -> usize {
        i_theta * self.gs.len() + i_g
    }

    pub fn cells(&self) -> impl Iterator<Item = (T, T, usize)> + '_ {
        self.thetas
            .iter()
            .enumerate()
            .flat_map(move |(it, &th)| self.gs.iter().enumerate().map(move |(ig, &g)| (th, g, it * self.gs.len() + ig)))
    }
}

fn check_grid<T: Real>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

/// Evaluates the surface on the current rayon pool, one task per cell.
pub fn gamma_surface<T: Real>(coupling: CouplingKind, omega: T, theta_grid: &[T], g_grid: &[T]) -> Result<GammaSurface<T>> {
    check_grid("theta", theta_grid)?;
    check_grid("g", g_grid)?;
    let cells: Vec<(T, T)> = theta_grid.iter().flat_map(|&th| g_grid.iter().map(move |&g| (th, g))).collect();
    let values: Vec<((T, bool), (T, bool))> = cells
        .par_iter()
        .map(|&(theta, g)| {
            let spec = ModelSpec::new(coupling, g, theta, omega, T::zero())?;
            let frame = numeric_eigensystem(&spec, T::zero(), None)?;
            let dh = spec.hamiltonian_derivative_at(T::zero());
            let eval = |i, j| match gamma_from_frame(&frame, &dh, i, j) {
                Ok(v) => Ok((v, false)),
                Err(Error::DegenerateGap { .. }) => Ok((T::infinity(), true)),
                Err(e) => Err(e),
            };
            Ok((eval(0, 1)?, eval(2, 3)?))
        })
        .collect::<Result<_>>()?;
    let (g12, g34): (Vec<_>, Vec<_>) = values.into_iter().unzip();
    Ok(GammaSurface {
        coupling,
        omega,
        thetas: theta_grid.to_vec(),
        gs: g_grid.to_vec(),
        gamma12: g12.iter().map(|v| v.0).collect(),
        singular12: g12.iter().map(|v| v.1).collect(),
        gamma34: g34.iter().map(|v| v.0).collect(),
        singular34: g34.iter().map(|v| v.1).collect(),
    })
}

/// `n` points evenly covering `[lo, hi]`, endpoints included.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let d = T::from_usize(n - 1).expect("count");
            (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * T::from_usize(k).expect("k") / d })
                .collect()
        }
    }
}
