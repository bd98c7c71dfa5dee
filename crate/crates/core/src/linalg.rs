//! Dense complex linear algebra for the small Hilbert spaces used here.
//!
//! Two-qubit basis order is `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`: qubit 1 (the driven
//! spin) is the left, slow index, and `σz|↑⟩ = +|↑⟩`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Relative magnitude tolerance under which two components count as tied in
/// the canonical phase rule.
const PHASE_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "dim >= 1".into(),
                found: "0".into(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonPhysical("state amplitude is not finite".into()));
        }
        Ok(Self { amps })
    }

    /// Builds a vector without the finiteness check; for internal use on values
    /// produced by arithmetic on already-validated data.
    pub(crate) fn from_vec(amps: Vec<Complex<T>>) -> Self {
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: vec![Complex::zero(); dim] }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[k] = Complex::one();
        v
    }

    pub fn from_real(xs: &[T]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| c(x, T::zero())).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) {
            return Err(Error::NonPhysical("cannot normalize a zero vector".into()));
        }
        Ok(self.scaled(c(T::one() / n, T::zero())))
    }

    /// Fails with `NonPhysical` unless `| ‖v‖² − 1 | <= tol`.
    pub fn validate_normalized(&self, tol: T) -> Result<()> {
        let dev = (self.norm_sqr() - T::one()).abs();
        if dev > tol {
            return Err(Error::NonPhysical(format!(
                "state norm² deviates from 1 by {:.3e}",
                dev.as_f64()
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self::from_vec(self.amps.iter().map(|a| a * s).collect())
    }

    pub fn axpy(&self, s: Complex<T>, other: &Self) -> Self {
        Self::from_vec(self.amps.iter().zip(&other.amps).map(|(a, b)| a + b * s).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                out.push(a * b);
            }
        }
        Self::from_vec(out)
    }

    /// Index of the component with the largest modulus; components within a
    /// relative `1e-9` of the maximum are tied and the lowest index wins.
    pub fn dominant_index(&self) -> usize {
        let max = self.amps.iter().fold(T::zero(), |m, a| m.max(a.norm()));
        let cut = max * (T::one() - T::lit(PHASE_TIE_TOL));
        self.amps.iter().position(|a| a.norm() >= cut).unwrap_or(0)
    }

    /// The vector rephased so that its dominant component is real and
    /// positive.
    pub fn with_canonical_phase(&self) -> Self {
        let k = self.dominant_index();
        let a = self.amps[k];
        let n = a.norm();
        if n == T::zero() {
            return self.clone();
        }
        self.scaled(a.conj() / n)
    }

    /// Orthogonal complement of a two-component vector, `(−b̄, ā)`.
    pub fn qubit_complement(&self) -> Self {
        assert_eq!(self.dim(), 2, "qubit_complement needs a two-component vector");
        Self::from_vec(vec![-self.amps[1].conj(), self.amps[0].conj()])
    }
}

impl<T> Index<usize> for StateVector<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.amps[i]
    }
}

impl<T> IndexMut<usize> for StateVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.amps[i]
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} entries"),
                found: data.len().to_string(),
            });
        }
        if data.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonPhysical("matrix entry is not finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {cols}"),
                found: "ragged rows".into(),
            });
        }
        Self::from_vec(r, cols, rows.concat())
    }

    pub fn from_real_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = c(x, T::zero());
        }
        m
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &StateVector<T>, b: &StateVector<T>) -> Self {
        let mut m = Self::zeros(a.dim(), b.dim());
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn projector(v: &StateVector<T>) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(c(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |A − A†|` (infinite for non-square input).
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        let mut out = vec![Complex::zero(); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v.amps()).fold(Complex::zero(), |acc, (a, b)| acc + a * b);
        }
        StateVector::from_vec(out)
    }

    /// `⟨a|A|b⟩`
    pub fn matrix_element(&self, a: &StateVector<T>, b: &StateVector<T>) -> Complex<T> {
        a.inner(&self.apply(b))
    }

    /// `⟨v|A|v⟩`
    pub fn expectation(&self, v: &StateVector<T>) -> Complex<T> {
        self.matrix_element(v, v)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Single-qubit operators.
pub mod pauli {
    use super::ComplexMatrix;
    use crate::scalar::{c, Real};

    fn m2<T: Real>(e: [(f64, f64); 4]) -> ComplexMatrix<T> {
        let d = e.iter().map(|&(r, i)| c(T::lit(r), T::lit(i))).collect();
        ComplexMatrix::from_vec(2, 2, d).expect("2x2 literal")
    }

    pub fn identity<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x<T: Real>() -> ComplexMatrix<T> {
        m2([(0., 0.), (1., 0.), (1., 0.), (0., 0.)])
    }

    pub fn sigma_y<T: Real>() -> ComplexMatrix<T> {
        m2([(0., 0.), (0., -1.), (0., 1.), (0., 0.)])
    }

    pub fn sigma_z<T: Real>() -> ComplexMatrix<T> {
        m2([(1., 0.), (0., 0.), (0., 0.), (-1., 0.)])
    }

    /// `σ⁺ = |↑⟩⟨↓|`
    pub fn sigma_plus<T: Real>() -> ComplexMatrix<T> {
        m2([(0., 0.), (1., 0.), (0., 0.), (0., 0.)])
    }

    /// `σ⁻ = |↓⟩⟨↑|`
    pub fn sigma_minus<T: Real>() -> ComplexMatrix<T> {
        m2([(0., 0.), (0., 0.), (1., 0.), (0., 0.)])
    }
}

/// Kronecker product `a ⊗ b`, with `a` the left (slow) factor.
pub fn tensor<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairSet<T> {
    pub values: Vec<T>,
    pub vectors: Vec<StateVector<T>>,
    /// Partition of the indices into sets of (numerically) equal eigenvalues.
    pub degeneracy_groups: Vec<Vec<usize>>,
}

impl<T: Real> EigenPairSet<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The degeneracy group containing index `i`.
    pub fn group_of(&self, i: usize) -> &[usize] {
        self.degeneracy_groups
            .iter()
            .find(|g| g.contains(&i))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.group_of(i).len() > 1
    }

    /// `max |⟨v_i|v_j⟩ − δ_ij|`
    pub fn orthonormality_error(&self) -> T {
        let mut err = T::zero();
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                err = err.max((a.inner(b) - c(target, T::zero())).norm());
            }
        }
        err
    }

    /// `Σ λ_i |v_i⟩⟨v_i|`
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.vectors.first().map_or(0, StateVector::dim);
        let mut acc = ComplexMatrix::zeros(n, n);
        for (l, v) in self.values.iter().zip(&self.vectors) {
            acc = &acc + &ComplexMatrix::projector(v).scale_real(*l);
        }
        acc
    }
}

/// Default relative degeneracy tolerance (fraction of the spectral range).
pub const DEFAULT_DEG_REL_TOL: f64 = 1e-8;

/// Groups sorted-or-not `values` into degeneracy classes using
/// `deg_rel_tol · (spectral range)` with a floor at a few ulps of the largest
/// magnitude.
pub fn degeneracy_groups<T: Real>(values: &[T], deg_rel_tol: T) -> Vec<Vec<usize>> {
    let tol = degeneracy_tolerance(values, deg_rel_tol);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if pos > 0 && values[i] - values[order[pos - 1]] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

pub fn degeneracy_tolerance<T: Real>(values: &[T], deg_rel_tol: T) -> T {
    let (lo, hi, big) = values.iter().fold(
        (T::infinity(), T::neg_infinity(), T::zero()),
        |(lo, hi, big), &v| (lo.min(v), hi.max(v), big.max(v.abs())),
    );
    let range = if hi >= lo { hi - lo } else { T::zero() };
    (deg_rel_tol * range).max(T::lit(64.0) * T::epsilon() * big)
}

fn hermitian_tolerance<T: Real>(a: &ComplexMatrix<T>) -> T {
    T::lit(1e-12).max(T::lit(64.0) * T::epsilon()) * T::one().max(a.max_abs())
}

/// Hermitian eigendecomposition with the default degeneracy tolerance.
pub fn eig_hermitian<T: Real>(a: &ComplexMatrix<T>) -> Result<EigenPairSet<T>> {
    eig_hermitian_with_tol(a, T::lit(DEFAULT_DEG_REL_TOL))
}

/// Cyclic complex Jacobi diagonalization. Eigenvalues ascend.
pub fn eig_hermitian_with_tol<T: Real>(a: &ComplexMatrix<T>, deg_rel_tol: T) -> Result<EigenPairSet<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.rows, a.cols),
        });
    }
    let dev = a.hermitian_deviation();
    if dev > hermitian_tolerance(a) {
        return Err(Error::NonHermitian { deviation: dev.as_f64() });
    }
    let n = a.rows;
    // Symmetrize so round-off in the input cannot bias the rotation angles.
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
        }
        m[(i, i)].im = T::zero();
    }
    let mut v = ComplexMatrix::<T>::identity(n);
    let scale = m.frobenius_norm();
    let target = T::epsilon() * T::lit(0.5) * scale;

    for _sweep in 0..64 {
        let off = off_diagonal_norm(&m);
        if off <= target || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / mag; // e^{iα}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let ph = phase.conj(); // e^{−iα}
                let g_pp = c(cs, T::zero());
                let g_pq = c(sn, T::zero());
                let g_qp = ph.scale(-sn);
                let g_qq = ph.scale(cs);
                // M <- M G, V <- V G (column update)
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = mkp * g_pp + mkq * g_qp;
                    m[(k, q)] = mkp * g_pq + mkq * g_qq;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                // M <- G† M (row update)
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
                    m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
                }
                m[(p, q)] = Complex::zero();
                m[(q, p)] = Complex::zero();
                m[(p, p)].im = T::zero();
                m[(q, q)].im = T::zero();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&j| StateVector::from_vec((0..n).map(|i| v[(i, j)]).collect()))
        .collect();
    let degeneracy_groups = degeneracy_groups(&values, deg_rel_tol);
    Ok(EigenPairSet { values, vectors, degeneracy_groups })
}

fn off_diagonal_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..m.rows {
        for j in 0..m.cols {
            if i != j {
                s = s + m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Reduced density matrix of qubit 1: traces out the right factor of a
/// two-qubit (4×4) density matrix.
pub fn partial_trace_2<T: Real>(rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if rho.rows != 4 || rho.cols != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{}x{}", rho.rows, rho.cols),
        });
    }
    let herm = rho.hermitian_deviation();
    if herm > T::lit(1e-9).max(T::lit(64.0) * T::epsilon()) {
        return Err(Error::NonPhysical(format!("density matrix not Hermitian ({:.3e})", herm.as_f64())));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > T::lit(1e-6) || tr.im.abs() > T::lit(1e-6) {
        return Err(Error::NonPhysical(format!("trace {:.6} deviates from 1", tr.re.as_f64())));
    }
    let mut out = ComplexMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            out[(a, b)] = rho[(2 * a, 2 * b)] + rho[(2 * a + 1, 2 * b + 1)];
        }
    }
    Ok(out)
}
