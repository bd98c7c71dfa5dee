#![allow(dead_code)]

use adiabat_core::linalg::{eig_hermitian, pauli, tensor};
use adiabat_core::{Complex, ComplexMatrix, ModelSpec, StateVector};

/// Exact state for couplings that commute with the total `σz`:
/// `ψ(t) = e^{iωtK} e^{−i(Ĥ(0)+ωK)t} ψ₀` with `K = (σz⊗I + I⊗σz)/2`.
pub struct RotatingFrame {
    omega: f64,
    k_diag: [f64; 4],
    values: Vec<f64>,
    vectors: Vec<StateVector>,
}

impl RotatingFrame {
    pub fn new(spec: &ModelSpec) -> Self {
        assert!(spec.phi0 == 0.0, "oracle assumes phi0 = 0");
        let k = (&tensor(&pauli::sigma_z(), &pauli::identity()) + &tensor(&pauli::identity(), &pauli::sigma_z()))
            .scale_real(0.5);
        let generator = &spec.hamiltonian_at(0.0) + &k.scale_real(spec.omega);
        let eig = eig_hermitian(&generator).unwrap();
        Self { omega: spec.omega, k_diag: [1.0, 0.0, 0.0, -1.0], values: eig.values, vectors: eig.vectors }
    }

    pub fn state(&self, psi0: &StateVector, t: f64) -> StateVector {
        let mut out = StateVector::zeros(4);
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            let amp = v.inner(psi0) * Complex::from_polar(1.0, -lam * t);
            out = out.axpy(amp, v);
        }
        for i in 0..4 {
            out[i] *= Complex::from_polar(1.0, self.omega * t * self.k_diag[i]);
        }
        out
    }
}

/// Largest Schmidt weight from the 2×2 coefficient matrix's singular values.
pub fn top_weight(psi: &StateVector) -> f64 {
    let m = ComplexMatrix::from_vec(2, 2, psi.amps().to_vec()).unwrap();
    let e = eig_hermitian(&(&m * &m.adjoint())).unwrap();
    e.values[1] / (e.values[0] + e.values[1])
}

pub fn berry_closed_form(g: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let e1 = (g * g + 1.0 + 2.0 * g * c).sqrt();
    2.0 * std::f64::consts::PI * s * s / (s * s + (g + c + e1).powi(2))
}
