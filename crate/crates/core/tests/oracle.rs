mod common;

use std::f64::consts::PI;

use adiabat_core::dynamics::{evolve_pure, integrate_amplitudes, project_amplitudes};
use adiabat_core::phases::{berry_phase, geometric_phase, perturbative_amplitudes, geometric_phase_perturbative};
use adiabat_core::schmidt::{reduced_density_eigen, schmidt_series};
use adiabat_core::spectra::{analytic_eigensystem, loop_frames, numeric_eigensystem, track_frames};
use adiabat_core::{ComplexMatrix, CouplingKind, LoopSpec, ModelSpec, StateVector};
use common::{berry_closed_form, top_weight, RotatingFrame};

fn spec(coupling: CouplingKind, g: f64, theta: f64, omega: f64) -> ModelSpec {
    ModelSpec::new(coupling, g, theta, omega, 0.0).unwrap()
}

fn seed(spec: &ModelSpec, label: usize) -> StateVector {
    numeric_eigensystem(spec, 0.0, None).unwrap().vector(label).clone()
}

#[test]
fn rk4_agrees_with_rotating_frame() {
    let psi0 = StateVector::from_real(&[0.5, -0.1, 0.7, 0.5]).unwrap().normalized().unwrap();
    for &(kind, g, th, w) in &[
        (CouplingKind::IsingZ, 1.0, PI / 3.0, 0.3),
        (CouplingKind::IsingZ, 0.2, 2.4, 3.0),
        (CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.05),
        (CouplingKind::FlipFlop, 2.0, 0.9, 1.0),
        (CouplingKind::None, 0.0, 1.3, 10.0),
    ] {
        let s = spec(kind, g, th, w);
        let period = 2.0 * PI / w;
        let n = ((8192.0 * (period / 10.0).max(1.0)) as usize).next_power_of_two();
        let lp = LoopSpec::new(s, n).unwrap();
        let traj = evolve_pure(&lp, &psi0).unwrap();
        let oracle = RotatingFrame::new(&s);
        for k in (0..=lp.n_steps).step_by(n / 8) {
            let exact = oracle.state(&psi0, traj.times[k]);
            assert!(traj.states[k].max_abs_diff(&exact) < 1e-8, "{kind} g={g} w={w} k={k}");
        }
    }
}

#[test]
fn berry_phase_matches_closed_form_value() {
    // frozen: 2π sin²θ / M₁ at g = 1, θ = π/3
    let frozen = 0.420_893_607_238_466_36;
    assert!((berry_closed_form(1.0, PI / 3.0) - frozen).abs() < 1e-15);
    let lp = LoopSpec::new(spec(CouplingKind::IsingZ, 1.0, PI / 3.0, 1.0), 4096).unwrap();
    let frames = loop_frames(&lp).unwrap();
    assert!((berry_phase(&frames, 0).unwrap() - frozen).abs() < 1e-9);
}

#[test]
fn loop_phase_matches_frozen_oracle() {
    // frozen from an independent exact propagation (65536 samples)
    for &(w, n, frozen) in &[(0.02, 16384, 0.414_150_878_003_226_86), (0.08, 8192, 0.394_654_429_424_784_6)] {
        let s = spec(CouplingKind::IsingZ, 1.0, PI / 3.0, w);
        let lp = LoopSpec::new(s, n).unwrap();
        let p = geometric_phase(&evolve_pure(&lp, &seed(&s, 0)).unwrap()).unwrap();
        assert!((p.geometric - frozen).abs() < 1e-5, "w={w}: {} vs {frozen}", p.geometric);
    }
}

#[test]
fn slow_loop_dynamical_phase_is_level_integral() {
    let s = spec(CouplingKind::IsingZ, 1.0, PI / 3.0, 1e-3);
    let lp = LoopSpec::new(s, 1 << 18).unwrap();
    let p = geometric_phase(&evolve_pure(&lp, &seed(&s, 0)).unwrap()).unwrap();
    let e1 = 3f64.sqrt();
    assert!((p.dynamical - e1 * lp.period).abs() < 1e-3, "{} vs {}", p.dynamical, e1 * lp.period);
    assert!((p.geometric - berry_closed_form(1.0, PI / 3.0)).abs() < 1e-2);
}

#[test]
fn flip_flop_weight_drift_matches_frozen_oracle() {
    // frozen from an independent exact propagation of the ground state
    for &(w, frozen) in &[(0.01, 0.001_169_812_709_307_160_9), (0.05, 0.005_986_361_591_655_109)] {
        let s = spec(CouplingKind::FlipFlop, 1.0, PI / 3.0, w);
        let n = if w < 0.02 { 16384 } else { 4096 };
        let lp = LoopSpec::new(s, n).unwrap();
        let series = schmidt_series(&evolve_pure(&lp, &seed(&s, 0)).unwrap()).unwrap();
        assert!((series.p_drift() - frozen).abs() < 2e-6, "w={w}: {}", series.p_drift());
        assert!((series.p_series[0][0] - 0.940_170_421_541_475_3).abs() < 1e-12);
    }
}

#[test]
fn schmidt_weights_match_svd_oracle() {
    let s = spec(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.5);
    let lp = LoopSpec::new(s, 2048).unwrap();
    let oracle = RotatingFrame::new(&s);
    let psi0 = seed(&s, 0);
    let traj = evolve_pure(&lp, &psi0).unwrap();
    let series = schmidt_series(&traj).unwrap();
    for k in (0..=2048).step_by(128) {
        let exact = top_weight(&oracle.state(&psi0, traj.times[k]));
        assert!((series.p_series[k][0] - exact).abs() < 1e-9);
    }
}

#[test]
fn p_drift_follows_ratio_across_omega_sweep() {
    let omegas = [0.01, 0.02, 0.03, 0.05, 0.08, 0.1, 0.2, 0.3, 0.5];
    let mut drift = Vec::new();
    let mut ratio = Vec::new();
    for &w in &omegas {
        let s = spec(CouplingKind::FlipFlop, 1.0, PI / 3.0, w);
        let n = ((4096.0 * (0.05 / w).max(1.0)) as usize).next_power_of_two();
        let series = schmidt_series(&evolve_pure(&LoopSpec::new(s, n).unwrap(), &seed(&s, 0)).unwrap()).unwrap();
        drift.push(series.p_drift());
        ratio.push(series.ratio_max().unwrap());
    }
    let rank = |xs: &[f64]| {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
        let mut r = vec![0.0; xs.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rd, rr) = (rank(&drift), rank(&ratio));
    let n = omegas.len() as f64;
    let d2: f64 = rd.iter().zip(&rr).map(|(a, b)| (a - b).powi(2)).sum();
    let spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    assert!(spearman > 0.9, "spearman {spearman}, drift {drift:?}, ratio {ratio:?}");
}

#[test]
fn reduced_density_matches_closed_form_projector() {
    let (g, th) = (1.0, PI / 3.0);
    let s = spec(CouplingKind::IsingZ, g, th, 0.01);
    let lp = LoopSpec::new(s, 16384).unwrap();
    let times = lp.times();
    let sample: Vec<usize> = (0..=lp.n_steps).step_by(512).collect();
    let analytic_rho = |t: f64| {
        let v = &analytic_eigensystem(&s, t).unwrap().vectors[0];
        let q1 = StateVector::new(vec![v[0], v[2]]).unwrap();
        ComplexMatrix::projector(&q1)
    };

    // frozen eigenstate path
    let frozen_path = track_frames(&s, &times).unwrap();
    for &k in &sample {
        let psi = frozen_path[k].vector(0);
        let rho1 = adiabat_core::linalg::partial_trace_2(&ComplexMatrix::projector(psi)).unwrap();
        assert!(rho1.max_abs_diff(&analytic_rho(times[k])) < 1e-8);
    }

    // evolved state: first-order deviation bounded by Γ
    let traj = evolve_pure(&lp, &seed(&s, 0)).unwrap();
    let red = reduced_density_eigen(&traj).unwrap();
    let gamma = adiabat_core::spectra::gamma_metric(&s, 0.0, 0, 1).unwrap();
    for &k in &sample {
        assert!((red[k].values[0] - 1.0).abs() < 1e-8 && red[k].values[1].abs() < 1e-8);
        let rho1 = ComplexMatrix::projector(&red[k].vectors[0]);
        assert!(rho1.max_abs_diff(&analytic_rho(times[k])) < 10.0 * gamma);
    }
}

#[test]
fn amplitude_integrators_agree_for_flip_flop() {
    let s = spec(CouplingKind::FlipFlop, 1.0, PI / 3.0, 0.1);
    let lp = LoopSpec::new(s, 4096).unwrap();
    let frames = loop_frames(&lp).unwrap();
    let psi0 = frames[0].vector(1).clone();
    let proj = project_amplitudes(&evolve_pure(&lp, &psi0).unwrap(), &frames).unwrap();
    let direct = integrate_amplitudes(&lp, &frames, &proj.c[0]).unwrap();
    for (a, b) in proj.c.iter().zip(&direct.c) {
        for j in 0..4 {
            assert!((a[j] - b[j]).norm() < 1e-6);
        }
    }
}

#[test]
fn perturbative_phases_reach_berry_limit() {
    let s = spec(CouplingKind::IsingZ, 1.0, PI / 3.0, 1e-3);
    let lp = LoopSpec::new(s, 4096).unwrap();
    let frames = loop_frames(&lp).unwrap();
    let amps = perturbative_amplitudes(&lp, &frames, 0).unwrap();
    let (p18, p19) = geometric_phase_perturbative(&amps);
    let gamma = berry_closed_form(1.0, PI / 3.0);
    assert!((p18 - gamma).abs() < 1e-3);
    assert!((p19 - gamma).abs() < 1e-3);
}

#[test]
fn single_precision_core_runs() {
    let s = adiabat_core::model::ModelSpec::<f32>::new(CouplingKind::IsingZ, 1.0, 1.0, 1.0, 0.0).unwrap();
    let lp = adiabat_core::model::LoopSpec::<f32>::new(s, 512).unwrap();
    let psi0 = numeric_eigensystem(&s, 0.0, None).unwrap().vector(0).clone();
    let traj = evolve_pure(&lp, &psi0).unwrap();
    assert!(traj.max_norm_error() < 1e-4);
}

fn perturbative_point(w: f64) -> (f64, f64, f64) {
    let s = spec(CouplingKind::IsingZ, 1.0, PI / 3.0, w);
    let lp = LoopSpec::new(s, 16384).unwrap();
    let frames = loop_frames(&lp).unwrap();
    let exact = geometric_phase(&evolve_pure(&lp, frames[0].vector(0)).unwrap()).unwrap().geometric;
    let (p18, _) = geometric_phase_perturbative(&perturbative_amplitudes(&lp, &frames, 0).unwrap());
    (exact, berry_phase(&frames, 0).unwrap(), p18)
}

#[test]
fn first_order_phase_correction_scales_linearly() {
    let omegas = [0.02, 0.04, 0.08];
    let pts: Vec<(f64, f64)> = omegas
        .iter()
        .map(|&w| {
            let (_, berry, p18) = perturbative_point(w);
            (w.ln(), (p18 - berry).abs().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((0.8..=1.5).contains(&slope), "slope {slope}");
}

#[test]
fn first_order_phase_beats_plain_berry_at_moderate_speed() {
    let (exact, berry, p18) = perturbative_point(0.05);
    assert!((p18 - exact).abs() <= (berry - exact).abs() + 1e-9);
}
