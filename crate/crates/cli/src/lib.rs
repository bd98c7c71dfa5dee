//! Command implementations behind the `adiabat` binary.
//!
//! Each command renders its full output to strings so callers (the binary,
//! tests) decide where the bytes go.

pub mod config;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use adiabat_core::dynamics::{project_amplitudes, validate_density_matrix};
use adiabat_core::phases::phase_report;
use adiabat_core::regimes::analyze;
use adiabat_core::spectra::{gamma_surface, linspace, loop_frames, numeric_eigensystem};
use adiabat_core::{
    ComplexMatrix, Error as CoreError, LoopSpec, Metric, ModelSpec, PhaseReport, RunAnalysis, Seed, StateVector,
    DEFAULT_STEPS,
};
use thiserror::Error;

pub use config::{ConfigError, RunConfig, SeedSpec, SweepGrid};

/// Field frequency used by `sweep-gamma` when the config leaves it unset.
pub const SWEEP_DEFAULT_OMEGA: f64 = 10.0;
/// Field frequency used by single-run commands when the config leaves it unset.
pub const RUN_DEFAULT_OMEGA: f64 = 0.1;
/// Target accumulated norm loss per run for the automatic step count.
pub const AUTO_NORM_BUDGET: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    /// Parameters the core rejected as inputs.
    #[error("invalid input: {0}")]
    Input(CoreError),

    /// A numerical guard tripped during the run.
    #[error("numerical guard: {0}")]
    Numerical(CoreError),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::StepTooLarge { .. }
            | CoreError::DegenerateGap { .. }
            | CoreError::DegenerateLabeling { .. }
            | CoreError::NonHermitian { .. }
            | CoreError::FrameMismatch(_)
            | CoreError::InsufficientSamples { .. } => CliError::Numerical(e),
            _ => CliError::Input(e),
        }
    }
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Pool(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    SweepGamma,
    Evolve,
    Classify,
    Phases,
}

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub n_steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub quiet: bool,
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// CSV table or result line; goes to `--out` when given.
    pub primary: String,
    /// Human-readable summary, suppressed by `--quiet`.
    pub report: Option<String>,
}

/// Formats a float for CSV output: 17 significant digits, lowercase
/// `inf`/`nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_metric(m: Metric<f64>) -> String {
    match m {
        Metric::Value(v) => fmt_float(v),
        Metric::Singular => "singular".into(),
    }
}

fn label_name(k: usize) -> String {
    format!("phi{}", k + 1)
}

/// Everything a single run needs, resolved from config and overrides.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub loop_spec: LoopSpec,
    pub seed: Seed,
    /// Eigenstate label the seed overlaps most, for pure seeds.
    pub seed_label: Option<usize>,
}

/// Smallest power of two, at least [`DEFAULT_STEPS`], whose RK4 norm loss
/// over `duration` stays under [`AUTO_NORM_BUDGET`].
///
/// Per step the loss in an eigencomponent of energy `E` is about
/// `(E·dt)⁶/72`, so the total over `n` steps is `n·(E·T/n)⁶/72`.
pub fn auto_steps(spec: &ModelSpec, duration: f64) -> Result<usize> {
    let h = spec.hamiltonian_at(0.0);
    let lambda = adiabat_core::linalg::eig_hermitian(&h)?
        .values
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(1e-12);
    let x = lambda * duration;
    let need = (x.powi(6) / (72.0 * AUTO_NORM_BUDGET)).powf(0.2).ceil();
    let need = if need.is_finite() { need.min((1u64 << 26) as f64) as usize } else { 1 << 26 };
    Ok(need.max(DEFAULT_STEPS).next_power_of_two())
}

fn model_spec(cfg: &RunConfig, omega: f64) -> Result<ModelSpec> {
    Ok(ModelSpec::new(cfg.coupling, cfg.g, cfg.theta, omega, cfg.phi0)?)
}

/// Builds the loop for single-run commands. A static field (`omega = 0`) is
/// run for a duration of `2π`.
pub fn run_loop(cfg: &RunConfig, opts: &Options) -> Result<LoopSpec> {
    let omega = cfg.omega.unwrap_or(RUN_DEFAULT_OMEGA);
    let spec = model_spec(cfg, omega)?;
    let duration = if omega > 0.0 { 2.0 * PI / omega } else { 2.0 * PI };
    let n = match opts.n_steps.or(cfg.n_steps) {
        Some(n) => n,
        None => auto_steps(&spec, duration)?,
    };
    Ok(if omega > 0.0 { LoopSpec::new(spec, n)? } else { LoopSpec::with_duration(spec, duration, n)? })
}

pub fn resolve_seed(cfg: &RunConfig, spec: &ModelSpec) -> Result<(Seed, Option<usize>)> {
    let frame = numeric_eigensystem(spec, 0.0, None)?;
    let nearest = |psi: &StateVector| {
        (0..4)
            .max_by(|&a, &b| frame.vector(a).fidelity(psi).total_cmp(&frame.vector(b).fidelity(psi)))
            .unwrap_or(0)
    };
    Ok(match &cfg.seed_state {
        SeedSpec::Eigenstate(k) => (Seed::Pure(frame.vector(*k).clone()), Some(*k)),
        SeedSpec::Ground => {
            let k = (0..4).min_by(|&a, &b| frame.energy(a).total_cmp(&frame.energy(b))).unwrap_or(0);
            (Seed::Pure(frame.vector(k).clone()), Some(k))
        }
        SeedSpec::Amplitudes(a) => {
            let psi = StateVector::new(a.clone())?.normalized()?;
            let k = nearest(&psi);
            (Seed::Pure(psi), Some(k))
        }
        SeedSpec::Mixed(rho) => {
            validate_density_matrix(rho)?;
            (Seed::Mixed(rho.clone()), None)
        }
    })
}

pub fn setup(cfg: &RunConfig, opts: &Options) -> Result<RunSetup> {
    let loop_spec = run_loop(cfg, opts)?;
    let (seed, seed_label) = resolve_seed(cfg, &loop_spec.model)?;
    Ok(RunSetup { loop_spec, seed, seed_label })
}

pub fn execute(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Output> {
    match cmd {
        Command::Spectrum => spectrum(cfg, opts),
        Command::SweepGamma => sweep_gamma(cfg, opts),
        Command::Evolve => evolve(cfg, opts),
        Command::Classify => classify(cfg, opts),
        Command::Phases => phases(cfg, opts),
    }
}

pub fn spectrum(cfg: &RunConfig, opts: &Options) -> Result<Output> {
    let lp = run_loop(cfg, opts)?;
    let frames = loop_frames(&lp)?;
    let mut csv = String::from("t,E1,E2,E3,E4,gap12,gap34\n");
    for f in &frames {
        let e = f.energies();
        let row = [f.t, e[0], e[1], e[2], e[3], (e[0] - e[1]).abs(), (e[2] - e[3]).abs()];
        push_row(&mut csv, &row);
    }
    let report = format!(
        "spectrum: coupling={} g={} theta={} omega={} samples={}\n",
        cfg.coupling,
        cfg.g,
        cfg.theta,
        lp.model.omega,
        frames.len()
    );
    Ok(Output { primary: csv, report: Some(report) })
}

fn push_row(csv: &mut String, row: &[f64]) {
    let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
    csv.push_str(&cells.join(","));
    csv.push('\n');
}

/// Γ₁₂ and Γ₃₄ on the configured (θ, g) grid. The grid is evaluated on a
/// pool of `--jobs` workers; the output order is fixed by the grid.
pub fn sweep_gamma(cfg: &RunConfig, opts: &Options) -> Result<Output> {
    cfg.sweep.validate()?;
    let omega = cfg.omega.unwrap_or(SWEEP_DEFAULT_OMEGA);
    if !(omega > 0.0) {
        return Err(ConfigError::Invalid("sweep-gamma needs omega > 0".into()).into());
    }
    let grid = &cfg.sweep;
    let thetas = linspace(grid.theta_min, grid.theta_max, grid.theta_count);
    let gs = linspace(grid.g_min, grid.g_max, grid.g_count);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build()?;
    let surface = pool.install(|| gamma_surface(cfg.coupling, omega, &thetas, &gs))?;

    let mut csv = String::from("theta,g,gamma12,gamma34,singular12,singular34\n");
    let mut singular = 0usize;
    for (theta, g, idx) in surface.cells() {
        let (s12, s34) = (surface.singular12[idx], surface.singular34[idx]);
        singular += usize::from(s12) + usize::from(s34);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_float(theta),
            fmt_float(g),
            fmt_float(surface.gamma12[idx]),
            fmt_float(surface.gamma34[idx]),
            u8::from(s12),
            u8::from(s34)
        );
    }
    let report = format!(
        "sweep-gamma: coupling={} omega={} grid={}x{} singular_cells={}\n",
        cfg.coupling, omega, grid.theta_count, grid.g_count, singular
    );
    Ok(Output { primary: csv, report: Some(report) })
}

fn run_analysis(cfg: &RunConfig, opts: &Options) -> Result<(RunSetup, RunAnalysis)> {
    let s = setup(cfg, opts)?;
    let analysis = analyze(&s.loop_spec, &s.seed, &cfg.thresholds)?;
    Ok((s, analysis))
}

fn classify_line(a: &RunAnalysis) -> String {
    format!(
        "regime={} gamma_max={} ratio_max={} p_drift={}\n",
        a.label.regime,
        fmt_metric(a.label.gamma_max),
        fmt_metric(a.label.ratio_max),
        fmt_metric(a.label.p_drift)
    )
}

pub fn classify(cfg: &RunConfig, opts: &Options) -> Result<Output> {
    let (_, a) = run_analysis(cfg, opts)?;
    Ok(Output { primary: classify_line(&a), report: None })
}

/// Per-sample populations, Schmidt weights, ratio and norm drift, plus a
/// report with the regime and loop phases.
pub fn evolve(cfg: &RunConfig, opts: &Options) -> Result<Output> {
    let (s, a) = run_analysis(cfg, opts)?;
    let traj = &a.trajectory;
    let mut csv = String::from("t,pop1,pop2,pop3,pop4,p1,p2,R12,norm_drift\n");
    match &traj.rho_states {
        None => {
            let amps = project_amplitudes(traj, &a.frames)?;
            let schmidt = a.schmidt.as_ref().expect("pure runs carry a Schmidt series");
            for k in 0..traj.len() {
                let ratio = schmidt.ratio_series[k].unwrap_or(f64::INFINITY);
                let p = schmidt.p_series[k];
                let row = [
                    traj.times[k],
                    amps.population(k, 0),
                    amps.population(k, 1),
                    amps.population(k, 2),
                    amps.population(k, 3),
                    p[0],
                    p[1],
                    ratio,
                    (traj.states[k].norm() - 1.0).abs(),
                ];
                push_row(&mut csv, &row);
            }
        }
        Some(rhos) => {
            for (k, rho) in rhos.iter().enumerate() {
                let f = &a.frames[k];
                let pops: Vec<f64> = (0..4).map(|j| rho.expectation(f.vector(j)).re).collect();
                let row = [
                    traj.times[k],
                    pops[0],
                    pops[1],
                    pops[2],
                    pops[3],
                    a.p1[k],
                    1.0 - a.p1[k],
                    f64::NAN,
                    (rho.trace().re - 1.0).abs(),
                ];
                push_row(&mut csv, &row);
            }
        }
    }

    let mut report = run_header(cfg, &s);
    let _ = write!(report, "{}", classify_line(&a).replace(' ', "\n"));
    let final_drift = match (&traj.rho_states, traj.final_state()) {
        (Some(r), _) => r.last().map_or(0.0, |m| (m.trace().re - 1.0).abs()),
        (None, Some(psi)) => (psi.norm() - 1.0).abs(),
        (None, None) => 0.0,
    };
    let _ = writeln!(report, "final_norm_drift={}", fmt_float(final_drift));
    match s.seed_label {
        Some(label) if !traj.is_mixed() => match phase_report(traj, &a.frames, label) {
            Ok(p) => report.push_str(&render_phases(&p)),
            Err(e) => {
                let _ = writeln!(report, "phases=unavailable ({e})");
            }
        },
        _ => report.push_str("phases=unavailable (mixed seed)\n"),
    }
    Ok(Output { primary: csv, report: Some(report) })
}

/// Loop phases of a pure run.
pub fn phases(cfg: &RunConfig, opts: &Options) -> Result<Output> {
    if matches!(cfg.seed_state, SeedSpec::Mixed(_)) {
        return Err(ConfigError::Invalid("phases needs a pure seed_state".into()).into());
    }
    let (s, a) = run_analysis(cfg, opts)?;
    let label = s.seed_label.expect("pure seeds carry a label");
    let p = phase_report(&a.trajectory, &a.frames, label)?;
    let mut text = run_header(cfg, &s);
    text.push_str(&render_phases(&p));
    Ok(Output { primary: text, report: None })
}

fn run_header(cfg: &RunConfig, s: &RunSetup) -> String {
    let seed = match (&cfg.seed_state, s.seed_label) {
        (SeedSpec::Mixed(_), _) => "mixed".to_string(),
        (SeedSpec::Amplitudes(_), Some(k)) => format!("custom (nearest {})", label_name(k)),
        (_, Some(k)) => label_name(k),
        (_, None) => "custom".to_string(),
    };
    format!(
        "coupling={}\ng={}\ntheta={}\nomega={}\nphi0={}\nn_steps={}\nseed={}\n",
        cfg.coupling,
        fmt_float(cfg.g),
        fmt_float(cfg.theta),
        fmt_float(s.loop_spec.model.omega),
        fmt_float(cfg.phi0),
        s.loop_spec.n_steps,
        seed
    )
}

pub fn render_phases(p: &PhaseReport) -> String {
    let mut out = String::new();
    let list = |xs: &[f64]| xs.iter().map(|&x| fmt_float(x)).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "seed_label={}", label_name(p.seed_label));
    let _ = writeln!(out, "total_phase={}", fmt_float(p.total_phase));
    let _ = writeln!(out, "dynamical_phase={}", fmt_float(p.dynamical_phase));
    let _ = writeln!(out, "geometric_phase={}", fmt_float(p.geometric_phase));
    let _ = writeln!(out, "overlap={}", fmt_float(p.overlap));
    let _ = writeln!(out, "cyclic={}", p.cyclic);
    let _ = writeln!(out, "berry_phases={}", list(&p.berry_phases));
    let _ = writeln!(out, "perturbative_phase_18={}", fmt_float(p.perturbative_phase_18));
    let _ = writeln!(out, "perturbative_phase_19={}", fmt_float(p.perturbative_phase_19));
    let _ = writeln!(out, "perturbative_gamma_max={}", fmt_float(p.gamma_max));
    for (j, row) in p.omega_matrix.iter().enumerate() {
        let _ = writeln!(out, "omega_matrix_row{}={}", j + 1, list(row));
    }
    out
}

/// Mixed seed from explicit populations and coherences; exposed for tests.
pub fn density_from_grid(xs: &[f64; 16]) -> ComplexMatrix {
    let text: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    match config::parse_seed(&format!("mixed: {}", text.join(" "))) {
        Ok(SeedSpec::Mixed(m)) => m,
        _ => unreachable!("sixteen reals always form a mixed seed"),
    }
}
