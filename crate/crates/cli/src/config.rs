//! Flat `key = value` run configuration.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use adiabat_core::{Complex, ComplexMatrix, CouplingKind, RegimeThresholds};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },

    #[error("line {line}: invalid value for `{key}`: {reason}")]
    InvalidValue { line: usize, key: String, reason: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// How the run is initialized.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    /// Instantaneous eigenstate at `t = 0`, 0-based label.
    Eigenstate(usize),
    /// Lowest-energy eigenstate at `t = 0`.
    Ground,
    /// Explicit amplitudes, normalized on use.
    Amplitudes(Vec<Complex>),
    Mixed(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_count: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub g_count: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { theta_min: 0.0, theta_max: PI, theta_count: 101, g_min: 0.0, g_max: 3.0, g_count: 101 }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, lo, hi, n) in [
            ("theta", self.theta_min, self.theta_max, self.theta_count),
            ("g", self.g_min, self.g_max, self.g_count),
        ] {
            if n < 2 {
                return Err(ConfigError::Invalid(format!("{name}_count must be at least 2")));
            }
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ConfigError::Invalid(format!("{name}_min must be below {name}_max")));
            }
        }
        if self.theta_min < 0.0 || self.theta_max > PI + 1e-12 {
            return Err(ConfigError::Invalid("theta range must lie within [0, pi]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub coupling: CouplingKind,
    pub g: f64,
    pub theta: f64,
    /// Unset means the command's default.
    pub omega: Option<f64>,
    pub phi0: f64,
    /// Unset means an automatic choice from the loop period.
    pub n_steps: Option<usize>,
    pub seed_state: SeedSpec,
    pub thresholds: RegimeThresholds,
    pub output_path: Option<PathBuf>,
    pub sweep: SweepGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            coupling: CouplingKind::IsingZ,
            g: 1.0,
            theta: PI / 3.0,
            omega: None,
            phi0: 0.0,
            n_steps: None,
            seed_state: SeedSpec::Eigenstate(0),
            thresholds: RegimeThresholds::default(),
            output_path: None,
            sweep: SweepGrid::default(),
        }
    }
}

const KEYS: &[&str] = &[
    "coupling",
    "g",
    "theta",
    "omega",
    "phi0",
    "n_steps",
    "seed_state",
    "adiabatic_eps",
    "nontrans_eps",
    "p_drift_eps",
    "output_path",
    "theta_min",
    "theta_max",
    "theta_count",
    "g_min",
    "g_max",
    "g_count",
];

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError::Syntax { line, text: content.to_string() })?;
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, text: content.to_string() });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            let bad = |reason: String| ConfigError::InvalidValue { line, key: key.to_string(), reason };
            match key {
                "coupling" => cfg.coupling = value.parse().map_err(|e: adiabat_core::Error| bad(e.to_string()))?,
                "g" => cfg.g = parse_real(value).map_err(bad)?,
                "theta" => cfg.theta = parse_real(value).map_err(bad)?,
                "omega" => cfg.omega = Some(parse_real(value).map_err(bad)?),
                "phi0" => cfg.phi0 = parse_real(value).map_err(bad)?,
                "n_steps" => cfg.n_steps = Some(parse_count(value).map_err(bad)?),
                "seed_state" => cfg.seed_state = parse_seed(value).map_err(bad)?,
                "adiabatic_eps" => cfg.thresholds.adiabatic_eps = parse_real(value).map_err(bad)?,
                "nontrans_eps" => cfg.thresholds.nontrans_eps = parse_real(value).map_err(bad)?,
                "p_drift_eps" => cfg.thresholds.p_drift_eps = parse_real(value).map_err(bad)?,
                "output_path" => {
                    if value.is_empty() {
                        return Err(bad("empty path".into()));
                    }
                    cfg.output_path = Some(PathBuf::from(value));
                }
                "theta_min" => cfg.sweep.theta_min = parse_real(value).map_err(bad)?,
                "theta_max" => cfg.sweep.theta_max = parse_real(value).map_err(bad)?,
                "theta_count" => cfg.sweep.theta_count = parse_count(value).map_err(bad)?,
                "g_min" => cfg.sweep.g_min = parse_real(value).map_err(bad)?,
                "g_max" => cfg.sweep.g_max = parse_real(value).map_err(bad)?,
                "g_count" => cfg.sweep.g_count = parse_count(value).map_err(bad)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        cfg.thresholds.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

/// A finite real, optionally written in terms of `pi`: `1.2`, `pi`, `pi/3`,
/// `2pi/3`, `2*pi/3`, `-pi/4`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = if s.contains("pi") {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest.trim()),
            None => (1.0, s),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (body, None),
        };
        let coeff = num.strip_suffix("pi").ok_or_else(|| format!("cannot read `{s}` as a number"))?;
        let coeff = coeff.trim().trim_end_matches('*').trim();
        let k = if coeff.is_empty() {
            1.0
        } else {
            coeff.parse::<f64>().map_err(|_| format!("cannot read `{s}` as a number"))?
        };
        let d = match den {
            Some(d) => d.parse::<f64>().map_err(|_| format!("cannot read `{s}` as a number"))?,
            None => 1.0,
        };
        if d == 0.0 {
            return Err("division by zero".into());
        }
        sign * k * PI / d
    } else {
        s.parse::<f64>().map_err(|_| format!("cannot read `{s}` as a number"))?
    };
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("expected a non-negative integer, found `{s}`"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_real)
        .collect()
}

/// `phi1`..`phi4`, `ground`, eight reals (re/im pairs), or `mixed:` followed
/// by sixteen reals laid out as a 4×4 grid: the diagonal holds the
/// populations, the upper triangle the real parts and the lower triangle the
/// imaginary parts of the coherences `ρ_ij` (`i < j`).
pub fn parse_seed(s: &str) -> Result<SeedSpec, String> {
    let s = s.trim();
    if let Some(label) = s.strip_prefix("phi") {
        return match label.parse::<usize>() {
            Ok(k @ 1..=4) => Ok(SeedSpec::Eigenstate(k - 1)),
            _ => Err(format!("unknown eigenstate label `{s}` (expected phi1..phi4)")),
        };
    }
    if s == "ground" {
        return Ok(SeedSpec::Ground);
    }
    if let Some(rest) = s.strip_prefix("mixed:") {
        let xs = parse_list(rest)?;
        if xs.len() != 16 {
            return Err(format!("a mixed seed needs 16 reals, found {}", xs.len()));
        }
        let r = |i: usize, j: usize| xs[4 * i + j];
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = Complex::new(r(i, i), 0.0);
            for j in (i + 1)..4 {
                let z = Complex::new(r(i, j), r(j, i));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        return Ok(SeedSpec::Mixed(m));
    }
    let xs = parse_list(s)?;
    if xs.len() != 8 {
        return Err(format!("expected phi1..phi4, ground, mixed:<16 reals> or 8 reals, found `{s}`"));
    }
    let amps: Vec<Complex> = xs.chunks(2).map(|p| Complex::new(p[0], p[1])).collect();
    if amps.iter().all(|z| z.norm() == 0.0) {
        return Err("the seed state is zero".into());
    }
    Ok(SeedSpec::Amplitudes(amps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(
            "# demo\ncoupling = flip_flop\ng = 2\ntheta = pi/3  # polar angle\nomega=0.05\nn_steps = 8192\nseed_state = ground\np_drift_eps = 1e-4\n",
        )
        .unwrap();
        assert_eq!(cfg.coupling, CouplingKind::FlipFlop);
        assert_eq!(cfg.g, 2.0);
        assert!((cfg.theta - PI / 3.0).abs() < 1e-15);
        assert_eq!(cfg.omega, Some(0.05));
        assert_eq!(cfg.n_steps, Some(8192));
        assert_eq!(cfg.seed_state, SeedSpec::Ground);
        assert_eq!(cfg.thresholds.p_drift_eps, 1e-4);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = RunConfig::parse("g = 1\nthata = 0.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("thata") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(RunConfig::parse("g 1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("g = one"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(RunConfig::parse("g = 1\ng = 2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(RunConfig::parse("coupling = heisenberg"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(RunConfig::parse("nontrans_eps = 0"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert!((parse_real("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_real("2*pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_real("-pi/4").unwrap() + PI / 4.0).abs() < 1e-15);
        assert!(parse_real("pie").is_err());
        assert!(parse_real("pi/0").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("phi3").unwrap(), SeedSpec::Eigenstate(2));
        assert!(parse_seed("phi5").is_err());
        match parse_seed("1 0 0 0 0 0 1 0").unwrap() {
            SeedSpec::Amplitudes(a) => assert_eq!(a.len(), 4),
            other => panic!("{other:?}"),
        }
        match parse_seed("mixed: 0.5 0.1 0 0  0.2 0.5 0 0  0 0 0 0  0 0 0 0").unwrap() {
            SeedSpec::Mixed(m) => {
                assert_eq!(m[(0, 1)], Complex::new(0.1, 0.2));
                assert_eq!(m[(1, 0)], Complex::new(0.1, -0.2));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_seed("mixed: 1 2 3").is_err());
    }
}
