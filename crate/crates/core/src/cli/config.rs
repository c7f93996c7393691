//! `key=value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Numbers may be written as
//! fractions (`dx=1/64`), lists are comma-separated.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::GridSpec;
use crate::scalelab::SourceFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactKind {
    SineWave,
    SineProduct,
    /// Zero source, sine boundary and terminal data.
    None,
}

/// Drift of the `solve-fp` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    /// Dual drift of the configured HJ solution.
    Hj,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Nonlinear,
    Weighted,
}

/// Fully resolved parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub dim: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub h: f64,
    pub radius: f64,
    pub horizon: f64,
    pub dx: f64,
    pub dt: f64,
    pub ball: bool,
    pub alpha: f64,
    pub z: f64,
    pub seed: u64,
    pub exact: ExactKind,
    pub amplitude: f64,
    pub wave: [f64; 2],
    pub phase: f64,
    pub source: [f64; 2],
    pub drift: DriftKind,
    pub shift: [f64; 2],
    pub duality_tol: f64,
    pub constant_cap: f64,
    pub samples: usize,
    pub gamma_primes: Vec<f64>,
    pub pair_budget: u64,
    pub seminorm_samples: u64,
    pub selection: SelectionMode,
    /// Half-width of the selection cylinder.
    pub select_radius: f64,
    /// Target half-width; 0 sizes the target to fit the source.
    pub target_radius: f64,
    pub target_horizon: f64,
    pub target_dx: f64,
    pub target_dt: f64,
    pub radii: Vec<f64>,
    pub taus: Vec<f64>,
    pub probe_dx: f64,
    pub probe_dt: f64,
    pub qs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub dxs: Vec<f64>,
    pub family: SourceFamily,
    pub source_norm: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            dim: 1,
            gamma: 3.0,
            sigma: 1.0,
            h: 1.0,
            radius: 1.0,
            horizon: 0.5,
            dx: 1.0 / 32.0,
            dt: 1.0 / 128.0,
            ball: false,
            alpha: 0.5,
            z: 1.0,
            seed: 42,
            exact: ExactKind::SineWave,
            amplitude: 0.5,
            wave: [1.3, 0.0],
            phase: 0.4,
            source: [0.0; 2],
            drift: DriftKind::Hj,
            shift: [0.5, 0.0],
            duality_tol: 0.05,
            constant_cap: 100.0,
            samples: 100_000,
            gamma_primes: vec![1.1, 1.3, 1.5, 1.7, 1.9],
            pair_budget: 100_000_000,
            seminorm_samples: 20_000_000,
            selection: SelectionMode::Nonlinear,
            select_radius: 0.25,
            target_radius: 0.0,
            target_horizon: 0.25,
            target_dx: 0.0625,
            target_dt: 0.0625,
            radii: vec![8.0],
            taus: vec![4.0, 16.0, 64.0],
            probe_dx: 0.25,
            probe_dt: 0.125,
            qs: vec![1.6, 2.4],
            epsilons: vec![0.25, 0.125, 0.0625],
            dxs: vec![1.0 / 64.0, 1.0 / 128.0],
            family: SourceFamily::TruncatedPower,
            source_norm: 1.0,
        }
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    let bad = || LabError::Parse(format!("{key}: not a number: {v:?}"));
    let x = match v.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            a / b
        }
        None => v.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| LabError::Parse(format!("{key}: not a nonnegative integer: {v:?}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

fn pair(key: &str, v: &str) -> Result<[f64; 2]> {
    match list(key, v)?.as_slice() {
        [a] => Ok([*a, 0.0]),
        [a, b] => Ok([*a, *b]),
        _ => Err(LabError::Parse(format!(
            "{key}: expected one or two numbers"
        ))),
    }
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(LabError::Parse(format!(
            "{key}: expected true or false, got {v:?}"
        ))),
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl Config {
    /// Applies one `key=value` assignment.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let v = v.trim();
        match key {
            "dim" => self.dim = integer(key, v)?,
            "gamma" => self.gamma = number(key, v)?,
            "sigma" => self.sigma = number(key, v)?,
            "h" => self.h = number(key, v)?,
            "radius" => self.radius = number(key, v)?,
            "horizon" => self.horizon = number(key, v)?,
            "dx" => self.dx = number(key, v)?,
            "dt" => self.dt = number(key, v)?,
            "ball" => self.ball = flag(key, v)?,
            "alpha" => self.alpha = number(key, v)?,
            "z" => self.z = number(key, v)?,
            "seed" => self.seed = integer(key, v)?,
            "exact" => {
                self.exact = match v {
                    "sine-wave" => ExactKind::SineWave,
                    "sine-product" => ExactKind::SineProduct,
                    "none" => ExactKind::None,
                    _ => {
                        return Err(LabError::Parse(format!(
                            "exact: expected sine-wave, sine-product or none, got {v:?}"
                        )))
                    }
                }
            }
            "amplitude" => self.amplitude = number(key, v)?,
            "wave" => self.wave = pair(key, v)?,
            "phase" => self.phase = number(key, v)?,
            "source" => self.source = pair(key, v)?,
            "drift" => {
                self.drift = match v {
                    "hj" => DriftKind::Hj,
                    "none" => DriftKind::None,
                    _ => {
                        return Err(LabError::Parse(format!(
                            "drift: expected hj or none, got {v:?}"
                        )))
                    }
                }
            }
            "shift" => self.shift = pair(key, v)?,
            "duality_tol" => self.duality_tol = number(key, v)?,
            "constant_cap" => self.constant_cap = number(key, v)?,
            "samples" => self.samples = integer(key, v)?,
            "gamma_primes" => self.gamma_primes = list(key, v)?,
            "pair_budget" => self.pair_budget = integer(key, v)?,
            "seminorm_samples" => self.seminorm_samples = integer(key, v)?,
            "selection" => {
                self.selection = match v {
                    "nonlinear" => SelectionMode::Nonlinear,
                    "weighted" => SelectionMode::Weighted,
                    _ => {
                        return Err(LabError::Parse(format!(
                            "selection: expected nonlinear or weighted, got {v:?}"
                        )))
                    }
                }
            }
            "select_radius" => self.select_radius = number(key, v)?,
            "target_radius" => self.target_radius = number(key, v)?,
            "target_horizon" => self.target_horizon = number(key, v)?,
            "target_dx" => self.target_dx = number(key, v)?,
            "target_dt" => self.target_dt = number(key, v)?,
            "radii" => self.radii = list(key, v)?,
            "taus" => self.taus = list(key, v)?,
            "probe_dx" => self.probe_dx = number(key, v)?,
            "probe_dt" => self.probe_dt = number(key, v)?,
            "qs" => self.qs = list(key, v)?,
            "epsilons" => self.epsilons = list(key, v)?,
            "dxs" => self.dxs = list(key, v)?,
            "family" => {
                self.family = match v {
                    "truncated-power" => SourceFamily::TruncatedPower,
                    "constant" => SourceFamily::Constant,
                    _ => {
                        return Err(LabError::Parse(format!(
                            "family: expected truncated-power or constant, got {v:?}"
                        )))
                    }
                }
            }
            "source_norm" => self.source_norm = number(key, v)?,
            _ => return Err(LabError::Parse(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Canonical `key=value` lines, one per parameter, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let exact = match self.exact {
            ExactKind::SineWave => "sine-wave",
            ExactKind::SineProduct => "sine-product",
            ExactKind::None => "none",
        };
        let selection = match self.selection {
            SelectionMode::Nonlinear => "nonlinear",
            SelectionMode::Weighted => "weighted",
        };
        let family = match self.family {
            SourceFamily::TruncatedPower => "truncated-power",
            SourceFamily::Constant => "constant",
        };
        vec![
            ("dim", self.dim.to_string()),
            ("gamma", format!("{}", self.gamma)),
            ("sigma", format!("{}", self.sigma)),
            ("h", format!("{}", self.h)),
            ("radius", format!("{}", self.radius)),
            ("horizon", format!("{}", self.horizon)),
            ("dx", format!("{}", self.dx)),
            ("dt", format!("{}", self.dt)),
            ("ball", self.ball.to_string()),
            ("alpha", format!("{}", self.alpha)),
            ("z", format!("{}", self.z)),
            ("seed", self.seed.to_string()),
            ("exact", exact.into()),
            ("amplitude", format!("{}", self.amplitude)),
            ("wave", fmt_list(&self.wave)),
            ("phase", format!("{}", self.phase)),
            ("source", fmt_list(&self.source)),
            (
                "drift",
                match self.drift {
                    DriftKind::Hj => "hj",
                    DriftKind::None => "none",
                }
                .into(),
            ),
            ("shift", fmt_list(&self.shift)),
            ("duality_tol", format!("{}", self.duality_tol)),
            ("constant_cap", format!("{}", self.constant_cap)),
            ("samples", self.samples.to_string()),
            ("gamma_primes", fmt_list(&self.gamma_primes)),
            ("pair_budget", self.pair_budget.to_string()),
            ("seminorm_samples", self.seminorm_samples.to_string()),
            ("selection", selection.into()),
            ("select_radius", format!("{}", self.select_radius)),
            ("target_radius", format!("{}", self.target_radius)),
            ("target_horizon", format!("{}", self.target_horizon)),
            ("target_dx", format!("{}", self.target_dx)),
            ("target_dt", format!("{}", self.target_dt)),
            ("radii", fmt_list(&self.radii)),
            ("taus", fmt_list(&self.taus)),
            ("probe_dx", format!("{}", self.probe_dx)),
            ("probe_dt", format!("{}", self.probe_dt)),
            ("qs", fmt_list(&self.qs)),
            ("epsilons", fmt_list(&self.epsilons)),
            ("dxs", fmt_list(&self.dxs)),
            ("family", family.into()),
            ("source_norm", format!("{}", self.source_norm)),
        ]
    }

    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            writeln!(s, "{k}={v}").unwrap();
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Config::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.gamma, self.dim)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.dim, self.radius, self.dx, self.horizon, self.dt)
            .with_ball_mask(self.ball)
    }

    /// Checks every physics parameter, naming the violated condition.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidParameter(m.into()));
        if !(self.gamma > 2.0) {
            return bad("gamma must exceed 2");
        }
        if self.dim != 1 && self.dim != 2 {
            return bad("dim must be 1 or 2");
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return bad("sigma must lie in (0, 1]");
        }
        if !(self.h > 0.0) {
            return bad("h must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.z >= 1.0) {
            return bad("z must be at least 1");
        }
        if self.gamma_primes.iter().any(|&g| !(g > 1.0 && g < 2.0)) {
            return bad("every gamma_prime must lie in (1, 2)");
        }
        if self.samples == 0 {
            return bad("samples must be positive");
        }
        if !(self.duality_tol > 0.0 && self.constant_cap > 0.0 && self.source_norm > 0.0) {
            return bad("duality_tol, constant_cap and source_norm must be positive");
        }
        if !(self.select_radius > 0.0 && self.select_radius <= self.radius) {
            return bad("select_radius must lie in (0, radius]");
        }
        if self.shift[0].hypot(self.shift[1]) > 1.0 {
            return bad("shift must have length at most 1");
        }
        self.grid_spec().validate()
    }
}

/// Parses `key=value` lines over the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    apply(&mut cfg, text.lines())?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies assignments without validating.
pub fn apply<'a>(cfg: &mut Config, lines: impl IntoIterator<Item = &'a str>) -> Result<()> {
    for (i, raw) in lines.into_iter().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            LabError::Parse(format!("line {}: expected key=value, got {raw:?}", i + 1))
        })?;
        cfg.set(k.trim(), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents_follow_gamma() {
        let cfg = parse_config("gamma=3\nsigma=1").unwrap();
        let e = cfg.exponents().unwrap();
        assert!((e.gamma_prime() - 1.5).abs() < 1e-15);
        assert!((e.q0() - 3.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_two_rejected() {
        let err = parse_config("gamma=2").unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 2"), "{err}");
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), Config::default());
        assert_eq!(parse_config("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("gama=3").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn fractions_and_lists() {
        let cfg = parse_config("dx=1/64\ndt=1/256\nqs=1.6, 2.4,3\nwave=2").unwrap();
        assert_eq!(cfg.dx, 1.0 / 64.0);
        assert_eq!(cfg.qs, vec![1.6, 2.4, 3.0]);
        assert_eq!(cfg.wave, [2.0, 0.0]);
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = parse_config("gamma=4\nqs=2,3\nexact=none\nfamily=constant").unwrap();
        let again = parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_ne!(cfg.hash(), Config::default().hash());
        assert_eq!(cfg.hash().len(), 16);
    }

    #[test]
    fn grid_violations_named() {
        let err = parse_config("dx=0.3").unwrap_err();
        assert!(err.to_string().contains("2R/Δx"), "{err}");
    }
}
