//! Decay of oscillations for the homogeneous equation on growing cylinders.
//!
//! The limit budget `((τ^{α/2} + τ^{α0/2} + τ^{y})/τ)^{1/γ} + τ^{-(γ'-1)}`
//! with `y = α/(γ - α(γ-1))` tends to zero as `τ → ∞`, which is what forces
//! a sublinear entire solution to be constant. The probe measures the same
//! trend on actual solves with `g ≡ 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dual::{normalize, oscillation_report, OscillationParams};
use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{Grid, GridSpec, ScalarField};
use crate::hj::{solve_hj, HjProblem};
use crate::seminorm::SeminormOptions;

/// Oscillation budget after letting `R → ∞`, without its constant.
pub fn liouville_budget(alpha: f64, gamma: f64, dim: usize, tau: f64) -> Result<f64> {
    let e = Exponents::new(gamma, dim)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "α must lie in (0, 1) (got {alpha})"
        )));
    }
    if !(tau > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "τ must be positive (got {tau})"
        )));
    }
    let sum =
        tau.powf(alpha / 2.0) + tau.powf(e.alpha0() / 2.0) + tau.powf(e.young_exponent(alpha));
    Ok((sum / tau).powf(1.0 / gamma) + tau.powf(-(e.gamma_prime() - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub h: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub radii: Vec<f64>,
    pub taus: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
    /// Multiplies the sine profile; 0 gives constant data.
    pub amplitude_scale: f64,
    pub seminorm: SeminormOptions,
}

impl ProbeConfig {
    pub fn new(gamma: f64, alpha: f64) -> Self {
        Self {
            h: 1.0,
            gamma,
            alpha,
            sigma: 1.0,
            radii: vec![8.0],
            taus: vec![4.0, 16.0, 64.0],
            dx: 0.25,
            dt: 0.125,
            amplitude_scale: 1.0,
            seminorm: SeminormOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleRow {
    pub radius: f64,
    pub tau: f64,
    /// Closed-form limit budget.
    pub budget: f64,
    /// Finite-`R` space budget reported by the oscillation check.
    pub xest0_rhs: f64,
    pub xest0_lhs: f64,
    /// `max_{|y| ≤ 1} |w(y, 0) - w(0, 0)|` of the normalized solution.
    pub oscillation: f64,
    /// Amplitude divided out by the normalization.
    pub amplitude: f64,
    pub kinetic: f64,
    pub space_quotient: f64,
    pub time_quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleProbe {
    pub rows: Vec<LiouvilleRow>,
    /// Limit budget strictly decreasing along the τ ladder for every radius.
    pub budget_decreasing: bool,
    /// Measured oscillation non-increasing along the τ ladder within the slack.
    pub oscillation_monotone: bool,
}

/// Relative slack tolerated when checking the measured oscillation for
/// monotonicity, plus an absolute floor for values at rounding level.
pub const MONOTONE_SLACK: f64 = 0.05;
const MONOTONE_FLOOR: f64 = 1e-13;

/// Sine profile vanishing on `|x1| = R + 1` with Hölder quotient below 3.
fn profile(radius: f64, alpha: f64, scale: f64) -> impl Fn(&[f64; 2], f64) -> f64 {
    let half = radius + 1.0;
    let modes = (half / PI).round().max(1.0);
    let k = PI * modes / half;
    let amp = scale * 0.9 * 3.0 / (k.powf(alpha) * 2f64.powf(1.0 - alpha));
    move |x, _| amp * (k * x[0]).sin()
}

fn probe_one(cfg: &ProbeConfig, radius: f64, tau: f64) -> Result<LiouvilleRow> {
    let spec = GridSpec::new(1, radius + 1.0, cfg.dx, tau, cfg.dt);
    let grid = Arc::new(Grid::new(spec)?);
    let p = HjProblem::new(grid.clone(), cfg.gamma)
        .with_sigma(cfg.sigma)
        .with_constant_h(cfg.h)
        .with_data_fn(profile(radius, cfg.alpha, cfg.amplitude_scale));
    let sol = solve_hj(&p)?;
    let g = ScalarField::zeros(grid.clone());
    let z = 1.0;
    let n = normalize(
        &sol.u,
        &g,
        cfg.h,
        cfg.h,
        cfg.gamma,
        cfg.alpha,
        z,
        radius,
        &cfg.seminorm,
    )?;
    let mut params = OscillationParams::new(cfg.gamma, cfg.alpha, z, radius);
    params.sigma = cfg.sigma;
    params.h0 = n.h0;
    params.h1 = n.h1;
    let report = oscillation_report(&n.w, &n.g, &params, &cfg.seminorm)?;

    let origin = grid
        .node_at(&[0.0; 2])
        .ok_or_else(|| LabError::InvalidGrid("the origin is not a grid node".into()))?;
    let w00 = n.w.get(0, origin);
    let oscillation = grid
        .active_nodes()
        .filter(|&k| grid.coords(k)[0].abs() <= 1.0 + 1e-12)
        .map(|k| (n.w.get(0, k) - w00).abs())
        .fold(0.0, f64::max);
    Ok(LiouvilleRow {
        radius,
        tau,
        budget: liouville_budget(cfg.alpha, cfg.gamma, 1, tau)?,
        xest0_rhs: report.xest0_rhs,
        xest0_lhs: report.xest0_lhs,
        oscillation,
        amplitude: n.amplitude,
        kinetic: report.kinetic,
        space_quotient: report.space_quotient,
        time_quotient: report.time_quotient,
    })
}

/// Solves the homogeneous problem with sine data on `(-R-1, R+1) × (0, τ)`
/// for every `(R, τ)` and tabulates budgets against measured oscillation.
pub fn liouville_probe(cfg: &ProbeConfig) -> Result<LiouvilleProbe> {
    if !(cfg.h > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "h must be positive (got {})",
            cfg.h
        )));
    }
    if cfg.radii.is_empty() || cfg.taus.is_empty() {
        return Err(LabError::InvalidParameter(
            "need at least one R and one τ".into(),
        ));
    }
    let mut rows = Vec::with_capacity(cfg.radii.len() * cfg.taus.len());
    for &r in &cfg.radii {
        for &tau in &cfg.taus {
            rows.push(probe_one(cfg, r, tau)?);
        }
    }
    let mut budget_decreasing = true;
    let mut oscillation_monotone = true;
    for &r in &cfg.radii {
        let mut ladder: Vec<_> = rows.iter().filter(|row| row.radius == r).collect();
        ladder.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        for pair in ladder.windows(2) {
            budget_decreasing &= pair[1].budget < pair[0].budget;
            oscillation_monotone &= pair[1].oscillation
                <= pair[0].oscillation * (1.0 + MONOTONE_SLACK) + MONOTONE_FLOOR;
        }
    }
    Ok(LiouvilleProbe {
        rows,
        budget_decreasing,
        oscillation_monotone,
    })
}
