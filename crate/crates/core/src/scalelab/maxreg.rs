//! Maximal-regularity sweep: how the `W^{2,1}_q`-type norms of the solution
//! react to sharpening singular sources of fixed `L^q` size.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{lq_norm, Cylinder, Grid, GridSpec, ScalarField};
use crate::hj::{solve_hj, HjProblem};
use crate::seminorm::w21q_norms;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFamily {
    /// `c_ε min(ρ^{-β}, ε^{-β})` with the parabolic distance
    /// `ρ = |x - x*| + |t - t*|^{1/2}` and `β = 0.95 (N + 2) / q`.
    TruncatedPower,
    /// `f ≡ c`; `ε` is ignored.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxregConfig {
    pub family: SourceFamily,
    pub dim: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub h: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub qs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub dxs: Vec<f64>,
    /// `Δt = dt_ratio · Δx`
    pub dt_ratio: f64,
    /// Common value of `‖f_ε‖_q` over the whole grid cylinder.
    pub source_norm: f64,
    pub singularity: ([f64; 2], f64),
    /// Inner cylinder `Q'` carrying the solution norms.
    pub inner: Cylinder,
}

impl MaxregConfig {
    /// One-dimensional setup on `(-1, 1) × (0, 1)` with the singularity at
    /// `(0, 1/2)` and `Q' = (-1/2, 1/2) × (1/4, 3/4)`.
    pub fn new(gamma: f64, qs: Vec<f64>) -> Self {
        Self {
            family: SourceFamily::TruncatedPower,
            dim: 1,
            gamma,
            sigma: 1.0,
            h: 1.0,
            half_width: 1.0,
            horizon: 1.0,
            qs,
            epsilons: vec![0.25, 0.125, 0.0625],
            dxs: vec![1.0 / 64.0, 1.0 / 128.0],
            dt_ratio: 0.25,
            source_norm: 1.0,
            singularity: ([0.0; 2], 0.5),
            inner: Cylinder::centered(0.5, false, 0.25, 0.75),
        }
    }

    fn validate(&self) -> Result<Exponents> {
        let e = Exponents::new(self.gamma, self.dim)?;
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if self.qs.iter().any(|&q| !(q > 1.0)) {
            return bad("every q must exceed 1".into());
        }
        if self.family == SourceFamily::TruncatedPower && self.epsilons.iter().any(|&e| !(e > 0.0))
        {
            return bad("every ε must be positive".into());
        }
        if self.qs.is_empty() || self.epsilons.is_empty() || self.dxs.is_empty() {
            return bad("q, ε and Δx lists must be nonempty".into());
        }
        if !(self.source_norm > 0.0 && self.dt_ratio > 0.0 && self.h > 0.0 && self.sigma > 0.0) {
            return bad("source norm, Δt ratio, h and σ must be positive".into());
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// The solve failed numerically; the message is recorded in the table.
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> &str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxregRow {
    pub q: f64,
    pub epsilon: f64,
    pub dx: f64,
    pub source_norm: f64,
    pub time_derivative: f64,
    pub hessian: f64,
    pub gradient_power: f64,
    pub ratio: f64,
    pub status: RowStatus,
}

/// Spread of the ratio column for one `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSpread {
    pub q: f64,
    pub above_q0: bool,
    /// Largest `max/min` over `ε` at a fixed resolution.
    pub across_epsilon: f64,
    /// Largest `max/min` over resolutions at a fixed `ε`.
    pub across_resolution: f64,
    /// Ratio at the sharpest `ε` over the ratio at the mildest, finest grid.
    pub growth: f64,
    /// Some spread exceeds 2 or a row failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxregSweep {
    pub q0: f64,
    pub alpha0: f64,
    pub rows: Vec<MaxregRow>,
    pub spreads: Vec<RatioSpread>,
}

/// Bound on the spreads for a column to count as stable.
pub const SPREAD_BOUND: f64 = 2.0;

fn source(cfg: &MaxregConfig, grid: &Arc<Grid>, q: f64, eps: f64) -> Result<ScalarField> {
    let raw = match cfg.family {
        SourceFamily::Constant => ScalarField::constant(grid.clone(), 1.0),
        SourceFamily::TruncatedPower => {
            let beta = 0.95 * (cfg.dim as f64 + 2.0) / q;
            let (xs, ts) = cfg.singularity;
            let cap = eps.powf(-beta);
            ScalarField::from_fn(grid.clone(), |x, t| {
                let rho = (x[0] - xs[0]).hypot(x[1] - xs[1]) + (t - ts).abs().sqrt();
                if rho > 0.0 {
                    rho.powf(-beta).min(cap)
                } else {
                    cap
                }
            })
        }
    };
    let norm = lq_norm(&raw, q, &grid.spec().cylinder())?;
    let c = cfg.source_norm / norm;
    Ok(raw.map(|v| c * v))
}

fn run_job(cfg: &MaxregConfig, q: f64, eps: f64, dx: f64) -> Result<MaxregRow> {
    let spec = GridSpec::new(cfg.dim, cfg.half_width, dx, cfg.horizon, cfg.dt_ratio * dx);
    let grid = Arc::new(Grid::new(spec)?);
    let f = source(cfg, &grid, q, eps)?;
    let source_norm = lq_norm(&f, q, &grid.spec().cylinder())?;
    let p = HjProblem::new(grid, cfg.gamma)
        .with_sigma(cfg.sigma)
        .with_constant_h(cfg.h)
        .with_q(q)
        .with_rhs(f);
    let mut row = MaxregRow {
        q,
        epsilon: eps,
        dx,
        source_norm,
        time_derivative: f64::NAN,
        hessian: f64::NAN,
        gradient_power: f64::NAN,
        ratio: f64::NAN,
        status: RowStatus::Ok,
    };
    match solve_hj(&p) {
        Ok(sol) => {
            let n = w21q_norms(&sol.u, q, cfg.gamma, &cfg.inner)?;
            row.time_derivative = n.time_derivative;
            row.hessian = n.hessian;
            row.gradient_power = n.gradient_power;
            row.ratio = (n.time_derivative + n.hessian + n.gradient_power) / source_norm;
        }
        Err(e) if e.is_numerical() => row.status = RowStatus::Failed(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(row)
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Runs every `(q, ε, Δx)` job in parallel. Rows come back ordered by
/// `q`, then `ε`, then `Δx`, as listed in the configuration.
pub fn maxreg_sweep(cfg: &MaxregConfig) -> Result<MaxregSweep> {
    let e = cfg.validate()?;
    let jobs: Vec<(f64, f64, f64)> = cfg
        .qs
        .iter()
        .flat_map(|&q| {
            cfg.epsilons
                .iter()
                .flat_map(move |&eps| cfg.dxs.iter().map(move |&dx| (q, eps, dx)))
        })
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(q, eps, dx)| run_job(cfg, q, eps, dx))
        .collect::<Result<Vec<_>>>()?;

    let spreads = cfg
        .qs
        .iter()
        .map(|&q| {
            let mine: Vec<&MaxregRow> = rows.iter().filter(|r| r.q == q).collect();
            let ok = mine.iter().all(|r| r.status == RowStatus::Ok);
            let across_epsilon = cfg
                .dxs
                .iter()
                .map(|&dx| spread(mine.iter().filter(|r| r.dx == dx).map(|r| r.ratio)))
                .fold(1.0, f64::max);
            let across_resolution = cfg
                .epsilons
                .iter()
                .map(|&eps| spread(mine.iter().filter(|r| r.epsilon == eps).map(|r| r.ratio)))
                .fold(1.0, f64::max);
            let finest = cfg.dxs.iter().copied().fold(f64::INFINITY, f64::min);
            let at = |eps: f64| {
                mine.iter()
                    .find(|r| r.dx == finest && r.epsilon == eps)
                    .map_or(f64::NAN, |r| r.ratio)
            };
            let growth = at(*cfg.epsilons.last().unwrap()) / at(cfg.epsilons[0]);
            RatioSpread {
                q,
                above_q0: q > e.q0(),
                across_epsilon,
                across_resolution,
                growth,
                flagged: !ok || across_epsilon > SPREAD_BOUND || across_resolution > SPREAD_BOUND,
            }
        })
        .collect();
    Ok(MaxregSweep {
        q0: e.q0(),
        alpha0: e.alpha0(),
        rows,
        spreads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: SourceFamily) -> MaxregConfig {
        let mut cfg = MaxregConfig::new(3.0, vec![2.4]);
        cfg.family = family;
        cfg.dxs = vec![1.0 / 16.0];
        cfg.epsilons = vec![0.5, 0.25];
        cfg
    }

    #[test]
    fn constant_family_is_flat_in_epsilon() {
        let s = maxreg_sweep(&small(SourceFamily::Constant)).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[0].ratio, s.rows[1].ratio);
        assert!(s.rows[0].ratio.is_finite() && s.rows[0].ratio > 0.0);
        assert_eq!(s.spreads[0].across_epsilon, 1.0);
    }

    #[test]
    fn header_exponents() {
        let s = maxreg_sweep(&small(SourceFamily::Constant)).unwrap();
        assert!((s.q0 - 2.0).abs() < 1e-15);
        assert!((s.alpha0 - 0.5).abs() < 1e-15);
        assert!(s.spreads[0].above_q0);
    }

    #[test]
    fn sources_share_their_norm() {
        let cfg = small(SourceFamily::TruncatedPower);
        let g = Arc::new(Grid::new(GridSpec::new(1, 1.0, 1.0 / 16.0, 1.0, 1.0 / 64.0)).unwrap());
        for eps in [0.5, 0.1, 0.01] {
            let f = source(&cfg, &g, 2.4, eps).unwrap();
            let n = lq_norm(&f, 2.4, &g.spec().cylinder()).unwrap();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn row_order_follows_configuration() {
        let mut cfg = small(SourceFamily::TruncatedPower);
        cfg.qs = vec![2.4, 1.6];
        cfg.dxs = vec![1.0 / 8.0, 1.0 / 16.0];
        let s = maxreg_sweep(&cfg).unwrap();
        let keys: Vec<_> = s.rows.iter().map(|r| (r.q, r.epsilon, r.dx)).collect();
        assert_eq!(keys[0], (2.4, 0.5, 0.125));
        assert_eq!(keys[1], (2.4, 0.5, 0.0625));
        assert_eq!(keys[2], (2.4, 0.25, 0.125));
        assert_eq!(keys[4], (1.6, 0.5, 0.125));
        assert!(!s.spreads[1].above_q0);
    }

    #[test]
    fn rejects_bad_lists() {
        let mut cfg = small(SourceFamily::TruncatedPower);
        cfg.qs = vec![1.0];
        assert!(maxreg_sweep(&cfg).is_err());
        let mut cfg = small(SourceFamily::TruncatedPower);
        cfg.epsilons.clear();
        assert!(maxreg_sweep(&cfg).is_err());
    }
}
