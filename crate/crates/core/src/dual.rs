//! Representation formula, its bent (suboptimal) variant and the oscillation
//! budgets, evaluated on discrete pairs `(w, m)`.
//!
//! With `b = h1 γ |Dw|^{γ-2} Dw` and `m` transported by `-b`,
//!
//! ```text
//! w(x0, 0) = ∬ ℓ|b|^{γ'} m + ∬ g m + ∫ w(τ) m(τ) - σ ∬_{∂Ω} w Dm·ν
//! ```
//!
//! holds in the continuum; on the grid the gap is a discretization residual.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::fp::{
    drift_from_solution, kinetic_energy, m_norm_bound_check, moment_alpha, solve_fp, FpProblem,
    FpSolution,
};
use crate::grid::{gradient_field, lq_norm, Cylinder, Grid, GridSpec, ScalarField};
use crate::hj::{solve_hj, HjProblem, HjSolution};
use crate::seminorm::{space_quotient, time_quotient, SeminormOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    /// `w(x0, 0)`
    pub lhs: f64,
    pub lagrangian: f64,
    pub running_cost: f64,
    pub terminal: f64,
    pub boundary: f64,
    /// `lhs - (lagrangian + running_cost + terminal + boundary)`
    pub residual: f64,
    pub ell0: f64,
    pub ell1: f64,
}

impl DualityReport {
    pub fn rhs_terms(&self) -> [(&'static str, f64); 4] {
        [
            ("lagrangian", self.lagrangian),
            ("running_cost", self.running_cost),
            ("terminal", self.terminal),
            ("boundary", self.boundary),
        ]
    }

    pub fn rhs_total(&self) -> f64 {
        self.rhs_terms().iter().map(|(_, v)| v).sum()
    }
}

/// A solved HJ problem together with its adjoint density.
#[derive(Debug, Clone)]
pub struct DualPair {
    pub hj: HjSolution,
    pub fp: FpSolution,
}

/// Solves `p`, builds `b` from the solution with `h1`, and transports a unit
/// mass from `source`.
pub fn solve_dual_pair(p: &HjProblem, source: [f64; 2]) -> Result<DualPair> {
    let hj = solve_hj(p)?;
    let b = drift_from_solution(&hj.u, p.h1, p.gamma);
    let fp = solve_fp(&FpProblem::new(b, p.sigma, source))?;
    Ok(DualPair { hj, fp })
}

fn same_spec(a: &Grid, b: &Grid, what: &str) -> Result<()> {
    if a.spec() != b.spec() {
        return Err(LabError::GridMismatch(format!(
            "{what} lives on a different grid"
        )));
    }
    Ok(())
}

fn ell_bounds(h: &ScalarField, e: &Exponents) -> (f64, f64) {
    let g = h.grid();
    let (lo, hi) = g
        .active_nodes()
        .flat_map(|n| (0..g.n_levels()).map(move |l| (l, n)))
        .map(|(l, n)| h.get(l, n))
        .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    (e.lagrangian_coeff(lo), e.lagrangian_coeff(hi))
}

/// Evaluates both sides of the representation formula. The Lagrangian is
/// taken in its `h (γ-1) |Dw|^γ` form, which equals `ℓ |b|^{γ'}` when `b`
/// was built from `w` with the same `h`.
pub fn duality_identity(
    w: &ScalarField,
    g: &ScalarField,
    sol: &FpSolution,
    h: &ScalarField,
    gamma: f64,
) -> Result<DualityReport> {
    let grid = sol.grid();
    same_spec(w.grid(), grid, "w")?;
    same_spec(g.grid(), grid, "g")?;
    same_spec(h.grid(), grid, "h")?;
    let e = Exponents::new(gamma, grid.dim())?;
    let (ell0, ell1) = ell_bounds(h, &e);
    let top = grid.n_levels() - 1;

    let dw = gradient_field(w);
    let lagrangian = sol.integrate(|l, n| {
        let p = dw.get(l, n);
        (gamma - 1.0) * h.get(l, n) * p[0].hypot(p[1]).powf(gamma)
    });
    let running_cost = sol.integrate(|l, n| g.get(l, n));
    let terminal = sol.integrate_level(top, |n, _| w.get(top, n));
    let boundary = sol.boundary_pairing(|l, f| w.get(l, f.boundary));
    let lhs = w.get(0, sol.source_node);
    let residual = lhs - (lagrangian + running_cost + terminal + boundary);
    Ok(DualityReport {
        lhs,
        lagrangian,
        running_cost,
        terminal,
        boundary,
        residual,
        ell0,
        ell1,
    })
}

/// Both sides of the inequality obtained by bending the optimal drift
/// toward `x0 + y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BentReport {
    /// `w(x0 + y0, 0)`
    pub lhs: f64,
    pub lagrangian: f64,
    pub running_cost: f64,
    pub terminal: f64,
    pub boundary: f64,
    /// `rhs - lhs`; nonnegative in the continuum.
    pub slack: f64,
}

/// `w` and `g` live on a grid padded by at least `|y0|` around the grid of
/// `sol`; shifted values are interpolated multilinearly.
pub fn bent_duality(
    w: &ScalarField,
    g: &ScalarField,
    sol: &FpSolution,
    y0: [f64; 2],
    gamma: f64,
    h0: f64,
) -> Result<BentReport> {
    let inner = sol.grid();
    let outer = w.grid();
    same_spec(g.grid(), outer, "g")?;
    let shift = y0[0].hypot(y0[1]);
    if shift > 1.0 + 1e-12 {
        return Err(LabError::InvalidParameter(format!(
            "|y0| = {shift} exceeds 1"
        )));
    }
    let (si, so) = (inner.spec(), outer.spec());
    if si.dim != so.dim
        || (si.dx - so.dx).abs() > 1e-12 * si.dx
        || (si.dt - so.dt).abs() > 1e-12 * si.dt
        || (si.horizon - so.horizon).abs() > 1e-12 * si.horizon
    {
        return Err(LabError::GridMismatch(
            "padded grid must share dimension, Δx, Δt and horizon".into(),
        ));
    }
    if so.half_width + 1e-9 < si.half_width + shift {
        return Err(LabError::OutOfDomain(format!(
            "insufficient padding: need half-width ≥ {}, have {}",
            si.half_width + shift,
            so.half_width
        )));
    }
    let e = Exponents::new(gamma, inner.dim())?;
    let ell0 = e.lagrangian_coeff(h0);
    let tau = inner.horizon();
    let top = inner.n_levels() - 1;
    let xi = |level: usize| {
        let c = (tau - inner.time(level)) / tau;
        [c * y0[0], c * y0[1]]
    };
    let at = |f: &ScalarField, level: usize, x: [f64; 2]| -> Result<f64> {
        f.interpolate_level(level, &x).ok_or_else(|| {
            LabError::OutOfDomain(format!("shifted point {x:?} leaves the padded grid"))
        })
    };
    let shifted = |f: &ScalarField, level: usize, node: usize| -> Result<f64> {
        let (x, s) = (inner.coords(node), xi(level));
        at(f, level, [x[0] + s[0], x[1] + s[1]])
    };

    // precompute shifted g so the quadrature closure stays infallible
    let mut g_shift = ScalarField::zeros(inner.clone());
    for level in 0..=top {
        for node in inner.interior_nodes() {
            g_shift.set(level, node, shifted(g, level, node)?);
        }
    }
    let b = &sol.drift;
    let kick = [y0[0] / tau, y0[1] / tau];
    let lagrangian = ell0
        * sol.integrate(|l, n| {
            let v = b.get(l, n);
            (v[0] + kick[0]).hypot(v[1] + kick[1]).powf(e.gamma_prime())
        });
    let running_cost = sol.integrate(|l, n| g_shift.get(l, n));
    let mut w_top = vec![0.0; inner.n_space()];
    for n in inner.interior_nodes() {
        w_top[n] = at(w, top, inner.coords(n))?;
    }
    let terminal = sol.integrate_level(top, |n, _| w_top[n]);
    let mut boundary = 0.0;
    for (step, fluxes) in sol.face_flux.iter().enumerate() {
        for (face, amount) in sol.exit_faces.iter().zip(fluxes) {
            if *amount != 0.0 {
                boundary += shifted(w, step + 1, face.boundary)? * amount;
            }
        }
    }
    let x0 = inner.coords(sol.source_node);
    let lhs = at(w, 0, [x0[0] + y0[0], x0[1] + y0[1]])?;
    let slack = lagrangian + running_cost + terminal + boundary - lhs;
    Ok(BentReport {
        lhs,
        lagrangian,
        running_cost,
        terminal,
        boundary,
        slack,
    })
}

/// Parameters of an oscillation report. `f0` and `c1` are the smallness
/// thresholds the two side conditions are compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    pub sigma: f64,
    pub h0: f64,
    pub h1: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub z: f64,
    pub radius: f64,
    pub y0: [f64; 2],
    pub f0: f64,
    pub c1: f64,
}

impl OscillationParams {
    pub fn new(gamma: f64, alpha: f64, z: f64, radius: f64) -> Self {
        Self {
            sigma: 1.0,
            h0: 1.0,
            h1: 1.0,
            gamma,
            alpha,
            z,
            radius,
            y0: [1.0, 0.0],
            f0: 1.0,
            c1: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationBudget {
    /// `σ^{-γ'(N+1)/(N+2)} ‖g‖_{q0}` on the inner cylinder.
    pub fnorm: f64,
    pub fnorm_ok: bool,
    /// `z (R^α + τ^{α/2}) / R`
    pub shape: f64,
    pub shape_ok: bool,
    /// `R² ≥ στ`
    pub scale_ok: bool,
    pub space_quotient: f64,
    pub time_quotient: f64,
    pub kinetic: f64,
    pub test0_lhs: f64,
    pub test0_rhs: f64,
    pub xest0_lhs: f64,
    pub xest0_rhs: f64,
    /// `ℓ0 - ℓ1`
    pub ell_gap: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Right side of the time-oscillation budget without its constant.
pub fn test0_budget(
    alpha: f64,
    gamma: f64,
    dim: usize,
    z: f64,
    radius: f64,
    tau: f64,
) -> Result<f64> {
    let e = Exponents::new(gamma, dim)?;
    Ok(tau.powf(alpha / 2.0)
        + tau.powf(e.alpha0() / 2.0)
        + tau.powf(e.young_exponent(alpha))
        + tau * (radius.powf(alpha) + tau.powf(alpha / 2.0)) * z / radius)
}

/// Terms of the space-oscillation budget without its constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Xest0Terms {
    pub kinetic: f64,
    pub gnorm: f64,
    pub ell_gap: f64,
}

pub fn xest0_budget(
    t: Xest0Terms,
    gamma: f64,
    dim: usize,
    sigma: f64,
    radius: f64,
    tau: f64,
) -> Result<f64> {
    let e = Exponents::new(gamma, dim)?;
    let gp = e.gamma_prime();
    Ok(t.kinetic.powf(1.0 / gamma) / tau.powf(1.0 / gamma)
        + tau.powf(-(gp - 1.0))
        + sigma.powf(-e.sigma_power()) * (t.kinetic + tau.powf(e.alpha0() / 2.0)) * t.gnorm
        + tau.powf(1.0 / gamma) * t.kinetic.powf(1.0 / gp) / radius
        + tau / (radius * radius)
        + t.ell_gap * t.kinetic)
}

fn inner_grid(outer: &Grid, radius: f64) -> Result<Arc<Grid>> {
    let s = outer.spec();
    let spec = GridSpec::new(s.dim, radius, s.dx, s.horizon, s.dt).with_ball_mask(s.ball_mask);
    Ok(Arc::new(Grid::new(spec)?))
}

/// Time and space oscillation of `w` against their budgets. `w` and `g` live
/// on a grid of half-width at least `radius + 1`; the dual density is
/// solved on the inner cylinder of half-width `radius`.
pub fn oscillation_report(
    w: &ScalarField,
    g: &ScalarField,
    p: &OscillationParams,
    opts: &SeminormOptions,
) -> Result<OscillationBudget> {
    let outer = w.grid().clone();
    same_spec(g.grid(), &outer, "g")?;
    let (r, tau) = (p.radius, outer.horizon());
    if outer.half_width() + 1e-9 < r + 1.0 {
        return Err(LabError::OutOfDomain(format!(
            "w must be given on a half-width ≥ R + 1 = {}",
            r + 1.0
        )));
    }
    if !(p.h0 > 0.0 && p.h0 <= p.h1) {
        return Err(LabError::InvalidParameter("need 0 < h0 ≤ h1".into()));
    }
    let e = Exponents::new(p.gamma, outer.dim())?;
    let inner = inner_grid(&outer, r)?;
    let w_in = w.resample(inner.clone())?;
    let g_in = g.resample(inner.clone())?;
    let q_in = inner.spec().cylinder();

    let sq = space_quotient(&w_in, p.alpha, &q_in, opts)?.value;
    let tq = time_quotient(&w_in, p.alpha, &q_in, opts)?.value;
    let time_cap = 3f64.powf(p.gamma / 2.0) * p.z;
    if sq > 3.0 * (1.0 + 1e-9) || tq > time_cap * (1.0 + 1e-9) {
        return Err(LabError::Precondition(format!(
            "w is not normalized: space quotient {sq} (cap 3), time quotient {tq} (cap {time_cap})"
        )));
    }

    let b = drift_from_solution(&w_in, p.h1, p.gamma);
    let sol = solve_fp(&FpProblem::new(b.clone(), p.sigma, [0.0; 2]))?;
    let kinetic = kinetic_energy(&sol, &b, e.gamma_prime())?;

    let sigma_scale = p.sigma.powf(-e.sigma_power());
    let fnorm = sigma_scale * lq_norm(&g_in, e.q0(), &q_in)?;
    let padded = Cylinder::centered(r + 1.0, outer.spec().ball_mask, 0.0, tau);
    let gnorm = lq_norm(g, e.q0(), &padded)?;
    let shape = p.z * (r.powf(p.alpha) + tau.powf(p.alpha / 2.0)) / r;
    let ell_gap = e.lagrangian_coeff(p.h0) - e.lagrangian_coeff(p.h1);

    let origin = inner
        .node_at(&[0.0; 2])
        .ok_or_else(|| LabError::InvalidGrid("the origin is not a grid node".into()))?;
    let top = inner.n_levels() - 1;
    let w00 = w_in.get(0, origin);
    let test0_lhs = (w00 - w_in.get(top, origin)).abs() + kinetic;
    let test0_rhs = test0_budget(p.alpha, p.gamma, inner.dim(), p.z, r, tau)?;
    let wy0 = w
        .interpolate_level(0, &p.y0)
        .ok_or_else(|| LabError::OutOfDomain(format!("y0 = {:?} is outside the grid", p.y0)))?;
    let xest0_lhs = wy0 - w00;
    let xest0_rhs = xest0_budget(
        Xest0Terms {
            kinetic,
            gnorm,
            ell_gap,
        },
        p.gamma,
        inner.dim(),
        p.sigma,
        r,
        tau,
    )?;
    Ok(OscillationBudget {
        fnorm,
        fnorm_ok: fnorm <= p.f0,
        shape,
        shape_ok: shape <= p.c1,
        scale_ok: r * r >= p.sigma * tau,
        space_quotient: sq,
        time_quotient: tq,
        kinetic,
        test0_lhs,
        test0_rhs,
        xest0_lhs,
        xest0_rhs,
        ell_gap,
        c2: test0_lhs / test0_rhs,
        c3: xest0_lhs.max(0.0) / xest0_rhs,
    })
}

/// `w / M` with the matching coefficients, chosen so that the space quotient
/// is at most 3 and the time quotient at most `3^{γ/2} z`.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub w: ScalarField,
    pub g: ScalarField,
    pub h0: f64,
    pub h1: f64,
    /// Amplitude `M ≥ 1` that was divided out.
    pub amplitude: f64,
}

/// `w ↦ w/M` maps `-∂w - σΔw + h|Dw|^γ = g` to the same equation with
/// `h M^{γ-1}` and `g/M`.
pub fn normalize(
    w: &ScalarField,
    g: &ScalarField,
    h0: f64,
    h1: f64,
    gamma: f64,
    alpha: f64,
    z: f64,
    radius: f64,
    opts: &SeminormOptions,
) -> Result<Normalized> {
    let inner = inner_grid(w.grid(), radius)?;
    let w_in = w.resample(inner.clone())?;
    let q = inner.spec().cylinder();
    let sq = space_quotient(&w_in, alpha, &q, opts)?.value;
    let tq = time_quotient(&w_in, alpha, &q, opts)?.value;
    let m = (sq / 3.0).max(tq / (3f64.powf(gamma / 2.0) * z)).max(1.0);
    let k = m.powf(gamma - 1.0);
    Ok(Normalized {
        w: w.map(|v| v / m),
        g: g.map(|v| v / m),
        h0: h0 * k,
        h1: h1 * k,
        amplitude: m,
    })
}

/// Moment, `L^{q0'}` norm and outflux of the driftless exit density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitMeasureReport {
    pub moment: f64,
    /// `moment / (στ)^{α/2}`
    pub moment_constant: f64,
    pub norm: f64,
    /// Same norm with the initial layer `s < τ/10` excluded.
    pub norm_late: f64,
    pub outflux: f64,
}

pub fn exit_measure_report(
    grid: Arc<Grid>,
    sigma: f64,
    alpha: f64,
    gamma: f64,
) -> Result<ExitMeasureReport> {
    let sol = solve_fp(&FpProblem::driftless(grid.clone(), sigma, [0.0; 2]))?;
    let top = grid.n_levels() - 1;
    let mom = moment_alpha(&sol, &sol.drift, alpha, top)?;
    let norms = m_norm_bound_check(&sol, &sol.drift, gamma, true)?;
    Ok(ExitMeasureReport {
        moment: mom.moment,
        moment_constant: mom.moment / (sigma * grid.horizon()).powf(alpha / 2.0),
        norm: norms.norm_full,
        norm_late: norms.norm,
        outflux: sol.outflux[top],
    })
}

/// Largest observed ratio
/// `(|ζ+ξ|^{γ'} - |ζ|^{γ'}) / (|ζ|^{γ'-1}|ξ| + |ξ|^{γ'})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdiffReport {
    pub gamma_prime: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub cap: f64,
    /// `(|ζ|, |ξ|, dimension)` at the maximum.
    pub argmax: (f64, f64, usize),
}

/// `max(γ' 2^{γ'-1}, γ'(γ'-1) + γ')`
pub fn ldiff_cap(gamma_prime: f64) -> f64 {
    (gamma_prime * 2f64.powf(gamma_prime - 1.0))
        .max(gamma_prime * (gamma_prime - 1.0) + gamma_prime)
}

/// The ratio for one pair, with the numerator evaluated without
/// cancellation when `|ξ| ≪ |ζ|`.
pub fn ldiff_ratio(zeta: &[f64], xi: &[f64], gamma_prime: f64) -> f64 {
    let z2: f64 = zeta.iter().map(|v| v * v).sum();
    let x2: f64 = xi.iter().map(|v| v * v).sum();
    let dot: f64 = zeta.iter().zip(xi).map(|(a, b)| a * b).sum();
    let (zn, xn) = (z2.sqrt(), x2.sqrt());
    let num = if z2 == 0.0 {
        xn.powf(gamma_prime)
    } else {
        let log_ratio = 0.5 * ((2.0 * dot + x2) / z2).ln_1p();
        zn.powf(gamma_prime) * (gamma_prime * log_ratio).exp_m1()
    };
    num / (zn.powf(gamma_prime - 1.0) * xn + xn.powf(gamma_prime))
}

pub fn ldiff_constant(gamma_prime: f64, samples: usize, seed: u64) -> Result<LdiffReport> {
    if !(gamma_prime > 1.0 && gamma_prime < 2.0) {
        return Err(LabError::InvalidParameter(format!(
            "γ' must lie in (1, 2) (got {gamma_prime})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0, 1));
    let direction = |rng: &mut ChaCha8Rng, dim: usize| -> [f64; 3] {
        loop {
            let mut v = [0.0; 3];
            for c in v.iter_mut().take(dim) {
                *c = rng.gen_range(-1.0..1.0);
            }
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                return v.map(|c| c / n);
            }
        }
    };
    for _ in 0..samples {
        let dim = rng.gen_range(1..=3);
        let zn = 10f64.powf(rng.gen_range(-6.0..6.0));
        let xn = 10f64.powf(rng.gen_range(-6.0..6.0));
        let dz = direction(&mut rng, dim);
        let dxi = direction(&mut rng, dim);
        let zeta: Vec<f64> = dz[..dim].iter().map(|c| c * zn).collect();
        let xi: Vec<f64> = dxi[..dim].iter().map(|c| c * xn).collect();
        let r = ldiff_ratio(&zeta, &xi, gamma_prime);
        if r > best.0 {
            best = (r, (zn, xn, dim));
        }
    }
    Ok(LdiffReport {
        gamma_prime,
        samples,
        max_ratio: best.0,
        cap: ldiff_cap(gamma_prime),
        argmax: best.1,
    })
}
