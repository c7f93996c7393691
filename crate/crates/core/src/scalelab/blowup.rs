//! Blow-up rescalings `w(y, s) = u(x̄ + r y, t̄ + λ s) / M` and the worst-pair
//! selection that drives them.
//!
//! For `-∂t u - σΔu + θ h|Du|^γ = f`, the rescaled `w` solves
//!
//! ```text
//! -∂s w - (σλ/r²) Δw + (θ M^{γ-1} λ / r^γ) h|Dw|^γ = (λ/M) f
//! ```
//!
//! with `λ = r^γ / M^{γ-1}` (variant `Alpha0`, the Hamiltonian keeps its
//! size and the viscosity becomes `σ_n = r^{γ-2}/M^{γ-1}`) or `λ = r²`
//! (variant `Alpha`, the viscosity stays and the Hamiltonian gains
//! `θ_n = M^{γ-1}/r^{γ-2}`).

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{lq_norm, Cylinder, Grid, GridSpec, ScalarField};
use crate::hj::{discrete_residual, HjProblem};
use crate::seminorm::{
    combine_nonlinear, nonlinear_space, nonlinear_time, pair_quotient, weighted_holder, PairKind,
    SamplePoint, SeminormOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Time scale `r^γ / M^{γ-1}`; vanishing viscosity.
    Alpha0,
    /// Parabolic time scale `r²`; growing Hamiltonian.
    Alpha,
}

/// Which branch of the point selection produced the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionCase {
    /// The space part of the nonlinear seminorm dominates.
    Space,
    /// The time part dominates.
    Time,
    /// Weighted parabolic seminorm.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupParams {
    pub base: ([f64; 2], f64),
    /// The second point of the selected pair, if any.
    pub partner: Option<([f64; 2], f64)>,
    pub amplitude: f64,
    pub length: f64,
    pub variant: Variant,
    pub gamma: f64,
    pub z: f64,
    /// Distance of the base point to the boundary.
    pub distance: f64,
    pub case: Option<SelectionCase>,
    /// Rescaled time attached to level 0 of the target grid (≤ 0 when the
    /// partner precedes the base point).
    pub time_origin: f64,
}

impl BlowupParams {
    pub fn new(
        variant: Variant,
        base: ([f64; 2], f64),
        amplitude: f64,
        length: f64,
        gamma: f64,
    ) -> Result<Self> {
        Exponents::new(gamma, 1)?;
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "amplitude M must be positive (got {amplitude})"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "length r must be positive (got {length})"
            )));
        }
        Ok(Self {
            base,
            partner: None,
            amplitude,
            length,
            variant,
            gamma,
            z: 1.0,
            distance: f64::NAN,
            case: None,
            time_origin: 0.0,
        })
    }

    /// `λ`, the factor from rescaled to original time.
    pub fn time_scale(&self) -> f64 {
        match self.variant {
            Variant::Alpha0 => self.length.powf(self.gamma) / self.amplitude.powf(self.gamma - 1.0),
            Variant::Alpha => self.length * self.length,
        }
    }

    /// `σ_n = r^{γ-2} / M^{γ-1}` (variant `Alpha0` only).
    pub fn sigma_n(&self) -> Option<f64> {
        (self.variant == Variant::Alpha0)
            .then(|| self.length.powf(self.gamma - 2.0) / self.amplitude.powf(self.gamma - 1.0))
    }

    /// `θ_n = M^{γ-1} / r^{γ-2}` (variant `Alpha` only).
    pub fn theta_n(&self) -> Option<f64> {
        (self.variant == Variant::Alpha)
            .then(|| self.amplitude.powf(self.gamma - 1.0) / self.length.powf(self.gamma - 2.0))
    }

    /// Original coordinates of the rescaled grid point `(y, s_grid)`.
    pub fn to_original(&self, y: &[f64; 2], s_grid: f64) -> ([f64; 2], f64) {
        let (xb, tb) = self.base;
        let r = self.length;
        (
            [xb[0] + r * y[0], xb[1] + r * y[1]],
            tb + self.time_scale() * (s_grid + self.time_origin),
        )
    }

    /// Rescaled grid coordinates of the original point `(x, t)`.
    pub fn to_rescaled(&self, x: &[f64; 2], t: f64) -> ([f64; 2], f64) {
        let (xb, tb) = self.base;
        let r = self.length;
        (
            [(x[0] - xb[0]) / r, (x[1] - xb[1]) / r],
            (t - tb) / self.time_scale() - self.time_origin,
        )
    }
}

impl BlowupParams {
    /// Largest rescaled half-width and horizon whose image stays inside a
    /// source lattice described by `source`.
    pub fn admissible_extent(&self, source: &GridSpec) -> (f64, f64) {
        let (xb, tb) = self.base;
        let room = (0..source.dim)
            .map(|k| source.half_width - xb[k].abs())
            .fold(f64::INFINITY, f64::min);
        let radius = room / self.length;
        let horizon = (source.horizon - tb) / self.time_scale() - self.time_origin;
        (radius, horizon)
    }

    /// An origin-centred target lattice with steps `dx`, `dt` that fits in
    /// `source` and, when possible, reaches the partner point.
    pub fn fit_target(&self, source: &GridSpec, dx: f64, dt: f64) -> Result<GridSpec> {
        let (r_max, h_max) = self.admissible_extent(source);
        let cells = (r_max / dx * (1.0 + 1e-12)).floor();
        if cells < 2.0 {
            return Err(LabError::OutOfDomain(format!(
                "no target of step {dx} fits: admissible half-width {r_max}"
            )));
        }
        let needed = self
            .partner
            .map(|(x, t)| self.to_rescaled(&x, t).1)
            .unwrap_or(0.0)
            .max(-self.time_origin);
        let wanted = (needed / dt * (1.0 - 1e-12)).ceil().max(2.0);
        let fits = (h_max / dt * (1.0 + 1e-12)).floor();
        let steps = wanted.min(fits);
        if steps < 2.0 {
            return Err(LabError::OutOfDomain(format!(
                "no target of step {dt} fits: admissible horizon {h_max}"
            )));
        }
        Ok(GridSpec::new(source.dim, cells * dx, dx, steps * dt, dt)
            .with_ball_mask(source.ball_mask))
    }
}

/// A rescaled field with the data of its equation.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub params: BlowupParams,
    pub w: ScalarField,
    pub g: ScalarField,
    /// `h` sampled at the preimage points.
    pub h: ScalarField,
    /// Viscosity of the rescaled equation.
    pub sigma: f64,
    /// Factor in front of `h|Dw|^γ` in the rescaled equation.
    pub hamiltonian_scale: f64,
}

fn sample(
    field: &ScalarField,
    params: &BlowupParams,
    target: &Arc<Grid>,
    scale: f64,
) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(target.clone());
    for level in 0..target.n_levels() {
        let s = target.time(level);
        for node in target.active_nodes() {
            let (x, t) = params.to_original(&target.coords(node), s);
            let v = field.interpolate(&x, t).ok_or_else(|| {
                LabError::OutOfDomain(format!(
                    "node {node} at level {level} maps to ({:?}, {t}), outside the source grid",
                    &x[..target.dim()]
                ))
            })?;
            out.set(level, node, scale * v);
        }
    }
    Ok(out)
}

/// Samples `u`, `f = p.rhs` and `h = p.h` on `target` through the change of
/// variables.
pub fn blowup_transform(
    u: &ScalarField,
    p: &HjProblem,
    params: &BlowupParams,
    target: Arc<Grid>,
) -> Result<Rescaled> {
    u.same_grid(&p.rhs)?;
    if target.dim() != u.grid().dim() {
        return Err(LabError::GridMismatch(
            "target grid has another dimension".into(),
        ));
    }
    let (m, r, lambda) = (params.amplitude, params.length, params.time_scale());
    let w = sample(u, params, &target, 1.0 / m)?;
    let g = sample(&p.rhs, params, &target, lambda / m)?;
    let h = sample(&p.h, params, &target, 1.0)?;
    Ok(Rescaled {
        params: *params,
        w,
        g,
        h,
        sigma: p.sigma * lambda / (r * r),
        hamiltonian_scale: p.hamiltonian_scale * m.powf(params.gamma - 1.0) * lambda
            / r.powf(params.gamma),
    })
}

/// `u(x, t) = M w((x - x̄)/r, (t - t̄)/λ)` sampled on `target`.
pub fn blowup_inverse(
    w: &ScalarField,
    params: &BlowupParams,
    target: Arc<Grid>,
) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(target.clone());
    for level in 0..target.n_levels() {
        let t = target.time(level);
        for node in target.active_nodes() {
            let (y, s) = params.to_rescaled(&target.coords(node), t);
            let v = w.interpolate(&y, s).ok_or_else(|| {
                LabError::OutOfDomain(format!(
                    "node {node} at level {level} maps to ({:?}, {s}), outside the rescaled grid",
                    &y[..target.dim()]
                ))
            })?;
            out.set(level, node, params.amplitude * v);
        }
    }
    Ok(out)
}

/// Both sides of `‖g_n‖_{q0; Q_{R,τ}} = σ_n^{γ'(N+1)/(N+2)} ‖f‖_{q0; preimage}`
/// with `f` the original right-hand side (variant `Alpha0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIdentity {
    pub rescaled: f64,
    pub original_scaled: f64,
}

pub fn norm_identity(resc: &Rescaled, f: &ScalarField) -> Result<NormIdentity> {
    let p = &resc.params;
    let sigma_n = p.sigma_n().ok_or_else(|| {
        LabError::InvalidParameter("the norm identity belongs to the Alpha0 variant".into())
    })?;
    let target = resc.g.grid();
    let e = Exponents::new(p.gamma, target.dim())?;
    let q0 = e.q0();
    let spec = target.spec();
    let inner = Cylinder::centered(spec.half_width, spec.ball_mask, 0.0, spec.horizon);
    let lhs = lq_norm(&resc.g, q0, &inner)?;
    let (t0, t1) = (
        p.to_original(&[0.0; 2], 0.0).1,
        p.to_original(&[0.0; 2], spec.horizon).1,
    );
    let pre = Cylinder {
        center: p.base.0,
        radius: spec.half_width * p.length,
        ball: spec.ball_mask,
        t_start: t0,
        t_end: t1,
    };
    let rhs = sigma_n.powf(e.sigma_power()) * lq_norm(f, q0, &pre)?;
    Ok(NormIdentity {
        rescaled: lhs,
        original_scaled: rhs,
    })
}

/// Interior residual of the rescaled equation with the solver's discrete
/// operator.
pub fn rescaled_residual(resc: &Rescaled, gamma: f64) -> Result<ScalarField> {
    discrete_residual(
        &resc.w,
        &resc.g,
        &resc.h,
        resc.sigma,
        gamma,
        resc.hamiltonian_scale,
    )
}

/// `|w(y0, s0) - w(0, 0)|` at the rescaled partner point: 1 for the space
/// and weighted cases, `z` for the time case.
pub fn normalization_check(w: &ScalarField, params: &BlowupParams) -> Result<f64> {
    let (px, pt) = params
        .partner
        .ok_or_else(|| LabError::InvalidParameter("parameters carry no partner point".into()))?;
    let (y0, s0) = params.to_rescaled(&px, pt);
    let (yb, sb) = params.to_rescaled(&params.base.0, params.base.1);
    let at = |y: &[f64; 2], s: f64| {
        w.interpolate(y, s).ok_or_else(|| {
            LabError::OutOfDomain(format!("rescaled point ({y:?}, {s}) is off the grid"))
        })
    };
    Ok((at(&y0, s0)? - at(&yb, sb)?).abs())
}

/// Which seminorm drives the selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionKind {
    /// `⟦u⟧_{α,z}`: the space/time nonlinear seminorm.
    Nonlinear { alpha: f64, z: f64 },
    /// `[u]^{α-α0}_α`: the weighted parabolic seminorm.
    Weighted { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub params: BlowupParams,
    pub seminorm: f64,
    /// `L = seminorm / 2`
    pub half: f64,
    /// The selected quotient recomputed from `(d, M, r)`.
    pub quotient: f64,
    /// `L ≤ quotient ≤ 2L`
    pub sandwich: bool,
}

fn order_by<'a>(
    a: &'a SamplePoint,
    b: &'a SamplePoint,
    key: impl Fn(&SamplePoint) -> f64,
) -> (&'a SamplePoint, &'a SamplePoint) {
    if key(b) < key(a) {
        (b, a)
    } else {
        (a, b)
    }
}

/// Picks the pair realising the seminorm and derives the blow-up parameters
/// from it.
pub fn worst_pair_selection(
    u: &ScalarField,
    kind: SelectionKind,
    gamma: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<Selection> {
    let e = Exponents::new(gamma, u.grid().dim())?;
    let constant = || LabError::Precondition("u is constant on the cylinder".into());
    match kind {
        SelectionKind::Nonlinear { alpha, z } => {
            if !(z >= 1.0) {
                return Err(LabError::InvalidParameter(format!(
                    "z must be ≥ 1 (got {z})"
                )));
            }
            let space = nonlinear_space(u, alpha, gamma, q, opts)?;
            let time = nonlinear_time(u, alpha, gamma, q, opts)?;
            let value = combine_nonlinear(space.value, time.value, z, gamma);
            if !(value > 0.0) {
                return Err(constant());
            }
            let half = value / 2.0;
            let time_part = (time.value / z).powf(2.0 / gamma);
            if space.value >= time_part {
                let (a, b) = space.argmax.ok_or_else(constant)?;
                let (base, partner) = order_by(&a, &b, |p| p.dist_alpha);
                let m = (a.value - b.value).abs();
                let (du, dv) = (a.x[0] - b.x[0], a.x[1] - b.x[1]);
                let r = (du * du + dv * dv).sqrt();
                let quotient = base.dist_alpha.min(partner.dist_alpha) * (m / r.powf(alpha));
                debug_assert_eq!(
                    quotient,
                    pair_quotient(PairKind::NonlinearSpace, alpha, &a, &b)
                );
                let mut params = BlowupParams::new(Variant::Alpha0, (base.x, base.t), m, r, gamma)?;
                params.partner = Some((partner.x, partner.t));
                params.z = z;
                params.distance = q.spatial_distance(&base.x);
                params.case = Some(SelectionCase::Space);
                Ok(Selection {
                    params,
                    seminorm: value,
                    half,
                    quotient,
                    sandwich: half <= quotient && quotient <= 2.0 * half,
                })
            } else {
                let (a, b) = time.argmax.ok_or_else(constant)?;
                let (base, partner) = order_by(&a, &b, |p| p.t);
                let m = (a.value - b.value).abs() / z;
                let gap = partner.t - base.t;
                let r = gap.powf(1.0 / gamma) * m.powf((gamma - 1.0) / gamma);
                let d_alpha = base.dist_alpha.min(partner.dist_alpha);
                let quotient = d_alpha * m.powf(e.case_b_amplitude_power(alpha)) / r.powf(alpha);
                let mut params = BlowupParams::new(Variant::Alpha0, (base.x, base.t), m, r, gamma)?;
                params.partner = Some((partner.x, partner.t));
                params.z = z;
                params.distance = q.spatial_distance(&base.x);
                params.case = Some(SelectionCase::Time);
                // the two algebraic forms of the time quotient agree to rounding
                let tol = 1e-12 * value;
                Ok(Selection {
                    params,
                    seminorm: value,
                    half,
                    quotient,
                    sandwich: half <= quotient && quotient <= 2.0 * half + tol,
                })
            }
        }
        SelectionKind::Weighted { alpha } => {
            let c = alpha - e.alpha0();
            if c < 0.0 {
                return Err(LabError::InvalidParameter(format!(
                    "α = {alpha} is below α0 = {}",
                    e.alpha0()
                )));
            }
            let sv = weighted_holder(u, alpha, c, q, opts)?;
            if !(sv.value > 0.0) {
                return Err(constant());
            }
            let (a, b) = sv.argmax.ok_or_else(constant)?;
            let (base, partner) = order_by(&a, &b, |p| p.dist);
            let m = (a.value - b.value).abs();
            let (du, dv) = (a.x[0] - b.x[0], a.x[1] - b.x[1]);
            let euclid = (du * du + dv * dv).sqrt();
            let dt = (a.t - b.t).abs();
            let r = euclid + dt.sqrt();
            let quotient = a.dist.min(b.dist).powf(c) * (m / r.powf(alpha));
            let mut params = BlowupParams::new(Variant::Alpha, (base.x, base.t), m, r, gamma)?;
            params.partner = Some((partner.x, partner.t));
            params.distance = base.dist;
            params.case = Some(SelectionCase::Weighted);
            params.time_origin = ((partner.t - base.t) / (r * r)).min(0.0);
            let half = sv.value / 2.0;
            Ok(Selection {
                params,
                seminorm: sv.value,
                half,
                quotient,
                sandwich: half <= quotient && quotient <= 2.0 * half,
            })
        }
    }
}
