//! From a Hölder bound back to `W^{2,1}_q`: a field with `[v]_α` and `g`
//! controlled and `|-∂t v - Δv| ≤ c2 |Dv|^γ + g` has `∂t v`, `D²v` bounded
//! in `L^q` on the half cylinder, provided `α + (N+2)/q = 2`.

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{gradient_field, laplacian, lq_norm, time_derivative, Cylinder, ScalarField};
use crate::seminorm::{holder_seminorm, w21q_norms, SeminormOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub alpha: f64,
    pub g_norm: f64,
    pub holder: f64,
    /// `‖g‖_{q; Q_{2R}} + [v]_{α; Q_{2R}}`
    pub c1: f64,
    /// Smallest `c2` making the differential inequality hold at every
    /// interior node of `Q_{2R}` (infinite if it fails where `Dv = 0`).
    pub c2: f64,
    pub time_derivative: f64,
    pub hessian: f64,
    /// `‖∂t v‖_{q; Q_R} + ‖D²v‖_{q; Q_R}`: the realised constant.
    pub k: f64,
}

/// `Q_ρ = B_ρ × (0, ρ²)` on `v`'s grid; the inner cylinder starts two
/// time steps late so that one-sided differences stay inside.
pub fn interpolation_bound_check(
    v: &ScalarField,
    g: &ScalarField,
    q: f64,
    gamma: f64,
    radius: f64,
    opts: &SeminormOptions,
) -> Result<InterpolationReport> {
    v.same_grid(g)?;
    let grid = v.grid().clone();
    let e = Exponents::new(gamma, grid.dim())?;
    let alpha = e.alpha_for(q);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "α = 2 - (N+2)/q = {alpha} must lie in (0, 1) (q = {q})"
        )));
    }
    if !(radius > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "R must be positive (got {radius})"
        )));
    }
    let ball = grid.spec().ball_mask;
    let outer = Cylinder::centered(2.0 * radius, ball, 0.0, 4.0 * radius * radius);
    if !grid.contains_cylinder(&outer) {
        return Err(LabError::OutOfDomain(format!(
            "the grid must contain Q_2R = B_{} × (0, {})",
            2.0 * radius,
            outer.t_end
        )));
    }
    let origin = grid
        .node_at(&[0.0; 2])
        .ok_or_else(|| LabError::InvalidGrid("the origin is not a grid node".into()))?;
    if v.get(0, origin).abs() > 1e-12 {
        return Err(LabError::Precondition(format!(
            "v(0, 0) must vanish (got {})",
            v.get(0, origin)
        )));
    }

    let g_norm = lq_norm(g, q, &outer)?;
    let holder = holder_seminorm(v, alpha, &outer, opts)?.value;

    let grad = gradient_field(v);
    let mut c2: f64 = 0.0;
    for level in 0..grid.n_levels() {
        let t = grid.time(level);
        if t > outer.t_end + 1e-12 * outer.t_end {
            break;
        }
        let (dt, lap) = (time_derivative(v, level), laplacian(v, level));
        for node in grid.interior_nodes() {
            if !outer.contains(&grid.coords(node), t) {
                continue;
            }
            let excess = (-dt[node] - lap[node]).abs() - g.get(level, node);
            if excess > 0.0 {
                let p = grad.get(level, node);
                c2 = c2.max(excess / p[0].hypot(p[1]).powf(gamma));
            }
        }
    }

    let inner = Cylinder::centered(radius, ball, 2.0 * grid.dt(), radius * radius);
    let n = w21q_norms(v, q, gamma, &inner)?;
    Ok(InterpolationReport {
        alpha,
        g_norm,
        holder,
        c1: g_norm + holder,
        c2,
        time_derivative: n.time_derivative,
        hessian: n.hessian,
        k: n.time_derivative + n.hessian,
    })
}
