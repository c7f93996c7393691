//! Hölder-type seminorms evaluated as suprema over grid-node pairs.
//!
//! Every evaluator enumerates pairs of active space-time nodes lying in a
//! cylinder `Q` and maximises `weight * (|u_a - u_b| / denominator)`:
//!
//! | kind        | pairs          | denominator                         | weight                  |
//! |-------------|----------------|-------------------------------------|-------------------------|
//! | classical   | all            | `(|x_a - x_b| + |t_a - t_b|^½)^α`    | `1`                     |
//! | weighted    | all            | as classical                        | `min(d_a, d_b)^c`       |
//! | nl_space    | same level     | `|x_a - x_b|^α`                     | `min(dα_a, dα_b)`       |
//! | nl_time     | same node      | `|t_a - t_b|^{α/2}`                 | `min(dα_a, dα_b)^{γ/2}` |
//!
//! where `d` and `dα` are the two parabolic distances to the backward
//! boundary of `Q` (see [`DistanceKind`]). Pairs are visited in a fixed
//! order (points sorted by `(level, node)`) and ties keep the
//! lexicographically smallest pair, so results do not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::grid::{
    gradient_field, hessian_frobenius, lq_norm_with, time_derivative, Cylinder, DistanceKind,
    ScalarField,
};

/// A space-time grid node taking part in a seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub node: usize,
    pub level: usize,
    pub x: [f64; 2],
    pub t: f64,
    pub value: f64,
    /// Distance `d` to the backward boundary of `Q`.
    pub dist: f64,
    /// Distance `d_alpha` to the backward boundary of `Q` (zero when unused).
    pub dist_alpha: f64,
}

/// How a supremum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Exact,
    /// Stratified random pairs; stratum `i` uses seed `seed + i`.
    Sampled {
        seed: u64,
        pairs: u64,
    },
    /// No admissible pair exists; the value is 0 by convention.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormValue {
    pub value: f64,
    pub argmax: Option<(SamplePoint, SamplePoint)>,
    pub regime: Regime,
    /// Whether an endpoint of the maximising pair lies on the backward
    /// parabolic boundary of `Q`.
    pub argmax_on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormOptions {
    /// Largest pair count enumerated exactly.
    pub pair_budget: u64,
    /// Total pairs drawn in the sampled regime.
    pub samples: u64,
    pub seed: u64,
    /// Enumerate exactly whatever the pair count.
    pub force_exact: bool,
}

impl Default for SeminormOptions {
    fn default() -> Self {
        Self {
            pair_budget: 100_000_000,
            samples: 20_000_000,
            seed: 42,
            force_exact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairKind {
    Classical,
    Weighted {
        c: f64,
    },
    NonlinearSpace,
    NonlinearTime {
        gamma: f64,
    },
    /// Unweighted same-level quotient `|Δu| / |Δx|^α`.
    SpaceQuotient,
    /// Unweighted same-node quotient `|Δu| / |Δt|^{α/2}`.
    TimeQuotient,
}

impl PairKind {
    fn same_level(&self) -> bool {
        matches!(self, PairKind::NonlinearSpace | PairKind::SpaceQuotient)
    }

    fn same_node(&self) -> bool {
        matches!(
            self,
            PairKind::NonlinearTime { .. } | PairKind::TimeQuotient
        )
    }
}

/// The seminorm quotient of one pair, exactly as the evaluators compute it.
pub fn pair_quotient(kind: PairKind, alpha: f64, a: &SamplePoint, b: &SamplePoint) -> f64 {
    let diff = (a.value - b.value).abs();
    let (u, v) = (a.x[0] - b.x[0], a.x[1] - b.x[1]);
    let euclid = (u * u + v * v).sqrt();
    let dt = (a.t - b.t).abs();
    match kind {
        PairKind::Classical => diff / (euclid + dt.sqrt()).powf(alpha),
        PairKind::Weighted { c } => {
            a.dist.min(b.dist).powf(c) * (diff / (euclid + dt.sqrt()).powf(alpha))
        }
        PairKind::NonlinearSpace => a.dist_alpha.min(b.dist_alpha) * (diff / euclid.powf(alpha)),
        PairKind::NonlinearTime { gamma } => {
            a.dist_alpha.min(b.dist_alpha).powf(gamma / 2.0) * (diff / dt.powf(alpha / 2.0))
        }
        PairKind::SpaceQuotient => diff / euclid.powf(alpha),
        PairKind::TimeQuotient => diff / dt.powf(alpha / 2.0),
    }
}

/// Active nodes of `u` inside `q`, sorted by `(level, node)`, with their
/// distances to the backward boundary of `q`. `dist_alpha` is filled when
/// `alpha_gamma` is given.
pub fn collect_points(
    u: &ScalarField,
    q: &Cylinder,
    alpha_gamma: Option<(f64, f64)>,
) -> Result<Vec<SamplePoint>> {
    let g = u.grid();
    if !g.contains_cylinder(q) {
        return Err(LabError::OutOfDomain(format!(
            "cylinder {q:?} is not contained in the field's grid"
        )));
    }
    let mut pts = Vec::new();
    for level in 0..g.n_levels() {
        let t = g.time(level);
        for node in g.active_nodes() {
            let x = g.coords(node);
            if !q.contains(&x, t) {
                continue;
            }
            let dist = q.parabolic_distance_unchecked(&x, t, DistanceKind::Standard);
            let dist_alpha = match alpha_gamma {
                Some((alpha, gamma)) => {
                    q.parabolic_distance_unchecked(&x, t, DistanceKind::Alpha { alpha, gamma })
                }
                None => 0.0,
            };
            pts.push(SamplePoint {
                node,
                level,
                x,
                t,
                value: u.get(level, node),
                dist,
                dist_alpha,
            });
        }
    }
    Ok(pts)
}

/// Index groups whose internal pairs are admissible for `kind`.
fn groups(kind: PairKind, pts: &[SamplePoint]) -> Vec<Vec<usize>> {
    if kind.same_level() {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            match out.last_mut() {
                Some(gr) if pts[gr[0]].level == p.level => gr.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    } else if kind.same_node() {
        let mut by_node: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, p) in pts.iter().enumerate() {
            by_node.entry(p.node).or_default().push(i);
        }
        by_node.into_values().collect()
    } else {
        vec![(0..pts.len()).collect()]
    }
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    i: usize,
    j: usize,
}

fn better(a: Best, b: Best) -> Best {
    if b.value > a.value || (b.value == a.value && (b.i, b.j) < (a.i, a.j)) {
        b
    } else {
        a
    }
}

const NO_PAIR: Best = Best {
    value: f64::NEG_INFINITY,
    i: usize::MAX,
    j: usize::MAX,
};

/// Supremum of `kind` over admissible pairs of `pts`.
pub fn evaluate_points(
    kind: PairKind,
    alpha: f64,
    pts: &[SamplePoint],
    opts: &SeminormOptions,
) -> SeminormValue {
    let grs = groups(kind, pts);
    let pair_count: u64 = grs
        .iter()
        .map(|g| (g.len() as u64) * (g.len() as u64).saturating_sub(1) / 2)
        .sum();
    if pair_count == 0 {
        return SeminormValue {
            value: 0.0,
            argmax: None,
            regime: Regime::Degenerate,
            argmax_on_boundary: false,
        };
    }
    let exact = opts.force_exact || pair_count <= opts.pair_budget;

    // flattened (group, position) rows so that rayon splits on first indices
    let rows: Vec<(usize, usize)> = grs
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..g.len()).map(move |p| (gi, p)))
        .collect();
    let per_row = if exact {
        0
    } else {
        opts.samples.div_ceil(rows.len() as u64).max(1)
    };

    let best = rows
        .par_iter()
        .map(|&(gi, p)| {
            let g = &grs[gi];
            let i = g[p];
            let mut best = NO_PAIR;
            if exact {
                for &j in &g[p + 1..] {
                    let v = pair_quotient(kind, alpha, &pts[i], &pts[j]);
                    best = better(best, Best { value: v, i, j });
                }
            } else if g.len() > 1 {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
                for _ in 0..per_row {
                    let mut k = rng.gen_range(0..g.len() - 1);
                    if k >= p {
                        k += 1;
                    }
                    let j = g[k];
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    let v = pair_quotient(kind, alpha, &pts[a], &pts[b]);
                    best = better(
                        best,
                        Best {
                            value: v,
                            i: a,
                            j: b,
                        },
                    );
                }
            }
            best
        })
        .reduce(|| NO_PAIR, better);

    let (a, b) = (pts[best.i], pts[best.j]);
    let on_boundary = a.dist <= 1e-12 || b.dist <= 1e-12;
    SeminormValue {
        value: best.value,
        argmax: Some((a, b)),
        regime: if exact {
            Regime::Exact
        } else {
            Regime::Sampled {
                seed: opts.seed,
                pairs: per_row * rows.len() as u64,
            }
        },
        argmax_on_boundary: on_boundary,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "Hölder exponent must lie in (0, 1] (got {alpha})"
        )));
    }
    Ok(())
}

/// Classical parabolic Hölder seminorm `[u]_{α;Q}`.
pub fn holder_seminorm(
    u: &ScalarField,
    alpha: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    let pts = collect_points(u, q, None)?;
    Ok(evaluate_points(PairKind::Classical, alpha, &pts, opts))
}

/// Weighted seminorm `[u]^c_{α;Q}` with weight `min(d_a, d_b)^c`.
pub fn weighted_holder(
    u: &ScalarField,
    alpha: f64,
    c: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    if !(c >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "weight exponent c must be nonnegative (got {c})"
        )));
    }
    let pts = collect_points(u, q, None)?;
    Ok(evaluate_points(PairKind::Weighted { c }, alpha, &pts, opts))
}

pub fn nonlinear_space(
    u: &ScalarField,
    alpha: f64,
    gamma: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    let pts = collect_points(u, q, Some((alpha, gamma)))?;
    Ok(evaluate_points(PairKind::NonlinearSpace, alpha, &pts, opts))
}

pub fn nonlinear_time(
    u: &ScalarField,
    alpha: f64,
    gamma: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    let pts = collect_points(u, q, Some((alpha, gamma)))?;
    Ok(evaluate_points(
        PairKind::NonlinearTime { gamma },
        alpha,
        &pts,
        opts,
    ))
}

/// `max(space, (time / z)^{2/γ})`.
pub fn combine_nonlinear(space: f64, time: f64, z: f64, gamma: f64) -> f64 {
    space.max((time / z).powf(2.0 / gamma))
}

pub fn nonlinear_combined(
    u: &ScalarField,
    alpha: f64,
    z: f64,
    gamma: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "z must be positive (got {z})"
        )));
    }
    let s = nonlinear_space(u, alpha, gamma, q, opts)?;
    let t = nonlinear_time(u, alpha, gamma, q, opts)?;
    Ok(combine_nonlinear(s.value, t.value, z, gamma))
}

/// Unweighted same-level quotient `sup |Δu| / |Δx|^α`.
pub fn space_quotient(
    u: &ScalarField,
    alpha: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    let pts = collect_points(u, q, None)?;
    Ok(evaluate_points(PairKind::SpaceQuotient, alpha, &pts, opts))
}

/// Unweighted same-node quotient `sup |Δu| / |Δt|^{α/2}`.
pub fn time_quotient(
    u: &ScalarField,
    alpha: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormValue> {
    check_alpha(alpha)?;
    let pts = collect_points(u, q, None)?;
    Ok(evaluate_points(PairKind::TimeQuotient, alpha, &pts, opts))
}

/// All seminorms of one field on one cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSet {
    pub alpha: f64,
    pub c: f64,
    pub z: f64,
    pub gamma: f64,
    pub classical: SeminormValue,
    pub weighted: SeminormValue,
    pub nl_space: SeminormValue,
    pub nl_time: SeminormValue,
    pub nl_combined: f64,
}

pub fn seminorm_set(
    u: &ScalarField,
    alpha: f64,
    c: f64,
    z: f64,
    gamma: f64,
    q: &Cylinder,
    opts: &SeminormOptions,
) -> Result<SeminormSet> {
    check_alpha(alpha)?;
    if !(c >= 0.0) || !(z > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "need c ≥ 0 and z > 0 (got c = {c}, z = {z})"
        )));
    }
    let pts = collect_points(u, q, Some((alpha, gamma)))?;
    let classical = evaluate_points(PairKind::Classical, alpha, &pts, opts);
    let weighted = evaluate_points(PairKind::Weighted { c }, alpha, &pts, opts);
    let nl_space = evaluate_points(PairKind::NonlinearSpace, alpha, &pts, opts);
    let nl_time = evaluate_points(PairKind::NonlinearTime { gamma }, alpha, &pts, opts);
    let nl_combined = combine_nonlinear(nl_space.value, nl_time.value, z, gamma);
    Ok(SeminormSet {
        alpha,
        c,
        z,
        gamma,
        classical,
        weighted,
        nl_space,
        nl_time,
        nl_combined,
    })
}

/// `L^q(Q')` norms of `∂t u`, `D²u` (Frobenius) and `|Du|^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W21qNorms {
    pub time_derivative: f64,
    pub hessian: f64,
    pub gradient_power: f64,
}

pub fn w21q_norms(u: &ScalarField, q: f64, gamma: f64, sub: &Cylinder) -> Result<W21qNorms> {
    let g = u.grid();
    let (dx, dt, r) = (g.dx(), g.dt(), g.half_width());
    let tol = 1e-9 * dx;
    let margin_ok = if g.spec().ball_mask {
        sub.center[0].hypot(sub.center[1]) + sub.radius <= r - 2.0 * dx + tol
    } else {
        (0..g.dim()).all(|k| sub.center[k].abs() + sub.radius <= r - 2.0 * dx + tol)
    };
    let ttol = 1e-9 * dt;
    if !margin_ok || sub.t_start < 2.0 * dt - ttol || sub.t_end > g.horizon() - 2.0 * dt + ttol {
        return Err(LabError::OutOfDomain(format!(
            "sub-cylinder {sub:?} must stay two nodes away from the grid boundary"
        )));
    }
    let n_levels = g.n_levels();
    let dtu: Vec<Vec<f64>> = (0..n_levels).map(|l| time_derivative(u, l)).collect();
    let hess: Vec<Vec<f64>> = (0..n_levels).map(|l| hessian_frobenius(u, l)).collect();
    let grad = gradient_field(u);
    Ok(W21qNorms {
        time_derivative: lq_norm_with(g, q, sub, |l, n| dtu[l][n])?,
        hessian: lq_norm_with(g, q, sub, |l, n| hess[l][n])?,
        gradient_power: lq_norm_with(g, q, sub, |l, n| {
            let p = grad.get(l, n);
            p[0].hypot(p[1]).powf(gamma)
        })?,
    })
}
