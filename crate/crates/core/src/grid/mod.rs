//! Space-time discretization.
//!
//! A [`Grid`] is a uniform Cartesian lattice on the box `[-R, R]^N`
//! (optionally masked to the open ball `|x| < R`) times the time levels
//! `t_n = n dt`, `n = 0..=T/dt`. Nodes whose `2N` lattice neighbours are all
//! active are *interior*; the remaining active nodes are *boundary* nodes and
//! carry Dirichlet data in the solvers.

mod field;
mod ops;

pub use field::{ScalarField, VectorField};
pub(crate) use ops::{central_gradient_slice, godunov_slice, laplacian_slice, lq_norm_with};
pub use ops::{
    gradient_central, gradient_field, gradient_godunov, hessian_frobenius, laplacian, lq_norm,
    time_derivative,
};

use crate::error::{LabError, Result};

const INTEGER_TOL: f64 = 1e-9;
pub(crate) const NONE: usize = usize::MAX;

/// Parameters of a space-time lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Space dimension, 1 or 2.
    pub dim: usize,
    /// Spatial half-width `R`.
    pub half_width: f64,
    pub dx: f64,
    /// Time horizon `T` (or `tau`).
    pub horizon: f64,
    pub dt: f64,
    /// Restrict the active nodes to the open ball `|x| < R`.
    pub ball_mask: bool,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, dx: f64, horizon: f64, dt: f64) -> Self {
        Self {
            dim,
            half_width,
            dx,
            horizon,
            dt,
            ball_mask: false,
        }
    }

    pub fn with_ball_mask(mut self, ball: bool) -> Self {
        self.ball_mask = ball;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidGrid(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dimension N must be 1 or 2 (got {})", self.dim));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return bad("Δx must be positive".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("Δt must be positive".into());
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return bad("R must be positive".into());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad("T must be positive".into());
        }
        let cells = 2.0 * self.half_width / self.dx;
        if (cells - cells.round()).abs() > INTEGER_TOL * cells.max(1.0) || cells.round() < 4.0 {
            return bad(format!(
                "2R/Δx must be an integer ≥ 4 (R = {}, Δx = {})",
                self.half_width, self.dx
            ));
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > INTEGER_TOL * steps.max(1.0) || steps.round() < 2.0 {
            return bad(format!(
                "T/Δt must be an integer ≥ 2 (T = {}, Δt = {})",
                self.horizon, self.dt
            ));
        }
        Ok(())
    }

    pub fn nodes_per_axis(&self) -> usize {
        (2.0 * self.half_width / self.dx).round() as usize + 1
    }

    pub fn n_levels(&self) -> usize {
        (self.horizon / self.dt).round() as usize + 1
    }

    /// The whole space-time cylinder covered by this spec.
    pub fn cylinder(&self) -> Cylinder {
        Cylinder {
            center: [0.0; 2],
            radius: self.half_width,
            ball: self.ball_mask,
            t_start: 0.0,
            t_end: self.horizon,
        }
    }
}

/// An active node on the spatial boundary together with its outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub node: usize,
    pub normal: [f64; 2],
}

/// A validated lattice with precomputed coordinates, masks and neighbours.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    n_axis: usize,
    n_space: usize,
    n_levels: usize,
    center_index: f64,
    coords: Vec<[f64; 2]>,
    active: Vec<bool>,
    interior: Vec<bool>,
    /// Lattice neighbours: slot `2k` is the minus neighbour along axis `k`,
    /// `2k + 1` the plus neighbour; `NONE` when missing or inactive.
    nbr: Vec<[usize; 4]>,
    boundary: Vec<BoundaryNode>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n_axis = spec.nodes_per_axis();
        let n_space = n_axis.pow(spec.dim as u32);
        let n_levels = spec.n_levels();
        let center_index = (n_axis - 1) as f64 / 2.0;
        let r = spec.half_width;
        let tol = 1e-9 * spec.dx;

        let mut coords = Vec::with_capacity(n_space);
        for node in 0..n_space {
            let (i, j) = (node % n_axis, node / n_axis);
            let x0 = (i as f64 - center_index) * spec.dx;
            let x1 = if spec.dim == 2 {
                (j as f64 - center_index) * spec.dx
            } else {
                0.0
            };
            coords.push([x0, x1]);
        }
        let active: Vec<bool> = coords
            .iter()
            .map(|x| !spec.ball_mask || (x[0] * x[0] + x[1] * x[1]).sqrt() < r - tol)
            .collect();

        let mut nbr = vec![[NONE; 4]; n_space];
        for node in 0..n_space {
            if !active[node] {
                continue;
            }
            let (i, j) = (node % n_axis, node / n_axis);
            let mut link = |slot: usize, other: Option<usize>| {
                if let Some(o) = other {
                    if active[o] {
                        nbr[node][slot] = o;
                    }
                }
            };
            link(0, (i > 0).then(|| node - 1));
            link(1, (i + 1 < n_axis).then(|| node + 1));
            if spec.dim == 2 {
                link(2, (j > 0).then(|| node - n_axis));
                link(3, (j + 1 < n_axis).then(|| node + n_axis));
            }
        }
        let interior: Vec<bool> = (0..n_space)
            .map(|n| active[n] && nbr[n][..2 * spec.dim].iter().all(|&o| o != NONE))
            .collect();

        let mut boundary = Vec::new();
        for node in 0..n_space {
            if !active[node] || interior[node] {
                continue;
            }
            let x = coords[node];
            let normal = if spec.ball_mask {
                let norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if norm > 0.0 {
                    [x[0] / norm, x[1] / norm]
                } else {
                    [1.0, 0.0]
                }
            } else {
                let mut v = [0.0; 2];
                for k in 0..spec.dim {
                    if (x[k].abs() - r).abs() <= tol {
                        v[k] = x[k].signum();
                    }
                }
                let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
                [v[0] / norm, v[1] / norm]
            };
            boundary.push(BoundaryNode { node, normal });
        }

        Ok(Self {
            spec,
            n_axis,
            n_space,
            n_levels,
            center_index,
            coords,
            active,
            interior,
            nbr,
            boundary,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx
    }

    pub fn dt(&self) -> f64 {
        self.spec.dt
    }

    pub fn half_width(&self) -> f64 {
        self.spec.half_width
    }

    pub fn horizon(&self) -> f64 {
        self.spec.horizon
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n_axis
    }

    /// Number of lattice nodes per time level (active or not).
    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.spec.dt
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.interior[node]
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_space).filter(move |&n| self.active[n])
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_space).filter(move |&n| self.interior[n])
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Minus/plus neighbour of `node` along `axis`, if active.
    pub fn neighbor(&self, node: usize, axis: usize, plus: bool) -> Option<usize> {
        let o = self.nbr[node][2 * axis + plus as usize];
        (o != NONE).then_some(o)
    }

    pub(crate) fn raw_neighbors(&self, node: usize) -> &[usize; 4] {
        &self.nbr[node]
    }

    /// Lattice node at integer offsets from `node`, ignoring the mask.
    pub(crate) fn offset(&self, node: usize, di: isize, dj: isize) -> Option<usize> {
        let n = self.n_axis as isize;
        let (i, j) = ((node % self.n_axis) as isize, (node / self.n_axis) as isize);
        let (a, b) = (i + di, j + dj);
        let rows = if self.spec.dim == 1 { 1 } else { n };
        if a < 0 || a >= n || b < 0 || b >= rows {
            return None;
        }
        Some((a + b * n) as usize)
    }

    /// Euclidean distance from the node to the spatial boundary of the domain.
    pub fn boundary_distance(&self, node: usize) -> f64 {
        self.spec.cylinder().spatial_distance(&self.coords[node])
    }

    /// Active node closest to `x`.
    pub fn nearest_node(&self, x: &[f64; 2]) -> Option<usize> {
        self.active_nodes().min_by(|&a, &b| {
            let da = dist2(&self.coords[a], x);
            let db = dist2(&self.coords[b], x);
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
    }

    /// Node with exactly these coordinates (up to rounding), if it exists.
    pub fn node_at(&self, x: &[f64; 2]) -> Option<usize> {
        let mut idx = [0usize; 2];
        for k in 0..self.spec.dim {
            let f = snap(x[k] / self.spec.dx + self.center_index);
            if (f - f.round()).abs() > 0.0 || f < 0.0 || f > (self.n_axis - 1) as f64 {
                return None;
            }
            idx[k] = f as usize;
        }
        Some(idx[0] + idx[1] * self.n_axis)
    }

    /// Level with time exactly `t` (up to rounding), if it exists.
    pub fn level_at(&self, t: f64) -> Option<usize> {
        let f = snap(t / self.spec.dt);
        if (f - f.round()).abs() > 0.0 || f < 0.0 || f > (self.n_levels - 1) as f64 {
            return None;
        }
        Some(f as usize)
    }

    /// Fractional lattice index along an axis, snapped to integers within
    /// rounding noise so that node coordinates map back exactly.
    pub(crate) fn fractional_index(&self, x: f64) -> f64 {
        snap(x / self.spec.dx + self.center_index)
    }

    pub(crate) fn fractional_level(&self, t: f64) -> f64 {
        snap(t / self.spec.dt)
    }

    /// Quadrature weight of a space-time node restricted to `sub`.
    ///
    /// Each node is the midpoint of its dual cell `x ± dx/2`, `t ± dt/2`; the
    /// weight is the measure of that cell clipped to the grid and to `sub`.
    /// A sub-cylinder with `t_start == t_end` selects a single time slab and
    /// integrates in space only.
    pub fn quadrature_weight(&self, node: usize, level: usize, sub: &Cylinder) -> f64 {
        if !self.active[node] {
            return 0.0;
        }
        let x = self.coords[node];
        let h = 0.5 * self.spec.dx;
        let r = self.spec.half_width;
        let mut w = 1.0;
        for k in 0..self.spec.dim {
            let (mut lo, mut hi) = (-r, r);
            if !sub.ball {
                lo = lo.max(sub.center[k] - sub.radius);
                hi = hi.min(sub.center[k] + sub.radius);
            }
            w *= overlap(x[k] - h, x[k] + h, lo, hi);
        }
        if sub.ball && dist2(&x, &sub.center).sqrt() > sub.radius + 1e-9 * self.spec.dx {
            return 0.0;
        }
        let t = self.time(level);
        let tw = if sub.t_start == sub.t_end {
            if (t - sub.t_start).abs() <= 1e-9 * self.spec.dt {
                1.0
            } else {
                0.0
            }
        } else {
            let hdt = 0.5 * self.spec.dt;
            overlap(
                t - hdt,
                t + hdt,
                sub.t_start.max(0.0),
                sub.t_end.min(self.spec.horizon),
            )
        };
        w * tw
    }

    /// Whether `sub` lies inside the grid cylinder (within rounding).
    pub fn contains_cylinder(&self, sub: &Cylinder) -> bool {
        let tol = 1e-9 * self.spec.dx;
        let r = self.spec.half_width;
        let spatial_ok = if self.spec.ball_mask {
            dist2(&sub.center, &[0.0; 2]).sqrt() + sub.radius <= r + tol
        } else if sub.ball {
            (0..self.spec.dim).all(|k| sub.center[k].abs() + sub.radius <= r + tol)
        } else {
            (0..self.spec.dim).all(|k| sub.center[k].abs() + sub.radius <= r + tol)
        };
        let ttol = 1e-9 * self.spec.dt;
        spatial_ok
            && sub.t_start >= -ttol
            && sub.t_end <= self.spec.horizon + ttol
            && sub.t_start <= sub.t_end
    }
}

/// A space-time cylinder `Omega x [t_start, t_end]` where `Omega` is a box
/// `|x_k - c_k| <= r` or a ball `|x - c| <= r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub center: [f64; 2],
    pub radius: f64,
    pub ball: bool,
    pub t_start: f64,
    pub t_end: f64,
}

/// Which parabolic distance to the backward boundary to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// `d(x, dOmega) + |b - t|^{1/2}`
    Standard,
    /// `d(x, dOmega)^alpha + |b - t|^{alpha / gamma}`
    Alpha { alpha: f64, gamma: f64 },
}

impl Cylinder {
    /// `B_r(0) x (t_start, t_end)` (or the box of half-width `r`).
    pub fn centered(radius: f64, ball: bool, t_start: f64, t_end: f64) -> Self {
        Self {
            center: [0.0; 2],
            radius,
            ball,
            t_start,
            t_end,
        }
    }

    /// Signed distance from `x` to the spatial boundary (negative outside).
    pub fn spatial_distance(&self, x: &[f64; 2]) -> f64 {
        if self.ball {
            self.radius - dist2(x, &self.center).sqrt()
        } else {
            let m = (x[0] - self.center[0])
                .abs()
                .max((x[1] - self.center[1]).abs());
            self.radius - m
        }
    }

    pub fn contains(&self, x: &[f64; 2], t: f64) -> bool {
        let tol = 1e-12 * self.radius.max(1.0);
        self.spatial_distance(x) >= -tol
            && t >= self.t_start - 1e-12 * self.t_end.abs().max(1.0)
            && t <= self.t_end + 1e-12 * self.t_end.abs().max(1.0)
    }

    /// Distance from `(x, t)` to the backward parabolic boundary
    /// `dOmega x (a, b) ∪ Omega x {b}`.
    pub fn parabolic_distance(&self, x: &[f64; 2], t: f64, kind: DistanceKind) -> Result<f64> {
        if !self.contains(x, t) {
            return Err(LabError::OutOfDomain(format!(
                "point ({:?}, {t}) lies outside the cylinder",
                x
            )));
        }
        Ok(self.parabolic_distance_unchecked(x, t, kind))
    }

    pub(crate) fn parabolic_distance_unchecked(
        &self,
        x: &[f64; 2],
        t: f64,
        kind: DistanceKind,
    ) -> f64 {
        let d = self.spatial_distance(x).max(0.0);
        let gap = (self.t_end - t).abs();
        match kind {
            DistanceKind::Standard => d + gap.sqrt(),
            DistanceKind::Alpha { alpha, gamma } => d.powf(alpha) + gap.powf(alpha / gamma),
        }
    }
}

pub(crate) fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let (u, v) = (a[0] - b[0], a[1] - b[1]);
    u * u + v * v
}

fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

fn snap(f: f64) -> f64 {
    let r = f.round();
    if (f - r).abs() < 1e-9 {
        r
    } else {
        f
    }
}
