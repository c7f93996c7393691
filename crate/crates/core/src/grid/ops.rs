//! Finite differences and quadrature on a [`Grid`].

use super::{Cylinder, Grid, ScalarField, VectorField, NONE};
use crate::error::{LabError, Result};

/// Central differences at interior nodes, one-sided where a neighbour is
/// missing, zero along axes with no active neighbour at all.
pub(crate) fn central_gradient_slice(grid: &Grid, u: &[f64], out: &mut [[f64; 2]]) {
    let dx = grid.dx();
    for node in 0..grid.n_space() {
        out[node] = [0.0; 2];
        if !grid.is_active(node) {
            continue;
        }
        let nb = grid.raw_neighbors(node);
        for k in 0..grid.dim() {
            let (m, p) = (nb[2 * k], nb[2 * k + 1]);
            out[node][k] = match (m != NONE, p != NONE) {
                (true, true) => (u[p] - u[m]) / (2.0 * dx),
                (false, true) => (u[p] - u[node]) / dx,
                (true, false) => (u[node] - u[m]) / dx,
                (false, false) => 0.0,
            };
        }
    }
}

/// Godunov upwind magnitude for a Hamiltonian increasing in `|p|`:
/// per axis `max((D-u)^+, (-D+u)^+)`, combined in the Euclidean norm.
pub(crate) fn godunov_slice(grid: &Grid, u: &[f64], out: &mut [f64]) {
    let dx = grid.dx();
    for node in 0..grid.n_space() {
        out[node] = 0.0;
        if !grid.is_active(node) {
            continue;
        }
        let nb = grid.raw_neighbors(node);
        let mut sq = 0.0;
        for k in 0..grid.dim() {
            let (m, p) = (nb[2 * k], nb[2 * k + 1]);
            let back = if m != NONE {
                ((u[node] - u[m]) / dx).max(0.0)
            } else {
                0.0
            };
            let fwd = if p != NONE {
                ((u[node] - u[p]) / dx).max(0.0)
            } else {
                0.0
            };
            let g = back.max(fwd);
            sq += g * g;
        }
        out[node] = sq.sqrt();
    }
}

/// `(2N+1)`-point Laplacian at interior nodes, zero elsewhere.
pub(crate) fn laplacian_slice(grid: &Grid, u: &[f64], out: &mut [f64]) {
    let inv = 1.0 / (grid.dx() * grid.dx());
    for node in 0..grid.n_space() {
        out[node] = 0.0;
        if !grid.is_interior(node) {
            continue;
        }
        let nb = grid.raw_neighbors(node);
        let mut s = 0.0;
        for k in 0..grid.dim() {
            s += u[nb[2 * k]] - 2.0 * u[node] + u[nb[2 * k + 1]];
        }
        out[node] = s * inv;
    }
}

pub fn gradient_central(u: &ScalarField, level: usize) -> VectorField {
    let grid = u.grid().clone();
    let mut out = VectorField::zeros(grid.clone());
    let mut tmp = vec![[0.0; 2]; grid.n_space()];
    central_gradient_slice(&grid, u.level(level), &mut tmp);
    out.level_mut(level).copy_from_slice(&tmp);
    out
}

/// Central gradient at every level.
pub fn gradient_field(u: &ScalarField) -> VectorField {
    let grid = u.grid().clone();
    let mut out = VectorField::zeros(grid.clone());
    for level in 0..grid.n_levels() {
        central_gradient_slice(&grid, u.level(level), out.level_mut(level));
    }
    out
}

/// Per-node Godunov gradient magnitude at one level.
pub fn gradient_godunov(u: &ScalarField, level: usize) -> Vec<f64> {
    let mut out = vec![0.0; u.grid().n_space()];
    godunov_slice(u.grid(), u.level(level), &mut out);
    out
}

pub fn laplacian(u: &ScalarField, level: usize) -> Vec<f64> {
    let mut out = vec![0.0; u.grid().n_space()];
    laplacian_slice(u.grid(), u.level(level), &mut out);
    out
}

/// Time derivative at one level: central between neighbouring levels,
/// one-sided at the first and last level.
pub fn time_derivative(u: &ScalarField, level: usize) -> Vec<f64> {
    let g = u.grid();
    let last = g.n_levels() - 1;
    let (a, b, span) = match level {
        0 => (0, 1, g.dt()),
        l if l == last => (l - 1, l, g.dt()),
        l => (l - 1, l + 1, 2.0 * g.dt()),
    };
    let (ua, ub) = (u.level(a), u.level(b));
    (0..g.n_space()).map(|n| (ub[n] - ua[n]) / span).collect()
}

/// Frobenius norm of the second-difference Hessian at interior nodes.
/// Mixed derivatives use the four diagonal neighbours when all are active.
pub fn hessian_frobenius(u: &ScalarField, level: usize) -> Vec<f64> {
    let g = u.grid();
    let row = u.level(level);
    let inv = 1.0 / (g.dx() * g.dx());
    let mut out = vec![0.0; g.n_space()];
    for node in g.interior_nodes() {
        let nb = g.raw_neighbors(node);
        let mut sq = 0.0;
        for k in 0..g.dim() {
            let d = (row[nb[2 * k]] - 2.0 * row[node] + row[nb[2 * k + 1]]) * inv;
            sq += d * d;
        }
        if g.dim() == 2 {
            let corner = |di, dj| g.offset(node, di, dj).filter(|&c| g.is_active(c));
            if let (Some(pp), Some(pm), Some(mp), Some(mm)) =
                (corner(1, 1), corner(1, -1), corner(-1, 1), corner(-1, -1))
            {
                let mixed = (row[pp] - row[pm] - row[mp] + row[mm]) * 0.25 * inv;
                sq += 2.0 * mixed * mixed;
            }
        }
        out[node] = sq.sqrt();
    }
    out
}

/// Quadrature of `(∬ |f|^q)^{1/q}` over `sub`, where `f(level, node)` is
/// evaluated only where the quadrature weight is positive.
pub(crate) fn lq_norm_with(
    grid: &Grid,
    q: f64,
    sub: &Cylinder,
    f: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "L^q norm needs q ≥ 1 (got {q})"
        )));
    }
    if !grid.contains_cylinder(sub) {
        return Err(LabError::OutOfDomain(format!(
            "sub-cylinder {sub:?} is not contained in the grid cylinder"
        )));
    }
    let mut acc = 0.0;
    for level in 0..grid.n_levels() {
        for node in grid.active_nodes() {
            let w = grid.quadrature_weight(node, level, sub);
            if w > 0.0 {
                acc += w * f(level, node).abs().powf(q);
            }
        }
    }
    Ok(acc.powf(1.0 / q))
}

pub fn lq_norm(u: &ScalarField, q: f64, sub: &Cylinder) -> Result<f64> {
    lq_norm_with(u.grid(), q, sub, |l, n| u.get(l, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::sync::Arc;

    fn grid1(dx: f64) -> Arc<Grid> {
        Arc::new(Grid::new(GridSpec::new(1, 1.0, dx, 1.0, 0.5)).unwrap())
    }

    #[test]
    fn central_gradient_exact_on_affine_and_quadratic() {
        let g = grid1(0.1);
        let u = ScalarField::from_fn(g.clone(), |x, _| 3.0 * x[0]);
        let du = gradient_central(&u, 0);
        for node in g.active_nodes() {
            assert!((du.get(0, node)[0] - 3.0).abs() < 1e-12);
        }
        let c = ScalarField::constant(g.clone(), 7.0);
        assert!(gradient_central(&c, 1).max_norm() == 0.0);

        let sq = ScalarField::from_fn(g.clone(), |x, _| x[0] * x[0]);
        let node = g.node_at(&[0.5, 0.0]).unwrap();
        assert!((gradient_central(&sq, 0).get(0, node)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn godunov_selection() {
        let g = grid1(0.1);
        let mid = g.node_at(&[0.0, 0.0]).unwrap();
        let v = ScalarField::from_fn(g.clone(), |x, _| x[0].abs());
        assert_eq!(gradient_godunov(&v, 0)[mid], 0.0);
        let cap = ScalarField::from_fn(g.clone(), |x, _| -x[0].abs());
        assert!((gradient_godunov(&cap, 0)[mid] - 1.0).abs() < 1e-12);
        let lin = ScalarField::from_fn(g.clone(), |x, _| 3.0 * x[0]);
        let gl = gradient_godunov(&lin, 0);
        for node in g.interior_nodes() {
            assert!((gl[node] - 3.0).abs() < 1e-12);
        }
        let c = ScalarField::constant(g, 2.0);
        assert!(gradient_godunov(&c, 0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn laplacian_stencils() {
        let g = grid1(0.125);
        let u = ScalarField::from_fn(g.clone(), |x, _| x[0] * x[0]);
        let l = laplacian(&u, 0);
        for node in g.interior_nodes() {
            assert!((l[node] - 2.0).abs() < 1e-12);
        }
        let g2 = Arc::new(Grid::new(GridSpec::new(2, 1.0, 0.125, 1.0, 0.5)).unwrap());
        let u2 = ScalarField::from_fn(g2.clone(), |x, _| x[0] * x[0] + x[1] * x[1]);
        let l2 = laplacian(&u2, 0);
        for node in g2.interior_nodes() {
            assert!((l2[node] - 4.0).abs() < 1e-12);
        }
        let a = ScalarField::from_fn(g2.clone(), |x, _| 1.0 + x[0] - 2.0 * x[1]);
        assert!(laplacian(&a, 0).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hessian_of_mixed_quadratic() {
        let g = Arc::new(Grid::new(GridSpec::new(2, 1.0, 0.125, 1.0, 0.5)).unwrap());
        let u = ScalarField::from_fn(g.clone(), |x, _| x[0] * x[0] + 3.0 * x[0] * x[1]);
        let h = hessian_frobenius(&u, 0);
        let exact = (4.0f64 + 2.0 * 9.0).sqrt();
        for node in g.interior_nodes() {
            assert!((h[node] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn lq_norms() {
        // unit volume: 2R T = 1
        let g = Arc::new(Grid::new(GridSpec::new(1, 0.5, 0.125, 1.0, 0.25)).unwrap());
        let q = g.spec().cylinder();
        let two = ScalarField::constant(g.clone(), 2.0);
        for p in [1.0, 2.0, 3.7] {
            assert!((lq_norm(&two, p, &q).unwrap() - 2.0).abs() < 1e-12);
        }
        assert_eq!(
            lq_norm(&ScalarField::zeros(g.clone()), 2.0, &q).unwrap(),
            0.0
        );
        assert!(lq_norm(&two, 0.5, &q).is_err());

        let fine = Arc::new(Grid::new(GridSpec::new(1, 0.5, 1.0 / 256.0, 1.0, 0.5)).unwrap());
        let u = ScalarField::from_fn(fine.clone(), |x, _| x[0] + 0.5);
        let slab = Cylinder::centered(0.5, false, 1.0, 1.0);
        let v = lq_norm(&u, 2.0, &slab).unwrap();
        assert!((v - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn sub_cylinder_must_fit() {
        let g = grid1(0.25);
        let u = ScalarField::constant(g, 1.0);
        let big = Cylinder::centered(2.0, false, 0.0, 1.0);
        assert!(lq_norm(&u, 2.0, &big).is_err());
    }
}
