use std::sync::Arc;

use super::Grid;
use crate::error::{LabError, Result};

/// Real values on every space-time node of a grid. Inactive (masked) nodes
/// hold zero.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let len = grid.n_space() * grid.n_levels();
        Self {
            grid,
            values: vec![0.0; len],
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        Self::from_fn(grid, |_, _| c)
    }

    /// Samples `f(x, t)` at every active node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64; 2], f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let g = out.grid.clone();
        for level in 0..g.n_levels() {
            let t = g.time(level);
            let row = out.level_mut(level);
            for node in g.active_nodes() {
                row[node] = f(&g.coords(node), t);
            }
        }
        out
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let len = grid.n_space() * grid.n_levels();
        if values.len() != len {
            return Err(LabError::GridMismatch(format!(
                "expected {len} values, got {}",
                values.len()
            )));
        }
        let out = Self { grid, values };
        out.check_finite()?;
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn get(&self, level: usize, node: usize) -> f64 {
        self.values[level * self.grid.n_space() + node]
    }

    pub fn set(&mut self, level: usize, node: usize, v: f64) {
        let n = self.grid.n_space();
        self.values[level * n + node] = v;
    }

    pub fn level(&self, level: usize) -> &[f64] {
        let n = self.grid.n_space();
        &self.values[level * n..(level + 1) * n]
    }

    pub fn level_mut(&mut self, level: usize) -> &mut [f64] {
        let n = self.grid.n_space();
        &mut self.values[level * n..(level + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for level in 0..self.grid.n_levels() {
            let row = out.level_mut(level);
            for node in self.grid.active_nodes() {
                row[node] = f(row[node]);
            }
        }
        out
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        let mut out = self.clone();
        for level in 0..self.grid.n_levels() {
            let (a, b) = (out.level_mut(level), other.level(level));
            for node in self.grid.active_nodes() {
                a[node] = f(a[node], b[node]);
            }
        }
        Ok(out)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.spec() != other.grid.spec() {
            return Err(LabError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid.spec(),
                other.grid.spec()
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        let g = &self.grid;
        (0..g.n_levels())
            .flat_map(|l| g.active_nodes().map(move |n| (l, n)))
            .map(|(l, n)| self.get(l, n).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        let g = &self.grid;
        for level in 0..g.n_levels() {
            for node in g.active_nodes() {
                if !self.get(level, node).is_finite() {
                    return Err(LabError::BlowUp {
                        x: g.coords(node)[..g.dim()].to_vec(),
                        t: g.time(level),
                    });
                }
            }
        }
        Ok(())
    }

    /// Multilinear interpolation in space and linear in time. Returns `None`
    /// outside the lattice box or horizon.
    pub fn interpolate(&self, x: &[f64; 2], t: f64) -> Option<f64> {
        let g = &*self.grid;
        let ft = g.fractional_level(t);
        let last = (g.n_levels() - 1) as f64;
        if !(0.0..=last).contains(&ft) {
            return None;
        }
        let l0 = (ft.floor() as usize).min(g.n_levels() - 2);
        let wt = ft - l0 as f64;
        let a = self.interpolate_level(l0, x)?;
        if wt == 0.0 {
            return Some(a);
        }
        let b = self.interpolate_level(l0 + 1, x)?;
        if wt == 1.0 {
            return Some(b);
        }
        Some((1.0 - wt) * a + wt * b)
    }

    /// Multilinear interpolation of one time level.
    pub fn interpolate_level(&self, level: usize, x: &[f64; 2]) -> Option<f64> {
        let g = &*self.grid;
        let n = g.nodes_per_axis();
        let last = (n - 1) as f64;
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..g.dim() {
            let f = g.fractional_index(x[k]);
            if !(0.0..=last).contains(&f) {
                return None;
            }
            base[k] = (f.floor() as usize).min(n - 2);
            frac[k] = f - base[k] as f64;
        }
        let row = self.level(level);
        let at = |i: usize, j: usize| row[i + j * n];
        let lerp = |a: f64, b: f64, w: f64| {
            if w == 0.0 {
                a
            } else if w == 1.0 {
                b
            } else {
                (1.0 - w) * a + w * b
            }
        };
        let (i, j) = (base[0], base[1]);
        let v = if g.dim() == 1 {
            lerp(at(i, 0), at(i + 1, 0), frac[0])
        } else {
            let lo = lerp(at(i, j), at(i + 1, j), frac[0]);
            let hi = if frac[1] == 0.0 {
                0.0
            } else {
                lerp(at(i, j + 1), at(i + 1, j + 1), frac[0])
            };
            lerp(lo, hi, frac[1])
        };
        Some(v)
    }

    /// Samples this field onto the active nodes of `target` by interpolation.
    pub fn resample(&self, target: Arc<Grid>) -> Result<Self> {
        let mut out = Self::zeros(target.clone());
        for level in 0..target.n_levels() {
            let t = target.time(level);
            for node in target.active_nodes() {
                let x = target.coords(node);
                let v = self.interpolate(&x, t).ok_or_else(|| {
                    LabError::OutOfDomain(format!(
                        "node {node} at ({:?}, {t}) lies outside the source grid",
                        &x[..target.dim()]
                    ))
                })?;
                out.set(level, node, v);
            }
        }
        Ok(out)
    }
}

/// `N`-vectors on every space-time node (second component unused in 1-D).
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid>,
    values: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let len = grid.n_space() * grid.n_levels();
        Self {
            grid,
            values: vec![[0.0; 2]; len],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64; 2], f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        let g = out.grid.clone();
        for level in 0..g.n_levels() {
            let t = g.time(level);
            for node in g.active_nodes() {
                let mut v = f(&g.coords(node), t);
                if g.dim() == 1 {
                    v[1] = 0.0;
                }
                out.set(level, node, v);
            }
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn get(&self, level: usize, node: usize) -> [f64; 2] {
        self.values[level * self.grid.n_space() + node]
    }

    pub fn set(&mut self, level: usize, node: usize, v: [f64; 2]) {
        let n = self.grid.n_space();
        self.values[level * n + node] = v;
    }

    pub fn level(&self, level: usize) -> &[[f64; 2]] {
        let n = self.grid.n_space();
        &self.values[level * n..(level + 1) * n]
    }

    pub fn level_mut(&mut self, level: usize) -> &mut [[f64; 2]] {
        let n = self.grid.n_space();
        &mut self.values[level * n..(level + 1) * n]
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid.clone());
        for level in 0..self.grid.n_levels() {
            for node in self.grid.active_nodes() {
                let v = self.get(level, node);
                out.set(level, node, v[0].hypot(v[1]));
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            v[0] *= factor;
            v[1] *= factor;
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }
}
