//! Banded Cholesky for the implicit diffusion systems `(I - θ Δ_h) v = r`.

use crate::error::{LabError, Result};
use crate::grid::{Grid, NONE};

/// Symmetric positive definite band matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i` of the lower triangle.
    a: Vec<f64>,
    l: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            a: vec![0.0; n * (bw + 1)],
            l: Vec::new(),
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`); requires `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    fn get_a(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.a[self.idx(i, j)]
        }
    }

    pub fn factor(&mut self) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        self.l = vec![0.0; n * (bw + 1)];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.a[self.idx(i, j)];
                let kmin = lo.max(j.saturating_sub(bw));
                for k in kmin..j {
                    s -= self.l[self.idx(i, k)] * self.l[self.idx(j, k)];
                }
                let ij = self.idx(i, j);
                if i == j {
                    if !(s > 0.0) {
                        return Err(LabError::Precondition(format!(
                            "matrix is not positive definite at row {i}"
                        )));
                    }
                    self.l[ij] = s.sqrt();
                } else {
                    self.l[ij] = s / self.l[self.idx(j, j)];
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place using the factor.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[self.idx(i, k)] * b[k];
            }
            b[i] = s / self.l[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[self.idx(k, i)] * b[k];
            }
            b[i] = s / self.l[self.idx(i, i)];
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = 0.0;
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                s += self.get_a(i, j) * x[j];
            }
            out[i] = s;
        }
    }

    /// `max|A x - b| / max(max|b|, tiny)`.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        let num = ax
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let den = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        num / den
    }
}

/// Implicit diffusion step `(I - θ Δ_h)` on the interior nodes of a grid,
/// where `θ = σ dt`. Non-interior neighbours are Dirichlet data.
#[derive(Debug, Clone)]
pub struct DiffusionSystem {
    /// Interior node of each unknown.
    pub unknowns: Vec<usize>,
    /// Unknown index of each node (`NONE` for Dirichlet nodes).
    pub slot: Vec<usize>,
    pub theta: f64,
    matrix: BandedSpd,
    coupling: f64,
}

impl DiffusionSystem {
    pub fn new(grid: &Grid, theta: f64) -> Result<Self> {
        let unknowns: Vec<usize> = grid.interior_nodes().collect();
        let mut slot = vec![NONE; grid.n_space()];
        for (k, &n) in unknowns.iter().enumerate() {
            slot[n] = k;
        }
        let c = theta / (grid.dx() * grid.dx());
        let mut bw = 0;
        for (k, &n) in unknowns.iter().enumerate() {
            for &o in &grid.raw_neighbors(n)[..2 * grid.dim()] {
                if slot[o] != NONE && slot[o] < k {
                    bw = bw.max(k - slot[o]);
                }
            }
        }
        let mut matrix = BandedSpd::zeros(unknowns.len(), bw);
        for (k, &n) in unknowns.iter().enumerate() {
            matrix.add(k, k, 1.0 + 2.0 * grid.dim() as f64 * c);
            for &o in &grid.raw_neighbors(n)[..2 * grid.dim()] {
                if slot[o] != NONE && slot[o] < k {
                    matrix.add(k, slot[o], -c);
                }
            }
        }
        if !unknowns.is_empty() {
            matrix.factor()?;
        }
        Ok(Self {
            unknowns,
            slot,
            theta,
            matrix,
            coupling: c,
        })
    }

    /// Off-diagonal coupling `θ / dx²`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Solves for the interior values given right-hand side `rhs` (indexed by
    /// unknown) and the Dirichlet values `full` at non-interior nodes.
    /// Returns the relative residual of the linear solve.
    pub fn solve(&self, grid: &Grid, rhs: &[f64], full: &mut [f64]) -> f64 {
        let mut b = rhs.to_vec();
        for (k, &n) in self.unknowns.iter().enumerate() {
            for &o in &grid.raw_neighbors(n)[..2 * grid.dim()] {
                if self.slot[o] == NONE {
                    b[k] += self.coupling * full[o];
                }
            }
        }
        let mut x = b.clone();
        self.matrix.solve(&mut x);
        let res = self.matrix.relative_residual(&x, &b);
        for (k, &n) in self.unknowns.iter().enumerate() {
            full[n] = x[k];
        }
        res
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn tridiagonal_solve() {
        let n = 6;
        let mut m = BandedSpd::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, 4.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        m.factor().unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b = vec![0.0; n];
        m.matvec(&x, &mut b);
        let mut y = b.clone();
        m.solve(&mut y);
        for i in 0..n {
            assert!((y[i] - x[i]).abs() < 1e-14);
        }
        assert!(m.relative_residual(&y, &b) < 1e-15);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut m = BandedSpd::zeros(2, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, 1.0);
        m.add(1, 0, 2.0);
        assert!(m.factor().is_err());
    }

    #[test]
    fn diffusion_system_preserves_constants_with_matching_data() {
        let g = Grid::new(GridSpec::new(2, 1.0, 0.125, 1.0, 0.5).with_ball_mask(true)).unwrap();
        let sys = DiffusionSystem::new(&g, 0.3).unwrap();
        let mut full = vec![0.0; g.n_space()];
        for n in g.active_nodes() {
            full[n] = 2.5;
        }
        let rhs = vec![2.5; sys.unknowns.len()];
        let res = sys.solve(&g, &rhs, &mut full);
        assert!(res < 1e-13);
        for n in g.active_nodes() {
            assert!((full[n] - 2.5).abs() < 1e-13);
        }
    }
}
