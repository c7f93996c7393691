//! Backward viscous Hamilton-Jacobi solver.
//!
//! Solves
//!
//! ```text
//! -∂t u - σ Δu + θ h(x, t) |Du|^γ = f   in Ω × (0, T),
//! u = data                             on ∂Ω × (0, T) and Ω × {T},
//! ```
//!
//! by marching from `t = T` down to `t = 0`. Each grid step is split into
//! `k` substeps; a substep treats diffusion implicitly and the Hamiltonian
//! explicitly through the Godunov gradient magnitude, which keeps the scheme
//! monotone under the restriction
//! `dt/k <= dx / (N γ θ h1 P^{γ-1})`, where `P` bounds the discrete gradient.

mod exact;
mod legendre;

pub use exact::{manufactured_rhs, Constant, ExactSolution, LinearInTime, SineProduct, SineWave};
pub use legendre::{legendre_gap, legendre_sup};

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{godunov_slice, laplacian_slice, Grid, ScalarField};
use crate::linalg::DiffusionSystem;

const MAX_HALVINGS: usize = 10;
const MAX_SUBSTEPS: usize = 1 << 22;

/// Data of a backward HJ problem on a fixed grid.
#[derive(Debug, Clone)]
pub struct HjProblem {
    pub gamma: f64,
    pub sigma: f64,
    /// Coefficient field `h` and its bounds `h0 <= h <= h1`.
    pub h: ScalarField,
    pub h0: f64,
    pub h1: f64,
    /// Right-hand side `f`.
    pub rhs: ScalarField,
    /// Integrability exponent attached to `f` (informational).
    pub q: f64,
    /// Terminal values (top level) and lateral values (boundary nodes).
    pub data: ScalarField,
    /// A priori estimate of the gradient magnitude; the solver raises it
    /// when the realised gradient is larger.
    pub gradient_bound: f64,
    /// Extra factor in front of the Hamiltonian (1 unless rescaled).
    pub hamiltonian_scale: f64,
}

impl HjProblem {
    /// `h ≡ 1`, `f ≡ 0`, zero data, `σ = 1`.
    pub fn new(grid: Arc<Grid>, gamma: f64) -> Self {
        let q = Exponents::new(gamma.max(2.0 + 1e-9), grid.dim())
            .map(|e| e.q0())
            .unwrap_or(1.0);
        Self {
            gamma,
            sigma: 1.0,
            h: ScalarField::constant(grid.clone(), 1.0),
            h0: 1.0,
            h1: 1.0,
            rhs: ScalarField::zeros(grid.clone()),
            q,
            data: ScalarField::zeros(grid),
            gradient_bound: 0.0,
            hamiltonian_scale: 1.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.rhs.grid()
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_h(mut self, h: ScalarField, h0: f64, h1: f64) -> Self {
        self.h = h;
        self.h0 = h0;
        self.h1 = h1;
        self
    }

    pub fn with_constant_h(self, h: f64) -> Self {
        let field = ScalarField::constant(self.grid().clone(), h);
        self.with_h(field, h, h)
    }

    pub fn with_rhs(mut self, rhs: ScalarField) -> Self {
        self.rhs = rhs;
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_data(mut self, data: ScalarField) -> Self {
        self.data = data;
        self
    }

    /// Terminal and lateral data sampled from `g(x, t)`.
    pub fn with_data_fn(self, g: impl Fn(&[f64; 2], f64) -> f64) -> Self {
        let data = ScalarField::from_fn(self.grid().clone(), g);
        self.with_data(data)
    }

    pub fn with_gradient_bound(mut self, p: f64) -> Self {
        self.gradient_bound = p;
        self
    }

    pub fn with_hamiltonian_scale(mut self, s: f64) -> Self {
        self.hamiltonian_scale = s;
        self
    }

    /// Problem whose exact solution is `exact`: right-hand side from
    /// [`manufactured_rhs`] and all boundary data sampled from `exact`.
    pub fn manufactured(
        grid: Arc<Grid>,
        exact: &dyn ExactSolution,
        gamma: f64,
        sigma: f64,
        h: f64,
    ) -> Self {
        let base = HjProblem::new(grid.clone(), gamma)
            .with_sigma(sigma)
            .with_constant_h(h);
        let rhs = manufactured_rhs(exact, gamma, sigma, &base.h);
        base.with_rhs(rhs).with_data_fn(|x, t| exact.value(x, t))
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.gamma, self.grid().dim())
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents()?;
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "sigma must lie in (0, 1] (got {})",
                self.sigma
            )));
        }
        if !(self.h0 > 0.0) || !(self.h1 >= self.h0) {
            return Err(LabError::InvalidParameter(format!(
                "need 0 < h0 <= h1 (got h0 = {}, h1 = {})",
                self.h0, self.h1
            )));
        }
        if !(self.hamiltonian_scale > 0.0) || !self.hamiltonian_scale.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "Hamiltonian scale must be positive (got {})",
                self.hamiltonian_scale
            )));
        }
        self.rhs.same_grid(&self.h)?;
        self.rhs.same_grid(&self.data)?;
        let g = self.grid();
        let tol = 1e-12 * self.h1;
        for level in 0..g.n_levels() {
            for node in g.active_nodes() {
                let v = self.h.get(level, node);
                if v < self.h0 - tol || v > self.h1 + tol {
                    return Err(LabError::InvalidParameter(format!(
                        "h = {v} at node {node}, level {level} escapes [h0, h1] = [{}, {}]",
                        self.h0, self.h1
                    )));
                }
            }
        }
        self.rhs.check_finite()?;
        self.data.check_finite()?;
        Ok(())
    }

    fn cfl_step(&self, p: f64) -> f64 {
        let g = self.grid();
        let speed = g.dim() as f64
            * self.gamma
            * self.hamiltonian_scale
            * self.h1
            * p.powf(self.gamma - 1.0);
        g.dx() / (speed + 1e-300)
    }
}

/// Diagnostics of one grid step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    /// Level that was computed.
    pub level: usize,
    pub t: f64,
    pub substeps: usize,
    pub halvings: usize,
    /// Gradient bound used for the CFL restriction.
    pub gradient_bound: f64,
    /// Largest relative residual of the implicit linear solves.
    pub linear_residual: f64,
    /// Largest interior residual of the full-step discrete equation.
    pub nonlinear_residual: f64,
}

#[derive(Debug, Clone)]
pub struct HjSolution {
    pub u: ScalarField,
    /// Interior residual of the full-step discrete equation (zero on the
    /// terminal level and at boundary nodes).
    pub residual: ScalarField,
    pub log: Vec<StepLog>,
}

impl HjSolution {
    pub fn max_residual(&self) -> f64 {
        self.log
            .iter()
            .map(|s| s.nonlinear_residual)
            .fold(0.0, f64::max)
    }

    pub fn total_substeps(&self) -> usize {
        self.log.iter().map(|s| s.substeps).sum()
    }
}

/// Parts of the discrete operator at level `n < top`:
/// `(w^n - w^{n+1}) / dt - σ Δ w^n` and the Godunov magnitude of `w^{n+1}`.
pub fn discrete_operator_parts(w: &ScalarField, sigma: f64, level: usize) -> (Vec<f64>, Vec<f64>) {
    let g = w.grid();
    let n = g.n_space();
    let (now, next) = (w.level(level), w.level(level + 1));
    let mut lap = vec![0.0; n];
    laplacian_slice(g, now, &mut lap);
    let mut grad = vec![0.0; n];
    godunov_slice(g, next, &mut grad);
    let dt = g.dt();
    let linear = (0..n)
        .map(|i| (now[i] - next[i]) / dt - sigma * lap[i])
        .collect();
    (linear, grad)
}

/// Interior residual `(w^n - w^{n+1})/dt - σ Δw^n + θ h^n G(w^{n+1})^γ - f^n`
/// of the full-step scheme, zero on the top level and non-interior nodes.
pub fn discrete_residual(
    w: &ScalarField,
    rhs: &ScalarField,
    h: &ScalarField,
    sigma: f64,
    gamma: f64,
    hamiltonian_scale: f64,
) -> Result<ScalarField> {
    w.same_grid(rhs)?;
    w.same_grid(h)?;
    let g = w.grid().clone();
    let mut out = ScalarField::zeros(g.clone());
    for level in 0..g.n_levels() - 1 {
        let (linear, grad) = discrete_operator_parts(w, sigma, level);
        let (hl, fl) = (h.level(level), rhs.level(level));
        let row = out.level_mut(level);
        for node in g.interior_nodes() {
            row[node] =
                linear[node] + hamiltonian_scale * hl[node] * grad[node].powf(gamma) - fl[node];
        }
    }
    Ok(out)
}

/// Minimum slacks of the two differential inequalities
/// `-∂s w - σΔw + h0 |Dw|^γ <= g` and `-∂s w - σΔw + h1 |Dw|^γ >= g`
/// over interior nodes, evaluated with the solver's discrete operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalitySlack {
    /// `min(g - [.. + h0 G^γ])`
    pub subsolution: f64,
    /// `min([.. + h1 G^γ] - g)`
    pub supersolution: f64,
}

pub fn differential_inequality_check(
    w: &ScalarField,
    g_rhs: &ScalarField,
    sigma: f64,
    h0: f64,
    h1: f64,
    gamma: f64,
) -> Result<InequalitySlack> {
    w.same_grid(g_rhs)?;
    let grid = w.grid().clone();
    let mut sub = f64::INFINITY;
    let mut sup = f64::INFINITY;
    for level in 0..grid.n_levels() - 1 {
        let (linear, grad) = discrete_operator_parts(w, sigma, level);
        let gl = g_rhs.level(level);
        for node in grid.interior_nodes() {
            let hg = grad[node].powf(gamma);
            sub = sub.min(gl[node] - (linear[node] + h0 * hg));
            sup = sup.min(linear[node] + h1 * hg - gl[node]);
        }
    }
    if !sub.is_finite() {
        sub = 0.0;
        sup = 0.0;
    }
    Ok(InequalitySlack {
        subsolution: sub,
        supersolution: sup,
    })
}

/// Largest value over the interior nodes, the only ones where the explicit
/// Hamiltonian is applied.
fn max_with_node(v: &[f64], grid: &Grid) -> (f64, usize) {
    grid.interior_nodes()
        .map(|n| (v[n], n))
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
}

enum StepFailure {
    Cfl { gradient: f64, node: usize },
    Fatal(LabError),
}

pub fn solve_hj(p: &HjProblem) -> Result<HjSolution> {
    p.validate()?;
    let g = p.grid().clone();
    let n = g.n_space();
    let top = g.n_levels() - 1;
    let dt = g.dt();

    let mut u = ScalarField::zeros(g.clone());
    for node in g.active_nodes() {
        let v = p.data.get(top, node);
        u.set(top, node, v);
    }
    let mut state = u.level(top).to_vec();
    let mut systems: HashMap<usize, DiffusionSystem> = HashMap::new();
    let mut log = Vec::with_capacity(top);
    let mut grad = vec![0.0; n];

    for level in (0..top).rev() {
        godunov_slice(&g, &state, &mut grad);
        let (gmax, _) = max_with_node(&grad, &g);
        let mut bound = p.gradient_bound.max(1.1 * gmax);
        let mut k = ((dt / p.cfl_step(bound)).ceil() as usize).max(1);
        let mut halvings = 0;
        let saved = state.clone();
        let linear_residual = loop {
            if k > MAX_SUBSTEPS {
                let (gradient, node) = max_with_node(&grad, &g);
                return Err(cfl_error(&g, node, g.time(level), gradient));
            }
            if !systems.contains_key(&k) {
                systems.insert(k, DiffusionSystem::new(&g, p.sigma * dt / k as f64)?);
            }
            let sys = &systems[&k];
            match march_substeps(p, &g, sys, level, k, bound, &mut state) {
                Ok(res) => break res,
                Err(StepFailure::Fatal(e)) => return Err(e),
                Err(StepFailure::Cfl { gradient, node }) => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(cfl_error(&g, node, g.time(level), gradient));
                    }
                    state.copy_from_slice(&saved);
                    bound = bound.max(1.25 * gradient);
                    k = (2 * k).max((dt / p.cfl_step(bound)).ceil() as usize);
                }
            }
        };
        u.level_mut(level).copy_from_slice(&state);

        let (linear, gnext) = discrete_operator_parts(&u, p.sigma, level);
        let (hl, fl) = (p.h.level(level), p.rhs.level(level));
        let mut worst: f64 = 0.0;
        for node in g.interior_nodes() {
            let r = linear[node] + p.hamiltonian_scale * hl[node] * gnext[node].powf(p.gamma)
                - fl[node];
            worst = worst.max(r.abs());
        }
        log.push(StepLog {
            level,
            t: g.time(level),
            substeps: k,
            halvings,
            gradient_bound: bound,
            linear_residual,
            nonlinear_residual: worst,
        });
    }

    let residual = discrete_residual(&u, &p.rhs, &p.h, p.sigma, p.gamma, p.hamiltonian_scale)?;
    Ok(HjSolution { u, residual, log })
}

fn cfl_error(g: &Grid, node: usize, t: f64, gradient: f64) -> LabError {
    LabError::CflExhausted {
        node,
        x: g.coords(node)[..g.dim()].to_vec(),
        t,
        gradient,
    }
}

/// Advances `state` from level `level + 1` to `level` in `k` substeps.
/// Returns the largest linear-solve residual.
fn march_substeps(
    p: &HjProblem,
    g: &Grid,
    sys: &DiffusionSystem,
    level: usize,
    k: usize,
    bound: f64,
    state: &mut [f64],
) -> std::result::Result<f64, StepFailure> {
    let n = g.n_space();
    let tau = g.dt() / k as f64;
    let (h_now, h_next) = (p.h.level(level), p.h.level(level + 1));
    let (f_now, f_next) = (p.rhs.level(level), p.rhs.level(level + 1));
    let (d_now, d_next) = (p.data.level(level), p.data.level(level + 1));
    let mut grad = vec![0.0; n];
    let mut rhs = vec![0.0; sys.unknowns.len()];
    let mut worst: f64 = 0.0;
    for j in 0..k {
        // weight of the later level at the end of this substep
        let lam = (k - 1 - j) as f64 / k as f64;
        let mix = |a: &[f64], b: &[f64], i: usize| {
            if lam == 0.0 {
                a[i]
            } else {
                (1.0 - lam) * a[i] + lam * b[i]
            }
        };
        godunov_slice(g, state, &mut grad);
        let (gmax, node) = max_with_node(&grad, g);
        if gmax > bound * (1.0 + 1e-12) {
            return Err(StepFailure::Cfl {
                gradient: gmax,
                node,
            });
        }
        for (slot, &i) in sys.unknowns.iter().enumerate() {
            let hv = mix(h_now, h_next, i);
            let fv = mix(f_now, f_next, i);
            rhs[slot] =
                state[i] - tau * p.hamiltonian_scale * hv * grad[i].powf(p.gamma) + tau * fv;
        }
        for b in g.boundary_nodes() {
            state[b.node] = mix(d_now, d_next, b.node);
        }
        worst = worst.max(sys.solve(g, &rhs, state));
        for i in g.active_nodes() {
            if !state[i].is_finite() {
                let x = g.coords(i);
                return Err(StepFailure::Fatal(LabError::BlowUp {
                    x: x[..g.dim()].to_vec(),
                    t: g.time(level + 1) - (j + 1) as f64 * tau,
                }));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid1(dx: f64, dt: f64) -> Arc<Grid> {
        Arc::new(Grid::new(GridSpec::new(1, 1.0, dx, 1.0, dt)).unwrap())
    }

    #[test]
    fn constant_forcing_gives_linear_profile() {
        let g = grid1(0.0625, 0.0625);
        let c = 0.7;
        let exact = LinearInTime {
            slope: c,
            horizon: 1.0,
        };
        let p = HjProblem::manufactured(g.clone(), &exact, 3.0, 1.0, 1.3);
        let sol = solve_hj(&p).unwrap();
        for level in 0..g.n_levels() {
            for node in g.active_nodes() {
                let e = c * (1.0 - g.time(level));
                assert!((sol.u.get(level, node) - e).abs() < 1e-10);
            }
        }
        assert!(sol.max_residual() < 1e-10);
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = Arc::new(Grid::new(GridSpec::new(2, 1.0, 0.125, 0.5, 0.125)).unwrap());
        let p = HjProblem::new(g.clone(), 3.0).with_data_fn(|_, _| 5.0);
        let sol = solve_hj(&p).unwrap();
        for level in 0..g.n_levels() {
            for node in g.active_nodes() {
                assert!((sol.u.get(level, node) - 5.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let g = grid1(0.25, 0.5);
        assert!(solve_hj(&HjProblem::new(g.clone(), 2.0)).is_err());
        assert!(solve_hj(&HjProblem::new(g.clone(), 3.0).with_sigma(0.0)).is_err());
        let h = ScalarField::from_fn(g.clone(), |x, _| 1.0 + x[0].abs());
        assert!(solve_hj(&HjProblem::new(g, 3.0).with_h(h, 1.0, 1.5)).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let g = grid1(0.25, 0.5);
        let f = ScalarField::from_fn(g.clone(), |_, _| f64::MAX);
        let p = HjProblem::new(g, 3.0).with_rhs(f);
        let err = solve_hj(&p).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn steep_data_triggers_substeps() {
        let g = grid1(0.03125, 0.0625);
        let p = HjProblem::new(g, 3.0).with_data_fn(|x, _| 2.0 * (3.0 * x[0]).sin());
        let sol = solve_hj(&p).unwrap();
        assert!(sol.log.iter().any(|s| s.substeps > 1));
        assert!(sol.log.iter().all(|s| s.linear_residual < 1e-12));
    }

    #[test]
    fn single_substep_residual_is_at_solver_precision() {
        let g = grid1(0.125, 0.001);
        let exact = SineProduct {
            amplitude: 0.1,
            horizon: 1.0,
        };
        let p = HjProblem::manufactured(g, &exact, 3.0, 1.0, 1.0);
        let sol = solve_hj(&p).unwrap();
        assert!(sol.log.iter().all(|s| s.substeps == 1));
        assert!(sol.max_residual() < 1e-10, "{}", sol.max_residual());
        let slack = differential_inequality_check(&sol.u, &p.rhs, 1.0, 1.0, 1.0, 3.0).unwrap();
        assert!(slack.subsolution > -1e-10 && slack.supersolution > -1e-10);
    }
}
