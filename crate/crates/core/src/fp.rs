//! Absorbing Fokker-Planck solver in divergence form.
//!
//! ```text
//! ∂s m - σ Δm - div(b m) = 0   in Ω × (0, τ),
//! m = 0                       on ∂Ω × (0, τ),
//! m(0) = δ_{x0}.
//! ```
//!
//! Mass moves with velocity `-b`. Each step `s_n -> s_{n+1}` applies an
//! implicit diffusion step with `m = 0` at the boundary nodes, followed by
//! explicit first-order upwind drift (subcycled) with face-averaged `b` at
//! level `n + 1`. Diffusion is the only way mass leaves: the drift flux through
//! faces touching the boundary is zero. The mass crossing each such face is
//! recorded, so `mass(s) + outflux(s) = 1` holds to round-off.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::exponents::Exponents;
use crate::grid::{central_gradient_slice, Cylinder, Grid, ScalarField, VectorField};
use crate::linalg::DiffusionSystem;

const MAX_DRIFT_SUBSTEPS: usize = 1 << 16;
const DRIFT_CFL: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct FpProblem {
    pub sigma: f64,
    /// Drift `b`; its grid is the computational grid.
    pub drift: VectorField,
    /// Location of the initial Dirac mass.
    pub source: [f64; 2],
}

impl FpProblem {
    pub fn new(drift: VectorField, sigma: f64, source: [f64; 2]) -> Self {
        Self {
            sigma,
            drift,
            source,
        }
    }

    /// Pure diffusion on `grid`.
    pub fn driftless(grid: Arc<Grid>, sigma: f64, source: [f64; 2]) -> Self {
        Self::new(VectorField::zeros(grid), sigma, source)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.drift.grid()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "sigma must be positive (got {})",
                self.sigma
            )));
        }
        let g = self.grid();
        if g.dx() > g.half_width() / 8.0 + 1e-12 {
            return Err(LabError::InvalidGrid(format!(
                "Δx = {} does not resolve R = {} (need Δx ≤ R/8)",
                g.dx(),
                g.half_width()
            )));
        }
        let cyl = g.spec().cylinder();
        if cyl.spatial_distance(&self.source) < 2.0 * g.dx() - 1e-9 * g.dx() {
            return Err(LabError::InvalidParameter(format!(
                "source {:?} must be at least 2Δx inside the domain",
                &self.source[..g.dim()]
            )));
        }
        Ok(())
    }
}

/// A face between an interior node and a boundary node, where mass exits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitFace {
    pub interior: usize,
    pub boundary: usize,
    /// Outward unit normal of the face (a lattice direction).
    pub normal: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct FpSolution {
    pub m: ScalarField,
    /// The drift the density was transported with.
    pub drift: VectorField,
    pub sigma: f64,
    pub source: [f64; 2],
    pub source_node: usize,
    /// `∫ m(s_n)` for each level.
    pub mass: Vec<f64>,
    /// Cumulative mass lost through the boundary up to each level.
    pub outflux: Vec<f64>,
    pub exit_faces: Vec<ExitFace>,
    /// `face_flux[n][f]`: mass leaving through face `f` during step `n -> n+1`.
    pub face_flux: Vec<Vec<f64>>,
    pub drift_substeps: Vec<usize>,
    pub linear_residual: f64,
}

impl FpSolution {
    pub fn grid(&self) -> &Arc<Grid> {
        self.m.grid()
    }

    /// Largest `|mass(s) + outflux(s) - 1|` over all levels.
    pub fn conservation_error(&self) -> f64 {
        self.mass
            .iter()
            .zip(&self.outflux)
            .map(|(a, b)| (a + b - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_density(&self) -> f64 {
        let g = self.grid();
        (0..g.n_levels())
            .flat_map(|l| g.active_nodes().map(move |n| (l, n)))
            .map(|(l, n)| self.m.get(l, n))
            .fold(f64::INFINITY, f64::min)
    }

    fn cell_volume(&self) -> f64 {
        self.grid().dx().powi(self.grid().dim() as i32)
    }

    /// `∫ φ(x) m(x, s_level) dx`.
    pub fn integrate_level(&self, level: usize, phi: impl Fn(usize, &[f64; 2]) -> f64) -> f64 {
        let g = self.grid();
        let vol = self.cell_volume();
        let row = self.m.level(level);
        g.interior_nodes()
            .map(|n| vol * phi(n, &g.coords(n)) * row[n])
            .sum()
    }

    /// Trapezoid-in-time quadrature of `∬ φ(level, node) m`.
    pub fn integrate(&self, phi: impl Fn(usize, usize) -> f64) -> f64 {
        let g = self.grid();
        let top = g.n_levels() - 1;
        let mut acc = 0.0;
        for level in 0..=top {
            let w = if level == 0 || level == top {
                0.5 * g.dt()
            } else {
                g.dt()
            };
            acc += w * self.integrate_level(level, |n, _| phi(level, n));
        }
        acc
    }

    /// `∑ steps ∑ faces ψ(step + 1, face) * flux`, the discrete form of
    /// `-σ ∬_{∂Ω} ψ Dm·ν`.
    pub fn boundary_pairing(&self, psi: impl Fn(usize, &ExitFace) -> f64) -> f64 {
        let mut acc = 0.0;
        for (step, fluxes) in self.face_flux.iter().enumerate() {
            for (face, amount) in self.exit_faces.iter().zip(fluxes) {
                if *amount != 0.0 {
                    acc += psi(step + 1, face) * amount;
                }
            }
        }
        acc
    }
}

/// `b = h1 γ |Dw|^{γ-2} Dw` with central gradients; zero where `Dw = 0`.
pub fn drift_from_solution(w: &ScalarField, h1: f64, gamma: f64) -> VectorField {
    let g = w.grid().clone();
    let mut b = VectorField::zeros(g.clone());
    let mut grad = vec![[0.0; 2]; g.n_space()];
    for level in 0..g.n_levels() {
        central_gradient_slice(&g, w.level(level), &mut grad);
        let row = b.level_mut(level);
        for node in g.active_nodes() {
            let p = grad[node];
            let norm = p[0].hypot(p[1]);
            if norm > 0.0 {
                let c = h1 * gamma * norm.powf(gamma - 2.0);
                row[node] = [c * p[0], c * p[1]];
            }
        }
    }
    b
}

fn exit_faces(g: &Grid) -> Vec<ExitFace> {
    let mut out = Vec::new();
    for node in g.interior_nodes() {
        for k in 0..g.dim() {
            for plus in [false, true] {
                let o = g.neighbor(node, k, plus).expect("interior node");
                if !g.is_interior(o) {
                    let mut normal = [0.0; 2];
                    normal[k] = if plus { 1.0 } else { -1.0 };
                    out.push(ExitFace {
                        interior: node,
                        boundary: o,
                        normal,
                    });
                }
            }
        }
    }
    out
}

pub fn solve_fp(p: &FpProblem) -> Result<FpSolution> {
    p.validate()?;
    let g = p.grid().clone();
    let n = g.n_space();
    let top = g.n_levels() - 1;
    let (dx, dt) = (g.dx(), g.dt());
    let vol = dx.powi(g.dim() as i32);

    let source_node = g
        .interior_nodes()
        .min_by(|&a, &b| {
            let da = crate::grid::dist2(&g.coords(a), &p.source);
            let db = crate::grid::dist2(&g.coords(b), &p.source);
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .ok_or_else(|| LabError::InvalidGrid("grid has no interior node".into()))?;

    let mut m = ScalarField::zeros(g.clone());
    m.set(0, source_node, 1.0 / vol);
    let faces = exit_faces(&g);
    let sys = DiffusionSystem::new(&g, p.sigma * dt)?;
    let coupling = sys.coupling();

    let mut state = m.level(0).to_vec();
    let mut mass = vec![0.0; top + 1];
    let mut outflux = vec![0.0; top + 1];
    mass[0] = vol * g.interior_nodes().map(|i| state[i]).sum::<f64>();
    let mut face_flux = Vec::with_capacity(top);
    let mut drift_substeps = Vec::with_capacity(top);
    let mut linear_residual: f64 = 0.0;
    let mut lost = 0.0;
    let mut next = vec![0.0; n];

    for step in 0..top {
        // implicit diffusion, boundary nodes pinned at zero
        let rhs: Vec<f64> = sys.unknowns.iter().map(|&i| state[i]).collect();
        let mut full = vec![0.0; n];
        linear_residual = linear_residual.max(sys.solve(&g, &rhs, &mut full));
        let fluxes: Vec<f64> = faces
            .iter()
            .map(|f| coupling * full[f.interior] * vol)
            .collect();
        lost += fluxes.iter().sum::<f64>();
        state.copy_from_slice(&full);

        // upwind drift with velocity -b at level step + 1
        let b = p.drift.level(step + 1);
        let vmax = g
            .interior_nodes()
            .map(|i| b[i][0].abs().max(b[i][1].abs()))
            .fold(0.0, f64::max);
        let k = if vmax > 0.0 {
            ((dt * g.dim() as f64 * vmax / (DRIFT_CFL * dx)).ceil() as usize).max(1)
        } else {
            0
        };
        if k > MAX_DRIFT_SUBSTEPS {
            return Err(LabError::InvalidParameter(format!(
                "drift subcycle limit exceeded at s = {} (|b| = {vmax})",
                g.time(step + 1)
            )));
        }
        let c = if k > 0 { dt / (k as f64 * dx) } else { 0.0 };
        for _ in 0..k {
            next.copy_from_slice(&state);
            for i in g.interior_nodes() {
                for axis in 0..g.dim() {
                    let j = g.neighbor(i, axis, true).expect("interior node");
                    if !g.is_interior(j) {
                        continue;
                    }
                    let v = -0.5 * (b[i][axis] + b[j][axis]);
                    let flux = c * (v.max(0.0) * state[i] + v.min(0.0) * state[j]);
                    next[i] -= flux;
                    next[j] += flux;
                }
            }
            std::mem::swap(&mut state, &mut next);
        }

        let peak = g.interior_nodes().map(|i| state[i]).fold(0.0, f64::max);
        for i in g.active_nodes() {
            let v = state[i];
            if !v.is_finite() {
                return Err(LabError::BlowUp {
                    x: g.coords(i)[..g.dim()].to_vec(),
                    t: g.time(step + 1),
                });
            }
            if v < 0.0 {
                assert!(
                    v >= -1e-14 * peak,
                    "negative density {v} at node {i}, level {}",
                    step + 1
                );
                state[i] = 0.0;
            }
        }
        m.level_mut(step + 1).copy_from_slice(&state);
        mass[step + 1] = vol * g.interior_nodes().map(|i| state[i]).sum::<f64>();
        outflux[step + 1] = lost;
        face_flux.push(fluxes);
        drift_substeps.push(k);
    }

    Ok(FpSolution {
        m,
        drift: p.drift.clone(),
        sigma: p.sigma,
        source: p.source,
        source_node,
        mass,
        outflux,
        exit_faces: faces,
        face_flux,
        drift_substeps,
        linear_residual,
    })
}

/// `K = ∬ |b|^{γ'} m`.
pub fn kinetic_energy(sol: &FpSolution, b: &VectorField, gamma_prime: f64) -> Result<f64> {
    if b.grid().spec() != sol.grid().spec() {
        return Err(LabError::GridMismatch(
            "drift and density live on different grids".into(),
        ));
    }
    Ok(sol.integrate(|l, n| {
        let v = b.get(l, n);
        v[0].hypot(v[1]).powf(gamma_prime)
    }))
}

/// `∬ |b| m`, the transport budget of the moment bound.
pub fn transport_cost(sol: &FpSolution, b: &VectorField) -> Result<f64> {
    kinetic_energy(sol, b, 1.0)
}

/// `∫ |x - x0|^α m(x, s)` against its two budget terms
/// `(∬|b| m)^α` and `(σ s)^{α/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub alpha: f64,
    pub level: usize,
    pub moment: f64,
    pub transport_term: f64,
    pub diffusion_term: f64,
    /// `moment / (transport_term + diffusion_term)`
    pub fitted_constant: f64,
}

pub fn moment_alpha(
    sol: &FpSolution,
    b: &VectorField,
    alpha: f64,
    level: usize,
) -> Result<MomentReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "moment exponent must lie in (0, 1) (got {alpha})"
        )));
    }
    let g = sol.grid();
    if level >= g.n_levels() {
        return Err(LabError::OutOfDomain(format!(
            "level {level} beyond horizon"
        )));
    }
    let x0 = g.coords(sol.source_node);
    let moment = sol.integrate_level(level, |_, x| crate::grid::dist2(x, &x0).sqrt().powf(alpha));
    let transport = transport_restricted(sol, b, level)?.powf(alpha);
    let diffusion = (sol.sigma * g.time(level)).powf(alpha / 2.0);
    let budget = transport + diffusion;
    Ok(MomentReport {
        alpha,
        level,
        moment,
        transport_term: transport,
        diffusion_term: diffusion,
        fitted_constant: if budget > 0.0 { moment / budget } else { 0.0 },
    })
}

/// `∬_{(0, s_level)} |b| m`.
fn transport_restricted(sol: &FpSolution, b: &VectorField, level: usize) -> Result<f64> {
    if b.grid().spec() != sol.grid().spec() {
        return Err(LabError::GridMismatch(
            "drift and density live on different grids".into(),
        ));
    }
    let g = sol.grid();
    let mut acc = 0.0;
    for l in 0..=level {
        let w = if l == 0 || l == level { 0.5 } else { 1.0 } * g.dt();
        if level == 0 {
            break;
        }
        acc += w * sol.integrate_level(l, |n, _| {
            let v = b.get(l, n);
            v[0].hypot(v[1])
        });
    }
    Ok(acc)
}

/// Lateral loss against `C τ^{1/γ} K^{1/γ'} / R + C σ τ / R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLossReport {
    pub outflux: f64,
    pub kinetic: f64,
    pub drift_term: f64,
    pub diffusion_term: f64,
    pub fitted_constant: f64,
}

pub fn boundary_loss_check(
    sol: &FpSolution,
    b: &VectorField,
    gamma: f64,
) -> Result<BoundaryLossReport> {
    let g = sol.grid();
    let e = Exponents::new(gamma, g.dim())?;
    let tau = g.horizon();
    let r = g.half_width();
    let kinetic = kinetic_energy(sol, b, e.gamma_prime())?;
    let outflux = *sol.outflux.last().unwrap();
    let drift_term = tau.powf(1.0 / gamma) * kinetic.powf(1.0 / e.gamma_prime()) / r;
    let diffusion_term = sol.sigma * tau / (r * r);
    Ok(BoundaryLossReport {
        outflux,
        kinetic,
        drift_term,
        diffusion_term,
        fitted_constant: outflux / (drift_term + diffusion_term),
    })
}

/// `σ^{γ'(N+1)/(N+2)} ‖m‖_{q0'} ≤ C (K + σ^{γ'/2} τ^{α0/2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityNormReport {
    pub q0_conj: f64,
    /// `‖m‖_{L^{q0'}}` on the reported window.
    pub norm: f64,
    /// `‖m‖_{L^{q0'}}` including the initial layer.
    pub norm_full: f64,
    pub lhs: f64,
    pub kinetic: f64,
    pub budget: f64,
    pub fitted_constant: f64,
    pub initial_layer_excluded: bool,
    /// The discrete Dirac dominates the full-window norm.
    pub initial_layer_dominates: bool,
}

pub fn m_norm_bound_check(
    sol: &FpSolution,
    b: &VectorField,
    gamma: f64,
    exclude_initial_layer: bool,
) -> Result<DensityNormReport> {
    let g = sol.grid();
    let (tau, r, sigma) = (g.horizon(), g.half_width(), sol.sigma);
    if r * r < tau * sigma {
        return Err(LabError::Precondition(format!(
            "need R² ≥ τσ (R = {r}, τ = {tau}, σ = {sigma})"
        )));
    }
    let e = Exponents::new(gamma, g.dim())?;
    let qc = e.q0_conj();
    let full = Cylinder::centered(r, g.spec().ball_mask, 0.0, tau);
    let late = Cylinder::centered(r, g.spec().ball_mask, tau / 10.0, tau);
    let norm_full = crate::grid::lq_norm(&sol.m, qc, &full)?;
    let norm_late = crate::grid::lq_norm(&sol.m, qc, &late)?;
    let norm = if exclude_initial_layer {
        norm_late
    } else {
        norm_full
    };
    let kinetic = kinetic_energy(sol, b, e.gamma_prime())?;
    let lhs = sigma.powf(e.sigma_power()) * norm;
    let budget = kinetic + sigma.powf(e.gamma_prime() / 2.0) * tau.powf(e.alpha0() / 2.0);
    Ok(DensityNormReport {
        q0_conj: qc,
        norm,
        norm_full,
        lhs,
        kinetic,
        budget,
        fitted_constant: lhs / budget,
        initial_layer_excluded: exclude_initial_layer,
        initial_layer_dominates: norm_full > 2.0 * norm_late,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(dim: usize, r: f64, dx: f64, tau: f64, dt: f64) -> Arc<Grid> {
        Arc::new(Grid::new(GridSpec::new(dim, r, dx, tau, dt)).unwrap())
    }

    #[test]
    fn driftless_run_conserves_mass_and_sign() {
        let g = grid(1, 2.0, 0.125, 1.0, 0.0625);
        let sol = solve_fp(&FpProblem::driftless(g, 1.0, [0.0; 2])).unwrap();
        assert!(sol.conservation_error() < 1e-12);
        assert!(sol.min_density() >= 0.0);
        assert!(sol.outflux.windows(2).all(|w| w[1] >= w[0]));
        assert!(sol.face_flux.iter().flatten().all(|f| *f >= 0.0));
    }

    #[test]
    fn drift_conserves_mass_in_two_dimensions() {
        let g = grid(2, 2.0, 0.25, 0.5, 0.05);
        let b = VectorField::from_fn(g.clone(), |x, _| [3.0 * x[1], -2.0 + x[0]]);
        let sol = solve_fp(&FpProblem::new(b, 0.3, [0.5, 0.0])).unwrap();
        assert!(sol.conservation_error() < 1e-12);
        assert!(sol.min_density() >= 0.0);
        assert!(sol.drift_substeps.iter().all(|k| *k >= 1));
    }

    #[test]
    fn uniform_drift_moves_mass_against_b() {
        let g = grid(1, 4.0, 0.03125, 1.0, 0.0078125);
        let v = 1.0;
        let b = VectorField::from_fn(g.clone(), |_, _| [v, 0.0]);
        let sol = solve_fp(&FpProblem::new(b, 0.01, [0.0; 2])).unwrap();
        let top = g.n_levels() - 1;
        let center = sol.integrate_level(top, |_, x| x[0]) / sol.mass[top];
        assert!((center + v).abs() < 0.05, "{center}");
    }

    #[test]
    fn drift_formula() {
        let g = grid(1, 1.0, 0.125, 1.0, 0.5);
        let w = ScalarField::from_fn(g.clone(), |x, _| 3.0 * x[0]);
        let b = drift_from_solution(&w, 1.0, 3.0);
        for n in g.active_nodes() {
            assert!((b.get(0, n)[0] - 27.0).abs() < 1e-10);
        }
        let g2 = grid(2, 1.0, 0.125, 1.0, 0.5);
        let s = 2.0 / 2f64.sqrt();
        let w2 = ScalarField::from_fn(g2.clone(), |x, _| s * (x[0] + x[1]));
        let b2 = drift_from_solution(&w2, 0.5, 4.0);
        let v = b2.get(1, 0);
        assert!((v[0].hypot(v[1]) - 16.0).abs() < 1e-10);
        let c = ScalarField::constant(g2, 4.0);
        assert_eq!(drift_from_solution(&c, 1.0, 3.0).max_norm(), 0.0);
    }

    #[test]
    fn kinetic_energy_homogeneity() {
        let g = grid(1, 2.0, 0.125, 1.0, 0.0625);
        let b = VectorField::from_fn(g.clone(), |x, _| [x[0].sin(), 0.0]);
        let sol = solve_fp(&FpProblem::new(b.clone(), 1.0, [0.0; 2])).unwrap();
        let gp = 1.5;
        let k1 = kinetic_energy(&sol, &b, gp).unwrap();
        let k2 = kinetic_energy(&sol, &b.scale(2.0), gp).unwrap();
        assert!((k2 / k1 - 2f64.powf(gp)).abs() < 1e-12);

        let unit = VectorField::from_fn(g.clone(), |_, _| [1.0, 0.0]);
        let total = sol.integrate(|_, _| 1.0);
        assert!((kinetic_energy(&sol, &unit, gp).unwrap() - total).abs() < 1e-14);
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let g = grid(1, 1.0, 0.25, 1.0, 0.5);
        assert!(solve_fp(&FpProblem::driftless(g, 1.0, [0.0; 2])).is_err());
        let g = grid(1, 2.0, 0.125, 1.0, 0.5);
        assert!(solve_fp(&FpProblem::driftless(g.clone(), 0.0, [0.0; 2])).is_err());
        assert!(solve_fp(&FpProblem::driftless(g, 1.0, [1.9, 0.0])).is_err());
    }
}
