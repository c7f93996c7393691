//! Closed-form solutions used to manufacture right-hand sides.

use crate::grid::ScalarField;
use std::f64::consts::PI;

/// A smooth function of `(x, t)` together with the derivatives entering the
/// HJ operator.
pub trait ExactSolution: Sync {
    fn value(&self, x: &[f64; 2], t: f64) -> f64;
    fn time_derivative(&self, x: &[f64; 2], t: f64) -> f64;
    fn gradient(&self, x: &[f64; 2], t: f64) -> [f64; 2];
    fn laplacian(&self, x: &[f64; 2], t: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl ExactSolution for Constant {
    fn value(&self, _: &[f64; 2], _: f64) -> f64 {
        self.0
    }
    fn time_derivative(&self, _: &[f64; 2], _: f64) -> f64 {
        0.0
    }
    fn gradient(&self, _: &[f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian(&self, _: &[f64; 2], _: f64) -> f64 {
        0.0
    }
}

/// `slope * (horizon - t)`
#[derive(Debug, Clone, Copy)]
pub struct LinearInTime {
    pub slope: f64,
    pub horizon: f64,
}

impl ExactSolution for LinearInTime {
    fn value(&self, _: &[f64; 2], t: f64) -> f64 {
        self.slope * (self.horizon - t)
    }
    fn time_derivative(&self, _: &[f64; 2], _: f64) -> f64 {
        -self.slope
    }
    fn gradient(&self, _: &[f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian(&self, _: &[f64; 2], _: f64) -> f64 {
        0.0
    }
}

/// `amplitude * sin(π x1) * (horizon - t)`, vanishing on `x1 = ±1`.
#[derive(Debug, Clone, Copy)]
pub struct SineProduct {
    pub amplitude: f64,
    pub horizon: f64,
}

impl ExactSolution for SineProduct {
    fn value(&self, x: &[f64; 2], t: f64) -> f64 {
        self.amplitude * (PI * x[0]).sin() * (self.horizon - t)
    }
    fn time_derivative(&self, x: &[f64; 2], _: f64) -> f64 {
        -self.amplitude * (PI * x[0]).sin()
    }
    fn gradient(&self, x: &[f64; 2], t: f64) -> [f64; 2] {
        [
            self.amplitude * PI * (PI * x[0]).cos() * (self.horizon - t),
            0.0,
        ]
    }
    fn laplacian(&self, x: &[f64; 2], t: f64) -> f64 {
        -self.amplitude * PI * PI * (PI * x[0]).sin() * (self.horizon - t)
    }
}

/// `amplitude * sin(k·x + phase) * (1 + horizon - t)`: nonzero on the
/// lateral boundary and at the terminal time.
#[derive(Debug, Clone, Copy)]
pub struct SineWave {
    pub amplitude: f64,
    pub wave: [f64; 2],
    pub phase: f64,
    pub horizon: f64,
}

impl SineWave {
    fn arg(&self, x: &[f64; 2]) -> f64 {
        self.wave[0] * x[0] + self.wave[1] * x[1] + self.phase
    }
    fn envelope(&self, t: f64) -> f64 {
        1.0 + self.horizon - t
    }
}

impl ExactSolution for SineWave {
    fn value(&self, x: &[f64; 2], t: f64) -> f64 {
        self.amplitude * self.arg(x).sin() * self.envelope(t)
    }
    fn time_derivative(&self, x: &[f64; 2], _: f64) -> f64 {
        -self.amplitude * self.arg(x).sin()
    }
    fn gradient(&self, x: &[f64; 2], t: f64) -> [f64; 2] {
        let c = self.amplitude * self.arg(x).cos() * self.envelope(t);
        [c * self.wave[0], c * self.wave[1]]
    }
    fn laplacian(&self, x: &[f64; 2], t: f64) -> f64 {
        let k2 = self.wave[0].powi(2) + self.wave[1].powi(2);
        -k2 * self.value(x, t)
    }
}

/// `f = -∂t u - σ Δu + h |Du|^γ` sampled at the active nodes of `h`'s grid.
pub fn manufactured_rhs(
    exact: &dyn ExactSolution,
    gamma: f64,
    sigma: f64,
    h: &ScalarField,
) -> ScalarField {
    let g = h.grid().clone();
    let mut f = ScalarField::zeros(g.clone());
    for level in 0..g.n_levels() {
        let t = g.time(level);
        for node in g.active_nodes() {
            let x = g.coords(node);
            let p = exact.gradient(&x, t);
            let v = -exact.time_derivative(&x, t) - sigma * exact.laplacian(&x, t)
                + h.get(level, node) * p[0].hypot(p[1]).powf(gamma);
            f.set(level, node, v);
        }
    }
    f
}
