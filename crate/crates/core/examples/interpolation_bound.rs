//! Second-order `L^q` bounds from a Hölder bound and a differential
//! inequality, at the exponent pairing `α + (N+2)/q = 2`.

use std::sync::Arc;

use hjlab::grid::{Grid, GridSpec, ScalarField};
use hjlab::scalelab::interpolation_bound_check;

fn main() -> hjlab::Result<()> {
    let (q, gamma, radius) = (2.5, 3.0, 0.5);
    for dx in [0.0625, 0.03125, 0.015625] {
        let grid = Arc::new(Grid::new(GridSpec::new(1, 1.25, dx, 1.25, dx / 2.0))?);
        let v = ScalarField::from_fn(grid.clone(), |x, t| (x[0] + t).sin() * (1.0 + t));
        let g = ScalarField::constant(grid.clone(), 10.0);
        let r = interpolation_bound_check(&v, &g, q, gamma, radius, &Default::default())?;
        println!(
            "dx = {dx:<9} alpha = {}  c1 = {:.4}  c2 = {:.3}  |dt v|_q = {:.4}  |D2 v|_q = {:.4}  K = {:.4}",
            r.alpha, r.c1, r.c2, r.time_derivative, r.hessian, r.k
        );
    }
    Ok(())
}
