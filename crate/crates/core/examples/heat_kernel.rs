//! Driftless Fokker-Planck density against the free heat kernel.
//!
//! A unit mass starts at the origin of `(-8, 8)` and diffuses with `σ = 1`
//! up to `t = 1`; the wall is far enough away that the free Gaussian of
//! variance `2t` is an accurate reference.

use std::f64::consts::PI;
use std::sync::Arc;

use hjlab::fp::{solve_fp, FpProblem};
use hjlab::grid::{Grid, GridSpec};

fn main() -> hjlab::Result<()> {
    for dt in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
        let grid = Arc::new(Grid::new(GridSpec::new(1, 8.0, 0.125, 1.0, dt))?);
        let sol = solve_fp(&FpProblem::driftless(grid.clone(), 1.0, [0.0; 2]))?;
        let top = grid.n_levels() - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for node in grid.active_nodes() {
            let x = grid.coords(node)[0];
            let exact = (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
            num += (sol.m.get(top, node) - exact).abs();
            den += exact;
        }
        println!(
            "dt = {dt:<9} relative L1 gap = {:.3}%  conservation error = {:.1e}  min m = {:.1e}",
            100.0 * num / den,
            sol.conservation_error(),
            sol.min_density()
        );
    }
    Ok(())
}
