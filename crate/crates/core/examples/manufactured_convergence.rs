//! Convergence of the backward HJ solver on a manufactured solution.
//!
//! `u(x, t) = sin(πx)(1 - t)` on `[-1, 1] × (0, 1)`, `γ = 3`, `h = σ = 1`.

use std::sync::Arc;

use hjlab::grid::{Grid, GridSpec};
use hjlab::hj::{solve_hj, ExactSolution, HjProblem, SineProduct};

fn main() -> hjlab::Result<()> {
    let exact = SineProduct {
        amplitude: 1.0,
        horizon: 1.0,
    };
    let mut rows = Vec::new();
    for n in [32u32, 64, 128] {
        let dx = 1.0 / n as f64;
        let grid = Arc::new(Grid::new(GridSpec::new(1, 1.0, dx, 1.0, dx / 4.0))?);
        let problem = HjProblem::manufactured(grid.clone(), &exact, 3.0, 1.0, 1.0);
        let sol = solve_hj(&problem)?;
        let mut err: f64 = 0.0;
        for level in 0..grid.n_levels() {
            for node in grid.active_nodes() {
                let e = exact.value(&grid.coords(node), grid.time(level));
                err = err.max((sol.u.get(level, node) - e).abs());
            }
        }
        println!(
            "dx = 1/{n:<4} max error = {err:.3e}  substeps = {}",
            sol.total_substeps()
        );
        rows.push((dx, err));
    }
    for w in rows.windows(2) {
        let order = (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln();
        println!("observed order {order:.3}");
    }
    Ok(())
}
