//! The representation formula `w(x0, 0) = ∫∫ (L + f) m + ∫ w(T) m(T) + boundary`
//! evaluated with a solved HJ problem and its adjoint density, and the
//! one-sided inequality along a drift bent toward `x0 + y0`.

use std::sync::Arc;

use hjlab::dual::{bent_duality, duality_identity, solve_dual_pair};
use hjlab::fp::{drift_from_solution, solve_fp, FpProblem};
use hjlab::grid::{Grid, GridSpec};
use hjlab::hj::{solve_hj, HjProblem, SineWave};

fn main() -> hjlab::Result<()> {
    let (gamma, horizon) = (3.0, 0.5);
    let exact = SineWave {
        amplitude: 0.5,
        wave: [1.3, 0.0],
        phase: 0.4,
        horizon,
    };
    for n in [32u32, 64, 128] {
        let dx = 1.0 / n as f64;
        let problem_on = |radius: f64| -> hjlab::Result<HjProblem> {
            let grid = Arc::new(Grid::new(GridSpec::new(1, radius, dx, horizon, dx / 4.0))?);
            Ok(HjProblem::manufactured(grid, &exact, gamma, 1.0, 1.0))
        };
        let p = problem_on(1.0)?;
        let pair = solve_dual_pair(&p, [0.0; 2])?;
        let rep = duality_identity(&pair.hj.u, &p.rhs, &pair.fp, &p.h, gamma)?;

        let padded = problem_on(2.0)?;
        let w = solve_hj(&padded)?.u;
        let b = drift_from_solution(&w.resample(p.grid().clone())?, 1.0, gamma);
        let fp = solve_fp(&FpProblem::new(b, 1.0, [0.0; 2]))?;
        let bent = bent_duality(&w, &padded.rhs, &fp, [0.5, 0.0], gamma, 1.0)?;
        println!(
            "dx = 1/{n:<4} lhs = {:.6}  rhs = {:.6}  residual = {:+.3e}  bent slack = {:+.4}",
            rep.lhs,
            rep.rhs_total(),
            rep.residual,
            bent.slack
        );
    }
    Ok(())
}
