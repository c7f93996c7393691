//! The classical, weighted and nonlinear Hölder seminorms of one field,
//! enumerated exactly and by stratified sampling.

use std::sync::Arc;

use hjlab::grid::{Cylinder, Grid, GridSpec, ScalarField};
use hjlab::seminorm::{seminorm_set, SeminormOptions};

fn main() -> hjlab::Result<()> {
    let grid = Arc::new(Grid::new(
        GridSpec::new(2, 1.0, 0.0625, 0.5, 0.03125).with_ball_mask(true),
    )?);
    let u = ScalarField::from_fn(grid.clone(), |x, t| {
        (x[0].abs() + 0.5 * x[1].abs()).sqrt() * (1.0 - t)
    });
    let q = Cylinder::centered(0.75, true, 0.0, 0.5);
    let (alpha, gamma, z) = (0.5, 3.0, 1.0);

    let exact = SeminormOptions {
        force_exact: true,
        ..Default::default()
    };
    let sampled = SeminormOptions {
        pair_budget: 0,
        samples: 200_000,
        ..Default::default()
    };
    for (label, opts) in [("exact", exact), ("sampled", sampled)] {
        let s = seminorm_set(&u, alpha, 1.0 - alpha, z, gamma, &q, &opts)?;
        println!(
            "{label:<8} classical {:.5}  weighted {:.5}  nonlinear space {:.5}  time {:.5}  combined {:.5}",
            s.classical.value, s.weighted.value, s.nl_space.value, s.nl_time.value, s.nl_combined
        );
    }
    Ok(())
}
