//! Oscillation of normalized solutions on growing time windows.
//!
//! For each `τ` a periodic profile is solved on `B_{R+1} × (0, τ)`,
//! normalized, and its oscillation on the unit cylinder compared with the
//! closed-form budget, which decays in `τ`.

use hjlab::scalelab::{liouville_probe, ProbeConfig};

fn main() -> hjlab::Result<()> {
    let probe = liouville_probe(&ProbeConfig::new(3.0, 0.5))?;
    println!(
        "{:>6} {:>6} {:>10} {:>12} {:>12}",
        "R", "tau", "budget", "oscillation", "kinetic"
    );
    for r in &probe.rows {
        println!(
            "{:>6} {:>6} {:>10.4} {:>12.4e} {:>12.4e}",
            r.radius, r.tau, r.budget, r.oscillation, r.kinetic
        );
    }
    println!(
        "budget decreasing: {}  oscillation monotone: {}",
        probe.budget_decreasing, probe.oscillation_monotone
    );
    Ok(())
}
