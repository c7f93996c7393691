//! Maximal-regularity ratios for truncated power sources.
//!
//! Above the critical exponent the ratio stays bounded as the truncation
//! and the grid are refined; below it the ratio is free to grow.

use hjlab::scalelab::{maxreg_sweep, MaxregConfig};

fn main() -> hjlab::Result<()> {
    let sweep = maxreg_sweep(&MaxregConfig::new(3.0, vec![1.6, 2.4, 3.0]))?;
    println!("critical q0 = {}  alpha0 = {}", sweep.q0, sweep.alpha0);
    println!(
        "{:>5} {:>8} {:>9} {:>10} {:>8}",
        "q", "eps", "dx", "ratio", "status"
    );
    for r in &sweep.rows {
        println!(
            "{:>5} {:>8} {:>9.6} {:>10.4} {:>8}",
            r.q,
            r.epsilon,
            r.dx,
            r.ratio,
            r.status.label()
        );
    }
    for s in &sweep.spreads {
        println!(
            "q = {}: spread over eps {:.3}, over dx {:.3}, growth {:.3}, flagged {}",
            s.q, s.across_epsilon, s.across_resolution, s.growth, s.flagged
        );
    }
    Ok(())
}
