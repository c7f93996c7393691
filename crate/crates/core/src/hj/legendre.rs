//! Numerical check of `h |p|^γ = sup_q { p·q - l |q|^γ' }`.

use crate::error::Result;
use crate::exponents::Exponents;
use std::f64::consts::PI;

const ANGLES: usize = 72;
const RADII: usize = 200;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Numerical `sup_q { p·q - l |q|^γ' }` over the plane: a polar grid search
/// followed by alternating golden-section refinement in radius and angle.
pub fn legendre_sup(h: f64, gamma: f64, p: [f64; 2]) -> Result<f64> {
    let e = Exponents::new(gamma, 2)?;
    let gp = e.gamma_prime();
    let l = e.lagrangian_coeff(h);
    let phi = |rho: f64, th: f64| rho * (p[0] * th.cos() + p[1] * th.sin()) - l * rho.powf(gp);
    let pn = p[0].hypot(p[1]);

    if pn == 0.0 {
        return Ok(0.0);
    }
    // bracket on the scale of |p|^{γ-1} so small momenta are resolved
    let mut rmax = (pn / l).powf(1.0 / (gp - 1.0));
    while l * rmax.powf(gp) <= 2.0 * pn * rmax {
        rmax *= 2.0;
    }
    let dr = rmax / RADII as f64;
    let dth = 2.0 * PI / ANGLES as f64;
    let (mut best, mut br, mut bt) = (0.0, 0.0, 0.0);
    for i in 0..=RADII {
        for j in 0..ANGLES {
            let (rho, th) = (i as f64 * dr, j as f64 * dth);
            let v = phi(rho, th);
            if v > best {
                (best, br, bt) = (v, rho, th);
            }
        }
    }
    let (mut wr, mut wt) = (dr, dth);
    for _ in 0..4 {
        let (r, v) = golden_max(|r| phi(r, bt), (br - wr).max(0.0), br + wr, 1e-13 * rmax);
        if v > best {
            (best, br) = (v, r);
        }
        let (t, v) = golden_max(|t| phi(br, t), bt - wt, bt + wt, 1e-13);
        if v > best {
            (best, bt) = (v, t);
        }
        wr *= 0.25;
        wt *= 0.25;
    }
    Ok(best)
}

/// `max_p |numeric sup - h |p|^γ|` over the sampled momenta.
pub fn legendre_gap(h: f64, gamma: f64, samples: &[[f64; 2]]) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for p in samples {
        let exact = h * p[0].hypot(p[1]).powf(gamma);
        gap = gap.max((legendre_sup(h, gamma, *p)? - exact).abs());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum() {
        assert_eq!(legendre_sup(1.0, 3.0, [0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn small_momentum_is_resolved() {
        let p = [0.0, -0.16];
        let exact = 0.5 * 0.16f64.powf(5.5);
        let v = legendre_sup(0.5, 5.5, p).unwrap();
        assert!((v - exact).abs() < 1e-6 * exact, "{v} vs {exact}");
    }

    #[test]
    fn unit_momentum_gamma_four() {
        let v = legendre_sup(1.0, 4.0, [1.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn half_momentum_h_two() {
        let gap = legendre_gap(2.0, 3.0, &[[0.5, 0.0], [0.3, -0.4]]).unwrap();
        assert!(gap < 1e-6, "{gap}");
    }
}
