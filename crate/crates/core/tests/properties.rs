//! Invariants checked on random inputs.

use std::sync::Arc;

use proptest::prelude::*;

use hjlab::dual::{ldiff_cap, ldiff_ratio};
use hjlab::fp::{solve_fp, FpProblem};
use hjlab::grid::{Cylinder, Grid, GridSpec, ScalarField, VectorField};
use hjlab::hj::legendre_sup;
use hjlab::scalelab::{BlowupParams, Variant};
use hjlab::seminorm::{holder_seminorm, nonlinear_space, SeminormOptions};
use hjlab::Exponents;

fn small_grid(dim: usize) -> Arc<Grid> {
    let dx = if dim == 1 { 0.0625 } else { 0.125 };
    Arc::new(Grid::new(GridSpec::new(dim, 1.0, dx, 0.5, 0.125)).unwrap())
}

fn exact() -> SeminormOptions {
    SeminormOptions {
        force_exact: true,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_relations(gamma in 2.01f64..20.0, dim in 1usize..=4) {
        let e = Exponents::new(gamma, dim).unwrap();
        let n2 = dim as f64 + 2.0;
        prop_assert!((e.q0() * e.gamma_prime() - n2).abs() <= 1e-12 * n2);
        prop_assert!((e.alpha0() + e.gamma_prime() - 2.0).abs() <= 1e-12);
        prop_assert!((e.alpha_for(e.q0()) - e.alpha0()).abs() <= 1e-12);
        prop_assert!((e.case_b_amplitude_power(e.alpha0()) - 1.0).abs() <= 1e-12);
        prop_assert!(e.alpha0() > 0.0 && e.alpha0() < 1.0);
    }

    #[test]
    fn ldiff_ratio_is_capped(
        gp in 1.05f64..1.95,
        zeta in prop::array::uniform3(-10.0f64..10.0),
        xi in prop::array::uniform3(-10.0f64..10.0),
    ) {
        prop_assume!(xi.iter().any(|v| v.abs() > 1e-6));
        prop_assert!(ldiff_ratio(&zeta, &xi, gp) <= ldiff_cap(gp) * (1.0 + 1e-12));
    }

    #[test]
    fn legendre_transform_inverts(h in 0.5f64..3.0, gamma in 2.2f64..6.0, p in prop::array::uniform2(-2.0f64..2.0)) {
        let exact = h * p[0].hypot(p[1]).powf(gamma);
        let got = legendre_sup(h, gamma, p).unwrap();
        prop_assert!((got - exact).abs() <= 1e-6 * exact.max(1.0), "{got} vs {exact}");
    }

    #[test]
    fn seminorms_are_absolutely_homogeneous(
        seed in any::<u64>(),
        scale in -4.0f64..4.0,
        offset in -10.0f64..10.0,
        alpha in 0.1f64..0.95,
        dim in 1usize..=2,
    ) {
        let g = small_grid(dim);
        let k = (seed % 997) as f64 / 997.0;
        let u = ScalarField::from_fn(g.clone(), |x, t| (3.0 * x[0] + k * x[1] + 7.0 * k * t).sin() + k * x[0] * x[0]);
        let v = u.map(|w| scale * w + offset);
        let q = Cylinder::centered(0.75, false, 0.0, 0.5);
        let (a, b) = (
            holder_seminorm(&u, alpha, &q, &exact()).unwrap().value,
            holder_seminorm(&v, alpha, &q, &exact()).unwrap().value,
        );
        prop_assert!((b - scale.abs() * a).abs() <= 1e-10 * a.max(1.0));
        let (a, b) = (
            nonlinear_space(&u, alpha, 3.0, &q, &exact()).unwrap().value,
            nonlinear_space(&v, alpha, 3.0, &q, &exact()).unwrap().value,
        );
        prop_assert!((b - scale.abs() * a).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn blowup_coordinates_round_trip(
        m in 0.05f64..20.0,
        r in 0.05f64..2.0,
        gamma in 2.1f64..5.0,
        base in prop::array::uniform2(-1.0f64..1.0),
        t0 in 0.0f64..1.0,
        y in prop::array::uniform2(-3.0f64..3.0),
        s in 0.0f64..3.0,
    ) {
        for variant in [Variant::Alpha0, Variant::Alpha] {
            let p = BlowupParams::new(variant, ([base[0], base[1]], t0), m, r, gamma).unwrap();
            let (x, t) = p.to_original(&y, s);
            let (y2, s2) = p.to_rescaled(&x, t);
            let lambda = p.time_scale();
            // t0 + λs loses digits of s when λ is tiny
            let s_tol = 1e-9 + 8.0 * f64::EPSILON * (t0 + lambda * s) / lambda;
            prop_assert!((y2[0] - y[0]).abs() < 1e-9 && (y2[1] - y[1]).abs() < 1e-9 && (s2 - s).abs() <= s_tol);
            // rescaled diffusion and Hamiltonian coefficients
            let diffusion = lambda / (r * r);
            let hamiltonian = m.powf(gamma - 1.0) * lambda / r.powf(gamma);
            match variant {
                Variant::Alpha0 => {
                    prop_assert!((p.sigma_n().unwrap() - diffusion).abs() <= 1e-10 * diffusion);
                    prop_assert!((hamiltonian - 1.0).abs() <= 1e-10);
                }
                Variant::Alpha => {
                    prop_assert!((p.theta_n().unwrap() - hamiltonian).abs() <= 1e-10 * hamiltonian);
                    prop_assert!((diffusion - 1.0).abs() <= 1e-10);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fokker_planck_conserves_mass(
        dim in 1usize..=2,
        src in prop::array::uniform2(-0.75f64..0.75),
        drift in prop::array::uniform2(-3.0f64..3.0),
        wobble in 0.0f64..2.0,
        sigma in 0.2f64..1.0,
    ) {
        let g = small_grid(dim);
        let src = [src[0], if dim == 1 { 0.0 } else { src[1] }];
        let b = VectorField::from_fn(g.clone(), |x, t| {
            [drift[0] + wobble * (3.0 * x[1] + t).sin(), drift[1] * x[0]]
        });
        let sol = solve_fp(&FpProblem::new(b, sigma, src)).unwrap();
        prop_assert!(sol.conservation_error() <= 1e-8, "{}", sol.conservation_error());
        prop_assert!(sol.min_density() >= 0.0);
        prop_assert!(sol.outflux.windows(2).all(|w| w[1] >= w[0] - 1e-14));
    }
}
