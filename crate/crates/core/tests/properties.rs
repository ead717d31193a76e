mod common;

use fpme::diagnostics::{dissipation, level_set_fraction, oscillation, CylinderSpec, Snapshot};
use fpme::fracops::{frac_laplacian, half_energy, SpectralPlan};
use fpme::{integrate, lp_norm, make_grid, Field, FracOrder};
use proptest::prelude::*;

fn field(dim: usize, n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n.pow(dim as u32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn integrate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, f in field(2, 8), h in field(2, 8)) {
        let g = make_grid(2, 8, 1.5).unwrap();
        let (f, h) = (Field::new(g, f).unwrap(), Field::new(g, h).unwrap());
        let lhs = integrate(&f.scale(a).add(&h.scale(b)).unwrap());
        let rhs = a * integrate(&f) + b * integrate(&h);
        let scale = a.abs() * lp_norm(&f, 1.0).unwrap() + b.abs() * lp_norm(&h, 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn holder_interpolation(f in field(1, 32), p in 1.0f64..6.0, dq in 0.0f64..6.0, sup in any::<bool>()) {
        let g = make_grid(1, 32, 2.0).unwrap();
        let f = Field::new(g, f).unwrap();
        let q = if sup { f64::INFINITY } else { p + dq };
        let expo = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
        let bound = g.box_volume().powf(expo) * lp_norm(&f, q).unwrap();
        prop_assert!(lp_norm(&f, p).unwrap() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn exponents_are_consistent(s in 0.001f64..0.999, dim in 1usize..=2) {
        let o = FracOrder::new(s, dim).unwrap();
        let lhs = o.gamma * dim as f64;
        let rhs = (2.0 - 2.0 * s) * o.alpha;
        prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs);
        prop_assert_eq!(o.alpha_p(f64::INFINITY), o.alpha);
        prop_assert_eq!(o.gamma_p(1.0), 1.0);
    }

    #[test]
    fn fractional_laplacian_is_self_adjoint(f in field(1, 64), h in field(1, 64), s in -1.0f64..1.0) {
        let g = make_grid(1, 64, 3.0).unwrap();
        let plan = SpectralPlan::new(g);
        let (f, h) = (Field::new(g, f).unwrap(), Field::new(g, h).unwrap());
        let a = integrate(&frac_laplacian(&f, s, &plan).unwrap().mul(&h).unwrap());
        let b = integrate(&f.mul(&frac_laplacian(&h, s, &plan).unwrap()).unwrap());
        prop_assert!(common::rel(a, b) <= 1e-10);
    }

    #[test]
    fn energy_and_dissipation_are_nonnegative(f in prop::collection::vec(0.0f64..2.0, 64), s in 0.05f64..0.95) {
        let g = make_grid(1, 64, 4.0).unwrap();
        let plan = SpectralPlan::new(g);
        let u = Field::new(g, f).unwrap();
        prop_assert!(half_energy(&u, s, &plan).unwrap() >= 0.0);
        prop_assert!(dissipation(&u, s, &plan).unwrap() >= 0.0);
    }

    #[test]
    fn level_sets_and_oscillation_are_monotone(
        vals in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 32), 4),
        l1 in 0.0f64..1.0,
        l2 in 0.0f64..1.0,
        r1 in 0.1f64..1.0,
        r2 in 0.1f64..1.0,
    ) {
        let g = make_grid(1, 32, 2.0).unwrap();
        let snaps: Vec<Snapshot> = vals
            .into_iter()
            .enumerate()
            .map(|(k, v)| Snapshot { t: k as f64 / 3.0, field: Field::new(g, v).unwrap() })
            .collect();
        let cyl = CylinderSpec::new(vec![0.0], 1.0, 1.0).unwrap();
        let (lo, hi) = (l1.min(l2), l1.max(l2));
        let f_lo = level_set_fraction(&snaps, lo, &cyl).unwrap();
        let f_hi = level_set_fraction(&snaps, hi, &cyl).unwrap();
        prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
        prop_assert!(f_hi <= f_lo);
        let (small, big) = (r1.min(r2), r1.max(r2));
        let o_small = oscillation(&snaps, &CylinderSpec::new(vec![0.0], 1.0, small).unwrap()).unwrap();
        let o_big = oscillation(&snaps, &CylinderSpec::new(vec![0.0], 1.0, big).unwrap()).unwrap();
        prop_assert!(o_small <= o_big);
    }
}

#[test]
fn eigenfunctions_in_two_dimensions() {
    let g = make_grid(2, 16, 2.0).unwrap();
    let plan = SpectralPlan::new(g);
    let k = std::f64::consts::PI / 2.0;
    for s in [0.25, 0.5, 0.75] {
        for (m1, m2) in [(1.0, 0.0), (0.0, 3.0), (2.0, 5.0)] {
            let f = Field::from_fn(g, |x| (k * (m1 * x[0] + m2 * x[1])).cos()).unwrap();
            let lam = (k * k * (m1 * m1 + m2 * m2)).powf(s);
            let err = frac_laplacian(&f, s, &plan)
                .unwrap()
                .sub(&f.scale(lam))
                .unwrap()
                .max_abs();
            assert!(err <= 1e-10 * lam, "s {s} mode ({m1},{m2}): {err}");
        }
    }
}
