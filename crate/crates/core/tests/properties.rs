use layerpot::geometry::{make_density, make_interface, DensityFamily, InterfaceFamily, Side};
use layerpot::greens::{corrector, fundamental, fundamental_gradient, greens_ball};
use layerpot::modulus::{classify_dini, default_ladder, series_check, Modulus, Verdict};
use layerpot::quadrature::{Disk, Integrator, NearPoint};
use layerpot::{BallContext, Point, QuadratureSpec};
use proptest::prelude::*;

fn graphs() -> Vec<layerpot::InterfaceGraphF64> {
    vec![
        make_interface(InterfaceFamily::Flat, 3, None).unwrap(),
        make_interface(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 3, None).unwrap(),
        make_interface(InterfaceFamily::Holder { alpha: 1.0, k: 0.3 }, 3, None).unwrap(),
        make_interface(InterfaceFamily::CounterexampleGraph, 3, None).unwrap(),
        make_interface(
            InterfaceFamily::Table {
                radii: vec![0.0, 0.1, 0.5, 1.0],
                slopes: vec![0.0, 0.05, 0.2, 0.4],
            },
            3,
            None,
        )
        .unwrap(),
    ]
}

fn chart_point(rho_frac: f64, theta: f64, chart: f64) -> Point<f64> {
    let rho = rho_frac * chart;
    Point::new(&[rho * theta.cos(), rho * theta.sin()])
}

fn ball_point(r: f64, u: [f64; 3]) -> Point<f64> {
    // Cube sample pulled inside the ball.
    let p = Point::new(&u);
    let norm = p.norm();
    if norm >= 0.999 {
        p.scale(0.999 * r / norm)
    } else {
        p.scale(r)
    }
}

#[test]
fn graph_families_are_normalized_at_origin() {
    let o = Point::zero(2);
    for g in graphs() {
        assert_eq!(g.psi(&o), 0.0);
        assert_eq!(g.grad_psi(&o).norm(), 0.0);
        assert!(g.modulus().at(1.0) <= 1.0);
    }
}

#[test]
fn flat_area_element_is_exactly_one() {
    let g = make_interface::<f64>(InterfaceFamily::Flat, 3, None).unwrap();
    for y in [[0.0, 0.0], [0.3, -0.2], [0.9, 0.1]] {
        assert_eq!(g.area_element(&Point::new(&y)).unwrap(), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn dini_chart_inequalities(rho in 1e-9f64..1.0, theta in 0.0f64..6.3) {
        for g in graphs() {
            let y = chart_point(rho, theta, g.chart_radius() * 0.999_999);
            let r = y.norm();
            let w = g.modulus().at(r);
            let k = g.seminorm();
            prop_assert!(g.grad_psi(&y).norm() <= k * w * (1.0 + 1e-12) + 1e-300);
            prop_assert!(g.psi(&y).abs() <= k * r * w * (1.0 + 1e-12) + 1e-300);
            prop_assert!(g.area_element(&y).unwrap() >= 1.0);
        }
    }

    #[test]
    fn point_side_above_and_below(rho in 0.0f64..1.0, theta in 0.0f64..6.3, log_delta in -11.9f64..-1.0) {
        let delta = 10f64.powf(log_delta);
        for g in graphs() {
            let y = chart_point(rho, theta, g.chart_radius() * 0.999);
            let h = g.psi(&y);
            prop_assert_eq!(g.point_side(&Point::lift(&y, h + delta)), Side::Plus);
            prop_assert_eq!(g.point_side(&Point::lift(&y, h - delta)), Side::Minus);
        }
    }

    #[test]
    fn density_seminorm_bound(x1 in -0.7f64..0.7, x2 in -0.7f64..0.7) {
        let gs = [
            make_density(DensityFamily::Constant { c: 2.0 }, 3).unwrap(),
            make_density(DensityFamily::Holder { alpha: 0.5, a: 1.0, base: 1.0 }, 3).unwrap(),
            make_density(DensityFamily::Holder { alpha: 1.0, a: -0.4, base: 0.5 }, 3).unwrap(),
            make_density(DensityFamily::CounterexampleEta, 3).unwrap(),
        ];
        let x = Point::new(&[x1, x2, 0.0]);
        for g in &gs {
            let bound = g.seminorm() * g.modulus().at(x.norm().min(1.0));
            prop_assert!((g.value(&x) - g.g0()).abs() <= bound * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn greens_symmetry(a in prop::array::uniform3(-1.0f64..1.0), b in prop::array::uniform3(-1.0f64..1.0), r in 0.3f64..2.0) {
        let ctx = BallContext::new(3, r).unwrap();
        let (x, y) = (ball_point(r, a), ball_point(r, b));
        prop_assume!((x - y).norm() > 1e-6);
        let gxy = greens_ball(&ctx, &x, &y).unwrap();
        let gyx = greens_ball(&ctx, &y, &x).unwrap();
        prop_assert!((gxy - gyx).abs() <= 1e-10 * gxy.abs().max(1.0));
    }

    #[test]
    fn greens_symmetry_2d(a in prop::array::uniform2(-0.7f64..0.7), b in prop::array::uniform2(-0.7f64..0.7)) {
        let ctx = BallContext::new(2, 1.0).unwrap();
        let (x, y) = (Point::new(&a), Point::new(&b));
        prop_assume!((x - y).norm() > 1e-6);
        let gxy = greens_ball(&ctx, &x, &y).unwrap();
        let gyx = greens_ball(&ctx, &y, &x).unwrap();
        prop_assert!((gxy - gyx).abs() <= 1e-10 * gxy.abs().max(1.0));
    }

    #[test]
    fn greens_vanishes_on_boundary(a in prop::array::uniform3(-1.0f64..1.0), d in prop::array::uniform3(-1.0f64..1.0), r in 0.3f64..2.0) {
        let ctx = BallContext::new(3, r).unwrap();
        let x = ball_point(r, a);
        let dir = Point::new(&d);
        prop_assume!(dir.norm() > 1e-3);
        let y = dir.scale(r / dir.norm());
        prop_assume!((x - y).norm() > 1e-3 * r);
        prop_assert!(greens_ball(&ctx, &x, &y).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn corrector_is_harmonic(a in prop::array::uniform3(-0.6f64..0.6), b in prop::array::uniform3(-0.6f64..0.6)) {
        let ctx = BallContext::new(3, 1.0).unwrap();
        let (x, y) = (Point::new(&a), Point::new(&b));
        let h = 1e-3;
        let mut lap = -6.0 * corrector(&ctx, &x, &y);
        for i in 0..3 {
            lap += corrector(&ctx, &x, &y.with(i, y[i] + h)) + corrector(&ctx, &x, &y.with(i, y[i] - h));
        }
        prop_assert!((lap / (h * h)).abs() <= 1e-4);
    }

    #[test]
    fn fundamental_gradient_matches_differences(a in prop::array::uniform3(-1.0f64..1.0)) {
        let ctx = BallContext::new(3, 1.0).unwrap();
        let x = Point::new(&a);
        prop_assume!(x.norm() > 0.1);
        let g = fundamental_gradient(&ctx, &x).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let fd = (fundamental(&ctx, &x.with(i, x[i] + h)).unwrap() - fundamental(&ctx, &x.with(i, x[i] - h)).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn partial_integrals_nondecreasing(alpha in 0.1f64..1.0, beta in 0.5f64..3.0) {
        for m in [Modulus::power(alpha).unwrap(), Modulus::log_power(beta).unwrap(), Modulus::InverseLog] {
            let c = classify_dini(&m, &default_ladder(), 1e-6).unwrap();
            prop_assert!(c.partial_integrals.windows(2).all(|w| w[1].1 >= w[0].1));
        }
    }
}

#[test]
fn lemma_series_inequalities_for_dini_fixtures() {
    let fixtures = [
        Modulus::power(0.25).unwrap(),
        Modulus::power(0.5).unwrap(),
        Modulus::power(1.0).unwrap(),
        Modulus::log_power(2.0).unwrap(),
        Modulus::table(vec![0.01, 0.1, 1.0], vec![0.01, 0.2, 0.8]).unwrap(),
        Modulus::max_of(Modulus::power(0.5).unwrap(), Modulus::log_power(3.0).unwrap()),
    ];
    for m in &fixtures {
        let c = classify_dini(m, &default_ladder(), 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Dini, "{m:?}");
        for rho in [0.3, 0.5, 0.7] {
            for k in [5, 20, 60] {
                let s = series_check(m, rho, k, 1e-8).unwrap();
                assert!(s.lower_ok && s.upper_ok, "{m:?} rho={rho} K={k}: {s:?}");
            }
        }
    }
}

#[test]
fn classification_fixtures() {
    for alpha in [0.25f64, 0.5, 1.0] {
        let c = classify_dini(&Modulus::power(alpha).unwrap(), &default_ladder(), 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Dini);
        let integral = c.integral.unwrap();
        assert!((integral - 1.0 / alpha).abs() < 1e-6, "alpha={alpha}: {integral}");
    }
    let c = classify_dini(&Modulus::<f64>::InverseLog, &default_ladder(), 1e-6).unwrap();
    assert_eq!(c.verdict, Verdict::Divergent);
}

#[test]
fn polar_and_plain_rules_agree_on_smooth_integrand() {
    let q = Integrator::new(QuadratureSpec::<f64>::default().with_tol(1e-10));
    let f = |y: &Point<f64>| (1.0 + y[0] * y[1]).exp() * (2.0 + y[0]).cos();
    let disk = Disk {
        center: Point::new(&[0.1, -0.2]),
        radius: 0.7,
    };
    let plain = q.disk_integral(f, &disk, None, 1e-10);
    let near = NearPoint {
        at: Point::new(&[0.3, 0.1]),
        distance: 1e-3,
    };
    let polar = q.disk_integral(f, &disk, Some(&near), 1e-10);
    assert!(plain.converged && polar.converged);
    assert!((plain.value - polar.value).abs() <= plain.est_error + polar.est_error + 1e-12);
}

#[test]
fn halving_tolerance_does_not_increase_error() {
    // int over the unit disk of 1 / sqrt(|y - p|^2 + d^2), closed form at the centre.
    let d = 0.05;
    let exact = 2.0 * std::f64::consts::PI * ((1.0f64 + d * d).sqrt() - d);
    let disk = Disk {
        center: Point::new(&[0.0, 0.0]),
        radius: 1.0,
    };
    let near = NearPoint {
        at: Point::new(&[0.0, 0.0]),
        distance: d,
    };
    let mut last = f64::INFINITY;
    for k in 3..10 {
        let tol = 10f64.powi(-k);
        let q = Integrator::new(QuadratureSpec::<f64>::default().with_tol(tol));
        let est = q.disk_integral(|y: &Point<f64>| 1.0 / (y.norm_sq() + d * d).sqrt(), &disk, Some(&near), tol);
        let err = (est.value - exact).abs();
        assert!(err <= est.est_error.max(1e-14), "tol={tol}: err {err} > est {}", est.est_error);
        assert!(err <= last.max(1e-14), "tol={tol}: {err} > {last}");
        last = err;
    }
}
