use layerpot::campanato::{dk_sequence, iterate, BoundaryGridSpec};
use layerpot::experiments::{
    blowup_density_control, blowup_density_scan, blowup_graph_control, blowup_graph_scan, key_lemma_ratio, r_epsilon,
    SampleSpec,
};
use layerpot::geometry::{make_density, make_interface, DensityFamily, Interface, InterfaceFamily};
use layerpot::modulus::{classify_dini, default_ladder, Modulus, Verdict};
use layerpot::{BallContext, LayerProblem, QuadratureSpec};

fn js() -> Vec<u32> {
    (4..=12).collect()
}

#[test]
fn graph_scan_diverges_slowly() {
    let spec = QuadratureSpec::default();
    let scan = blowup_graph_scan::<f64>(&js(), 3, spec).unwrap();
    assert!(scan.strictly_decreasing());
    assert!(scan.fit.slope >= 0.05, "{}", scan.fit.slope);
    assert!(scan.converged.iter().all(|&c| c));
    let r = scan.r_epsilons.as_ref().unwrap();
    for (eps, r) in scan.epsilons.iter().zip(r) {
        assert!((r / r.ln().abs() - eps).abs() <= 1e-12);
    }
    let control = blowup_graph_control::<f64>(&js(), 3, spec).unwrap();
    assert!(control.relative_variation() <= 0.1, "{}", control.relative_variation());
}

#[test]
fn density_scan_diverges_and_control_vanishes() {
    let spec = QuadratureSpec::default();
    let scan = blowup_density_scan::<f64>(&js(), 3, spec).unwrap();
    assert!(scan.strictly_decreasing());
    assert!(scan.fit.slope >= 0.05, "{}", scan.fit.slope);
    let control = blowup_density_control::<f64>(&js(), 3, spec).unwrap();
    assert!(control.max_abs() <= 1e-3, "{}", control.max_abs());
}

#[test]
fn r_epsilon_rejects_out_of_range() {
    assert!(r_epsilon(0.2f64).is_err());
    assert!(r_epsilon(0.0f64).is_err());
    let r = r_epsilon(0.1f64).unwrap();
    assert!(r > 0.0 && r < 0.25);
}

#[test]
fn key_lemma_ratios_stay_bounded() {
    let radii: Vec<f64> = (1..=4).map(|k| 0.5f64.powi(k)).collect();
    let grid = SampleSpec { count: 60, seed: 42 };
    let spec = QuadratureSpec::default();
    let one = make_density(DensityFamily::Constant { c: 1.0 }, 3).unwrap();
    let holder = make_interface(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 3, None).unwrap();
    let scan = key_lemma_ratio(&holder, &one, 0.5, &radii, grid, spec).unwrap();
    assert!(scan.ratios.iter().all(|&q| q >= 0.0));
    assert!(scan.growth() <= 3.0, "{:?}", scan.ratios);

    let flat = make_interface(InterfaceFamily::Flat, 3, None).unwrap();
    let scan = key_lemma_ratio(&flat, &one, 0.5, &radii, grid, spec).unwrap();
    assert!(scan.sups.iter().all(|&s| s <= 1e-12), "{:?}", scan.sups);
}

#[test]
fn dk_summability_tracks_dini() {
    let rho = 0.5f64;
    let p = dk_sequence(&Modulus::power(0.5).unwrap(), rho, 400).unwrap();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    let tail: f64 = p[200..].iter().sum();
    assert!(tail < 1e-12);

    let il = dk_sequence(&Modulus::<f64>::InverseLog, rho, 4000).unwrap();
    // d_k >= omega(rho^k) = min(1, 1 / (k log 2)): partial sums dominate a harmonic series.
    let mut sum = 0.0;
    for (k, d) in il.iter().enumerate().skip(1) {
        assert!(*d >= (1.0 / (k as f64 * 2f64.ln())).min(1.0) - 1e-15);
        sum += d;
        if k == 1000 {
            assert!(sum > (1000f64).ln() / 2f64.ln());
        }
    }
    let c = classify_dini(&Modulus::<f64>::InverseLog, &default_ladder(), 1e-6).unwrap();
    assert_eq!(c.verdict, Verdict::Divergent);

    let z = dk_sequence(&Modulus::<f64>::Zero, rho, 10).unwrap();
    for (k, d) in z.iter().enumerate() {
        assert!((d - rho.powf(k as f64 / 2.0)).abs() <= 1e-15);
    }
}

fn problem(iface: InterfaceFamily<f64>, c: f64) -> LayerProblem<f64> {
    let ctx = BallContext::new(3, 1.0).unwrap();
    let g = make_interface(iface, 3, None).unwrap();
    let d = make_density(DensityFamily::Constant { c }, 3).unwrap();
    LayerProblem::new(ctx, Interface::Graph(g), d, QuadratureSpec::default()).unwrap()
}

#[test]
fn iteration_on_flat_interface() {
    let p = problem(InterfaceFamily::Flat, 1.0);
    let grid = BoundaryGridSpec { n_theta: 16, n_phi: 32 };
    let run = iterate(&p, 0.5, 3, grid, SampleSpec { count: 40, seed: 42 }).unwrap();
    assert!(run.failure.is_none());
    for s in &run.states {
        assert!(s.jump_defect(1.0) <= 1e-14);
        assert!((s.l_plus.a[2] - 0.5).abs() <= 1e-12);
        assert!((s.l_minus.a[2] + 0.5).abs() <= 1e-12);
    }
    for w in run.states.windows(2) {
        assert!(w[1].sup_error_plus < w[0].sup_error_plus);
        assert!(w[1].sup_error_minus < w[0].sup_error_minus);
    }
}

#[test]
fn iteration_with_zero_data_stays_zero() {
    let p = problem(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 0.0);
    let grid = BoundaryGridSpec { n_theta: 8, n_phi: 16 };
    let run = iterate(&p, 0.5, 2, grid, SampleSpec { count: 10, seed: 1 }).unwrap();
    for s in &run.states {
        assert_eq!(s.l_plus.a.norm(), 0.0);
        assert_eq!(s.l_minus.a.norm(), 0.0);
        assert_eq!(s.l_plus.b, 0.0);
    }
}

#[test]
fn iteration_increments_are_cauchy() {
    let p = problem(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 1.0);
    let grid = BoundaryGridSpec { n_theta: 16, n_phi: 32 };
    let run = iterate(&p, 0.5, 4, grid, SampleSpec { count: 10, seed: 42 }).unwrap();
    assert!(run.failure.is_none());
    let s = &run.states;
    let c_fit = s[1].increment / (s[0].d_k);
    for k in 2..s.len() {
        let bound = 3.0 * c_fit * s[k - 1].d_k * 0.5f64.powi(k as i32 - 1);
        assert!(s[k].increment <= bound, "k={k}: {} > {bound}", s[k].increment);
        assert!(s[k].jump_defect(1.0) <= 1e-14);
    }
}
