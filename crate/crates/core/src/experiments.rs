//! Gradient blow-up scans for a `C^1` (non-Dini) interface and a continuous
//! (non-Dini) density, and the curved-versus-flat perturbation ratio.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::geometry::{
    make_density, make_interface, DensityFamily, Interface, InterfaceFamily, InterfaceGraph, SurfaceDensity, COUNTEREXAMPLE_CHART,
};
use crate::greens::BallContext;
use crate::point::Point;
use crate::potential::LayerProblem;
use crate::quadrature::QuadratureSpec;
use crate::sampling::ball_points;
use crate::scalar::Real;

/// `t / |log t|`, the profile of the non-Lipschitz example graph.
pub fn counterexample_profile<T: Real>(t: T) -> T {
    t / t.ln().abs()
}

/// The unique `r in (0, 1/4)` with `r / |log r| = eps`, by bisection to 1e-12.
pub fn r_epsilon<T: Real>(eps: T) -> Result<T> {
    let quarter = T::of(COUNTEREXAMPLE_CHART);
    let top = counterexample_profile(quarter);
    if !(eps > T::zero() && eps < top) {
        return argument(format!("eps must lie in (0, {top})"));
    }
    let (mut lo, mut hi) = (T::zero(), quarter);
    let tol = T::of(1e-12).max(T::epsilon() * quarter);
    while hi - lo > tol {
        let mid = (lo + hi) * T::of(0.5);
        if mid > T::zero() && counterexample_profile(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::of(0.5))
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return argument("line fit needs at least two paired samples");
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    if !(sxx > T::zero()) {
        return argument("line fit needs distinct abscissae");
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// One derivative per `eps_j = 2^{-j}` along the axis, plus a line fit of the
/// negated derivative against `log|log r|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupScan<T> {
    pub epsilons: Vec<T>,
    pub derivative_values: Vec<T>,
    /// Graph scan only: radius where the graph reaches height `eps`.
    pub r_epsilons: Option<Vec<T>>,
    /// `log|log r|` abscissae used for the fit.
    pub log_log: Vec<T>,
    pub est_errors: Vec<T>,
    pub converged: Vec<bool>,
    pub fit: LineFit<T>,
}

impl<T: Real> BlowupScan<T> {
    pub fn strictly_decreasing(&self) -> bool {
        self.derivative_values.windows(2).all(|w| w[1] < w[0])
    }

    /// `(max - min) / max |value|` over the scan.
    pub fn relative_variation(&self) -> T {
        let max = self.derivative_values.iter().copied().fold(T::neg_infinity(), T::max);
        let min = self.derivative_values.iter().copied().fold(T::infinity(), T::min);
        let scale = self.derivative_values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
        if scale == T::zero() {
            T::zero()
        } else {
            (max - min) / scale
        }
    }

    pub fn max_abs(&self) -> T {
        self.derivative_values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}

fn check_range(j_range: &[u32]) -> Result<()> {
    if j_range.len() < 2 {
        return argument("scan needs at least two j values");
    }
    if j_range.windows(2).any(|w| w[1] <= w[0]) {
        return argument("j values must be strictly increasing");
    }
    if j_range.iter().any(|&j| j == 0 || j > 40) {
        return argument("j values must lie in 1..=40");
    }
    Ok(())
}

/// Derivative `component` of `u` at `(0, ..., 0, eps_j)` for every `j`.
fn axis_scan<T: Real>(
    problem: &LayerProblem<T>,
    j_range: &[u32],
    component: usize,
) -> Result<(Vec<T>, Vec<T>, Vec<T>, Vec<bool>)> {
    let n = problem.dim();
    let epsilons: Vec<T> = j_range.iter().map(|&j| T::of(0.5f64.powi(j as i32))).collect();
    let results: Vec<_> = epsilons
        .par_iter()
        .map(|&eps| problem.evaluate_gradient(&Point::unit(n, n - 1).scale(eps)))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut errors = Vec::with_capacity(results.len());
    let mut converged = Vec::with_capacity(results.len());
    for r in results {
        let r = r?;
        values.push(r.value[component]);
        errors.push(r.est_error);
        converged.push(r.converged);
    }
    Ok((epsilons, values, errors, converged))
}

fn log_log<T: Real>(r: T) -> T {
    r.ln().abs().ln()
}

/// `d/dx_n u(0, eps)` for the non-Dini graph with `g = 1` in the chart ball
/// `B_{1/4}`; the graph scan of the blow-up experiment.
pub fn blowup_graph_scan<T: Real>(j_range: &[u32], n: usize, spec: QuadratureSpec<T>) -> Result<BlowupScan<T>> {
    let graph = make_interface(InterfaceFamily::CounterexampleGraph, n, None)?;
    graph_scan_on(graph, j_range, spec, true)
}

/// Same scan on a flat chart of radius 1 (the control run).
pub fn blowup_graph_control<T: Real>(j_range: &[u32], n: usize, spec: QuadratureSpec<T>) -> Result<BlowupScan<T>> {
    let graph = make_interface(InterfaceFamily::Flat, n, None)?;
    graph_scan_on(graph, j_range, spec, false)
}

fn graph_scan_on<T: Real>(graph: InterfaceGraph<T>, j_range: &[u32], spec: QuadratureSpec<T>, with_r: bool) -> Result<BlowupScan<T>> {
    check_range(j_range)?;
    let n = graph.dim();
    if n != 3 {
        return argument("blow-up scans run in n = 3");
    }
    let ctx = BallContext::new(n, graph.chart_radius())?;
    let g = make_density(DensityFamily::Constant { c: T::one() }, n)?;
    let problem = LayerProblem::new(ctx, Interface::Graph(graph), g, spec)?;
    let (epsilons, values, est_errors, converged) = axis_scan(&problem, j_range, n - 1)?;
    let r_eps = if with_r {
        Some(epsilons.iter().map(|&e| r_epsilon(e)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let abscissae: Vec<T> = match &r_eps {
        Some(r) => r.iter().map(|&v| log_log(v)).collect(),
        None => epsilons.iter().map(|&e| log_log(e)).collect(),
    };
    let neg: Vec<T> = values.iter().map(|&v| -v).collect();
    let fit = fit_line(&abscissae, &neg)?;
    Ok(BlowupScan {
        epsilons,
        derivative_values: values,
        r_epsilons: r_eps,
        log_log: abscissae,
        est_errors,
        converged,
        fit,
    })
}

/// Chart radius of the flat interface used by the density scans.
pub const DENSITY_CHART: f64 = 0.5;

/// `d/dx_1 u(0, eps)` on a flat chart `B_{1/2}` with `g(x) = eta(x_1)`.
pub fn blowup_density_scan<T: Real>(j_range: &[u32], n: usize, spec: QuadratureSpec<T>) -> Result<BlowupScan<T>> {
    density_scan_on(make_density(DensityFamily::CounterexampleEta, n)?, j_range, spec)
}

/// Same scan with `g = 1` (the symmetric control run).
pub fn blowup_density_control<T: Real>(j_range: &[u32], n: usize, spec: QuadratureSpec<T>) -> Result<BlowupScan<T>> {
    density_scan_on(make_density(DensityFamily::Constant { c: T::one() }, n)?, j_range, spec)
}

fn density_scan_on<T: Real>(g: SurfaceDensity<T>, j_range: &[u32], spec: QuadratureSpec<T>) -> Result<BlowupScan<T>> {
    check_range(j_range)?;
    let n = 3;
    let radius = T::of(DENSITY_CHART);
    let graph = make_interface(InterfaceFamily::Flat, n, Some(radius))?;
    let ctx = BallContext::new(n, radius)?;
    let problem = LayerProblem::new(ctx, Interface::Graph(graph), g, spec)?;
    let (epsilons, values, est_errors, converged) = axis_scan(&problem, j_range, 0)?;
    let abscissae: Vec<T> = epsilons.iter().map(|&e| log_log(e)).collect();
    let neg: Vec<T> = values.iter().map(|&v| -v).collect();
    let fit = fit_line(&abscissae, &neg)?;
    Ok(BlowupScan {
        epsilons,
        derivative_values: values,
        r_epsilons: None,
        log_log: abscissae,
        est_errors,
        converged,
        fit,
    })
}

/// Sup of `|u_curved - u_flat|` over `B_{rho r}` relative to `r omega(r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaScan<T> {
    pub rho: T,
    pub radii: Vec<T>,
    /// `omega(r)` with `omega = max(omega_psi, omega_g)`.
    pub omegas: Vec<T>,
    pub sups: Vec<T>,
    pub ratios: Vec<T>,
    pub est_errors: Vec<T>,
    pub converged: Vec<bool>,
    pub samples: usize,
}

impl<T: Real> KeyLemmaScan<T> {
    /// `max ratio / ratio at the first radius`.
    pub fn growth(&self) -> T {
        let first = self.ratios[0];
        let max = self.ratios.iter().copied().fold(T::zero(), T::max);
        if first > T::zero() {
            max / first
        } else if max == T::zero() {
            T::one()
        } else {
            T::infinity()
        }
    }
}

/// Quasi-random sampling of the sup region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 2000,
            seed: crate::sampling::DEFAULT_SEED,
        }
    }
}

/// For each `r`: solves `(B_r, Γ, g)` and the tangent-plane problem
/// `(B_r, {x_n = 0}, g(0))`, and reports `sup_{B_{rho r}} |u - v| / (r omega(r))`
/// over the sample points and the centre. Quadrature tolerances scale with `r`.
pub fn key_lemma_ratio<T: Real>(
    graph: &InterfaceGraph<T>,
    g: &SurfaceDensity<T>,
    rho: T,
    radii: &[T],
    grid: SampleSpec,
    spec: QuadratureSpec<T>,
) -> Result<KeyLemmaScan<T>> {
    let n = graph.dim();
    if n != 3 {
        return argument("key-lemma scan runs in n = 3");
    }
    if !(rho > T::zero() && rho <= T::of(0.5)) {
        return argument("rho must lie in (0, 1/2]");
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > T::zero() && r <= T::one())) {
        return argument("radii must lie in (0, 1]");
    }
    if graph.modulus().at(T::one()) > T::one() {
        return argument("interface modulus must satisfy omega(1) <= 1");
    }
    let flat = make_interface(InterfaceFamily::Flat, n, None)?;
    let g0 = make_density(DensityFamily::Constant { c: g.g0() }, n)?;
    let mut scan = KeyLemmaScan {
        rho,
        radii: radii.to_vec(),
        omegas: Vec::new(),
        sups: Vec::new(),
        ratios: Vec::new(),
        est_errors: Vec::new(),
        converged: Vec::new(),
        samples: 0,
    };
    for &r in radii {
        let ctx = BallContext::new(n, r)?;
        let local = spec.with_tol(spec.target_tol * r);
        let curved = LayerProblem::new(ctx, Interface::Graph(graph.clone()), g.clone(), local)?;
        let tangent = LayerProblem::new(ctx, Interface::Graph(flat.clone()), g0.clone(), local)?;
        let omega = curved.modulus().at(r);
        let mut points = vec![Point::zero(n)];
        points.extend(ball_points(n, rho * r, grid.count, grid.seed));
        scan.samples = points.len();
        let diffs: Vec<Result<(T, T, bool)>> = points
            .par_iter()
            .map(|x| {
                let u = curved.evaluate_solution(x)?;
                let v = tangent.evaluate_solution(x)?;
                Ok(((u.value - v.value).abs(), u.est_error + v.est_error, u.converged && v.converged))
            })
            .collect();
        let mut sup = T::zero();
        let mut err = T::zero();
        let mut ok = true;
        for d in diffs {
            let (w, e, c) = d?;
            sup = sup.max(w);
            err = err.max(e);
            ok &= c;
        }
        let scale = r * omega;
        let ratio = if sup == T::zero() {
            T::zero()
        } else if scale > T::zero() {
            sup / scale
        } else {
            T::infinity()
        };
        scan.omegas.push(omega);
        scan.sups.push(sup);
        scan.ratios.push(ratio);
        scan.est_errors.push(err);
        scan.converged.push(ok);
    }
    Ok(scan)
}

/// `∫_0^1 t^{n-3} (1 + t^2)^{-n/2} dt`, the inner constant of the density
/// blow-up lower bound; equals `1 / ((n - 2) 2^{(n-2)/2})`.
pub fn density_bound_constant<T: Real>(n: usize, spec: &QuadratureSpec<T>) -> Result<T> {
    if n < 3 {
        return argument("the constant is finite for n >= 3");
    }
    let q = crate::quadrature::Integrator::new(*spec);
    let half_n = T::of_usize(n) * T::of(0.5);
    let est = q.integrate(
        |t: T| t.powi(n as i32 - 3) * (T::one() + t * t).powf(-half_n),
        &[T::zero(), T::one()],
        spec.target_tol,
    );
    Ok(est.value)
}
