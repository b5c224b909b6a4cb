//! The solution `u(x) = ∫_Γ G(x, y) g(y) dH^{n-1}(y)` of `Δu = g dH^{n-1}⌞Γ`
//! in a ball with zero boundary values, its gradient off the interface, the
//! normal-derivative jump across it, and one-sided affine fits.

use std::ops::Add;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, domain, Result};
use crate::geometry::{Interface, InterfaceGraph, Side, SphereInterface, SurfaceDensity};
use crate::greens::{greens_gradient_unchecked, greens_unchecked, BallContext};
use crate::point::Point;
use crate::quadrature::{Disk, Estimate, Integrator, NearPoint, QuadratureSpec};
use crate::sampling::ball_points_where;
use crate::scalar::Real;

/// Default one-sided offsets for [`LayerProblem::transmission_jump`].
pub const DEFAULT_H_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// `(B_r, Γ, g)` together with the quadrature settings used to evaluate `u`.
#[derive(Debug, Clone)]
pub struct LayerProblem<T> {
    ctx: BallContext<T>,
    interface: Interface<T>,
    density: SurfaceDensity<T>,
    integrator: Integrator<T>,
    /// Radius of the chart disk `{|y'| < R}` whose graph is `Γ ∩ B_r`.
    patch_radius: T,
}

impl<T: Real> LayerProblem<T> {
    pub fn new(ctx: BallContext<T>, interface: Interface<T>, density: SurfaceDensity<T>, spec: QuadratureSpec<T>) -> Result<Self> {
        spec.validate()?;
        let patch_radius = match &interface {
            Interface::Graph(g) => {
                if g.dim() != ctx.dim() {
                    return argument("interface and ball dimensions differ");
                }
                if g.chart_radius() < ctx.radius() {
                    return argument(format!(
                        "chart radius {} is smaller than the ball radius {}",
                        g.chart_radius(),
                        ctx.radius()
                    ));
                }
                g.clipped_radius(ctx.radius())
            }
            Interface::Sphere(s) => {
                if !(s.radius > T::zero() && s.radius < ctx.radius()) {
                    return argument("sphere interface radius must lie strictly inside the ball");
                }
                s.radius
            }
        };
        Ok(Self {
            ctx,
            interface,
            density,
            integrator: Integrator::new(spec),
            patch_radius,
        })
    }

    pub fn ctx(&self) -> &BallContext<T> {
        &self.ctx
    }

    pub fn interface(&self) -> &Interface<T> {
        &self.interface
    }

    pub fn density(&self) -> &SurfaceDensity<T> {
        &self.density
    }

    pub fn spec(&self) -> &QuadratureSpec<T> {
        self.integrator.spec()
    }

    /// Same problem with a different quadrature tolerance.
    pub fn with_tol(&self, tol: T) -> Self {
        let mut p = self.clone();
        p.integrator = Integrator::new(self.spec().with_tol(tol));
        p
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn side(&self, x: &Point<T>) -> Side {
        self.interface.point_side(x)
    }

    fn check_point(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.dim() || !x.is_finite() {
            return argument("evaluation point has the wrong dimension or is not finite");
        }
        if !(x.norm() < self.ctx.radius()) {
            return domain(format!("|x| = {} is not inside the open ball", x.norm()));
        }
        Ok(())
    }

    fn graph_near(&self, g: &InterfaceGraph<T>, x: &Point<T>) -> NearPoint<T> {
        let xt = x.tangential();
        let vertical = (x.normal() - g.psi(&xt)).abs();
        let tilt = g.area_element_unchecked(&xt);
        NearPoint {
            at: xt,
            distance: vertical / tilt,
        }
    }

    fn graph_integral<V, F>(&self, g: &InterfaceGraph<T>, x: &Point<T>, kernel: F) -> Estimate<V, T>
    where
        V: crate::quadrature::QuadValue<T>,
        F: Fn(&Point<T>, &Point<T>) -> V,
    {
        let disk = Disk {
            center: Point::zero(self.dim() - 1),
            radius: self.patch_radius,
        };
        let near = self.graph_near(g, x);
        let tol = self.spec().target_tol;
        self.integrator.graph_patch_integral(
            g,
            |yt| {
                let y = g.lift(yt);
                kernel(x, &y).scale(self.density.value(&y))
            },
            &disk,
            Some(&near),
            tol,
        )
    }

    fn sphere_integral<V, F>(&self, s: &SphereInterface<T>, x: &Point<T>, kernel: F) -> Estimate<V, T>
    where
        V: crate::quadrature::QuadValue<T>,
        F: Fn(&Point<T>, &Point<T>) -> V,
    {
        let tol = self.spec().target_tol;
        let pole = if x.norm() > T::zero() { Some(*x) } else { None };
        let near = pole.map(|p| (p.norm() - s.radius).abs());
        self.integrator.sphere_integral(
            self.dim(),
            s.radius,
            pole,
            near,
            |y| kernel(x, y).scale(self.density.value(y)),
            tol,
        )
    }

    /// `u(x)`, also on `Γ` itself where the kernel is integrable.
    pub fn evaluate_solution(&self, x: &Point<T>) -> Result<Estimate<T, T>> {
        self.check_point(x)?;
        if self.density.is_zero() {
            return Ok(exact(T::zero()));
        }
        let ctx = self.ctx;
        let kernel = move |x: &Point<T>, y: &Point<T>| {
            let v = greens_unchecked(&ctx, x, y);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        };
        Ok(match &self.interface {
            Interface::Graph(g) => self.graph_integral(g, x, kernel),
            Interface::Sphere(s) => self.sphere_integral(s, x, kernel),
        })
    }

    /// `grad u(x)` for `x` off the interface, by differentiating under the integral.
    pub fn evaluate_gradient(&self, x: &Point<T>) -> Result<Estimate<Point<T>, T>> {
        self.check_point(x)?;
        if self.side(x) == Side::OnInterface {
            return domain("gradient is discontinuous across the interface; use transmission_jump");
        }
        let n = self.dim();
        if self.density.is_zero() {
            return Ok(exact(Point::zero(n)));
        }
        let ctx = self.ctx;
        let kernel = move |x: &Point<T>, y: &Point<T>| -> [T; 3] { greens_gradient_unchecked(&ctx, x, y).raw() };
        let est = match &self.interface {
            Interface::Graph(g) => self.graph_integral(g, x, kernel),
            Interface::Sphere(s) => self.sphere_integral(s, x, kernel),
        };
        Ok(Estimate {
            value: Point::new(&est.value[..n]),
            est_error: est.est_error,
            panels: est.panels,
            converged: est.converged,
        })
    }

    /// Evaluates `u` at many points in parallel, preserving order.
    pub fn evaluate_many(&self, points: &[Point<T>]) -> Vec<Result<Estimate<T, T>>> {
        points.par_iter().map(|x| self.evaluate_solution(x)).collect()
    }

    pub fn evaluate_gradient_many(&self, points: &[Point<T>]) -> Vec<Result<Estimate<Point<T>, T>>> {
        points.par_iter().map(|x| self.evaluate_gradient(x)).collect()
    }

    /// Unit normal at a point of `Γ`, pointing into `Omega^+`.
    pub fn normal_at(&self, x0: &Point<T>) -> Point<T> {
        match &self.interface {
            Interface::Graph(g) => g.normal(&x0.tangential()),
            Interface::Sphere(s) => s.normal(x0),
        }
    }

    /// `omega = max(omega_psi, omega_g)`.
    pub fn modulus(&self) -> crate::modulus::Modulus<T> {
        use crate::modulus::Modulus;
        match (self.interface.modulus(), self.density.modulus().clone()) {
            (Modulus::Zero, m) | (m, Modulus::Zero) => m,
            (a, b) => Modulus::max_of(a, b),
        }
    }

    /// Convergence order of one-sided differences at scale `h`, read off the
    /// problem modulus between two offsets (2 for smooth data).
    pub fn extrapolation_order(&self, h_coarse: T, h_fine: T) -> T {
        let m = self.modulus();
        let two = T::of(2.0);
        let (a, b) = (m.at(h_coarse.min(T::one())), m.at(h_fine.min(T::one())));
        if !(b > T::zero()) || !(a > b) {
            return two;
        }
        ((a / b).ln() / (h_coarse / h_fine).ln()).min(two)
    }

    /// `u_ν^+ - u_ν^-` at `x0 ∈ Γ` from second-order one-sided differences
    /// at each offset of `h_ladder`, Richardson-extrapolated over the last
    /// two offsets with the order from [`Self::extrapolation_order`].
    pub fn transmission_jump(&self, x0: &Point<T>, h_ladder: &[T]) -> Result<JumpResult<T>> {
        let order = match h_ladder {
            [.., a, b] => self.extrapolation_order(*a, *b),
            _ => T::of(2.0),
        };
        self.transmission_jump_with_order(x0, h_ladder, order)
    }

    pub fn transmission_jump_with_order(&self, x0: &Point<T>, h_ladder: &[T], order: T) -> Result<JumpResult<T>> {
        if !(order > T::zero()) {
            return argument("extrapolation order must be positive");
        }
        self.check_point(x0)?;
        if h_ladder.is_empty() || h_ladder.iter().any(|&h| !(h > T::zero())) {
            return argument("h_ladder must contain positive offsets");
        }
        if h_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return argument("h_ladder must be strictly decreasing");
        }
        if self.side(x0) != Side::OnInterface {
            let gap = match &self.interface {
                Interface::Graph(g) => (x0.normal() - g.psi(&x0.tangential())).abs(),
                Interface::Sphere(s) => (x0.norm() - s.radius).abs(),
            };
            if gap > T::of(1e-10) {
                return argument("x0 is not on the interface");
            }
        }
        let nu = self.normal_at(x0);
        let two = T::of(2.0);
        for &h in h_ladder {
            for sgn in [T::one(), -T::one()] {
                if !((*x0 + nu * (sgn * two * h)).norm() < self.ctx.radius()) {
                    return argument("h_ladder leaves the ball");
                }
            }
        }
        let mut points = vec![*x0];
        for &h in h_ladder {
            for k in [1.0, 2.0, -1.0, -2.0] {
                points.push(*x0 + nu * (h * T::of(k)));
            }
        }
        let values = self.evaluate_many(&points);
        let mut u = Vec::with_capacity(values.len());
        let mut est_error = T::zero();
        let mut converged = true;
        for v in values {
            let v = v?;
            est_error = est_error.max(v.est_error);
            converged &= v.converged;
            u.push(v.value);
        }
        let u0 = u[0];
        let mut per_h = Vec::with_capacity(h_ladder.len());
        for (i, &h) in h_ladder.iter().enumerate() {
            let (p1, p2, m1, m2) = (u[1 + 4 * i], u[2 + 4 * i], u[3 + 4 * i], u[4 + 4 * i]);
            let plus = (T::of(-3.0) * u0 + T::of(4.0) * p1 - p2) / (two * h);
            let minus = (T::of(3.0) * u0 - T::of(4.0) * m1 + m2) / (two * h);
            per_h.push(JumpSample {
                h,
                derivative_plus: plus,
                derivative_minus: minus,
                jump: plus - minus,
            });
        }
        let jump = match per_h.len() {
            1 => per_h[0].jump,
            len => {
                let (a, b) = (&per_h[len - 2], &per_h[len - 1]);
                let q = (a.h / b.h).powf(order);
                b.jump + (b.jump - a.jump) / (q - T::one())
            }
        };
        Ok(JumpResult {
            jump,
            order,
            per_h,
            est_error,
            converged,
        })
    }

    /// Least-squares affine fit of `u` over quasi-random points of
    /// `Omega^± ∩ B_{fit_radius}`.
    pub fn fit_linear_approximation(&self, side: Side, fit_radius: T, sample_count: usize, seed: u64) -> Result<LinearFit<T>> {
        if side == Side::OnInterface {
            return argument("fit side must be plus or minus");
        }
        if !(fit_radius > T::zero() && fit_radius <= self.ctx.radius() * T::of(0.5)) {
            return argument("fit_radius must lie in (0, r/2]");
        }
        let n = self.dim();
        let points = ball_points_where(n, fit_radius, sample_count, seed, |x| self.side(x) == side);
        let values = self.evaluate_many(&points);
        let mut samples = Vec::with_capacity(points.len());
        let mut est_error = T::zero();
        let mut converged = true;
        for (x, v) in points.iter().zip(values) {
            let v = v?;
            est_error = est_error.max(v.est_error);
            converged &= v.converged;
            samples.push((*x, v.value));
        }
        let mut fit = fit_affine(&samples, fit_radius)?;
        fit.est_error = est_error;
        fit.converged = converged;
        Ok(fit)
    }
}

fn exact<V, T: Real>(value: V) -> Estimate<V, T> {
    Estimate {
        value,
        est_error: T::zero(),
        panels: 0,
        converged: true,
    }
}

/// Per-offset one-sided derivatives and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpSample<T> {
    pub h: T,
    pub derivative_plus: T,
    pub derivative_minus: T,
    pub jump: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpResult<T> {
    pub jump: T,
    /// Richardson order used for the extrapolation.
    pub order: T,
    pub per_h: Vec<JumpSample<T>>,
    /// Largest quadrature error estimate among the point evaluations.
    pub est_error: T,
    pub converged: bool,
}

/// Closed-form solution for `Γ = ∂B_s`, constant density `g0`, `n = 3`:
/// `u(x) = -g0 s^2 (1 / max(|x|, s) - 1 / r)`.
pub fn radial_oracle<T: Real>(norm_x: T, s: T, ctx: &BallContext<T>, g0: T) -> Result<T> {
    if ctx.dim() != 3 {
        return argument("radial oracle is stated for n = 3");
    }
    if !(s > T::zero() && s < ctx.radius()) {
        return argument("shell radius must satisfy 0 < s < r");
    }
    if !(norm_x >= T::zero() && norm_x <= ctx.radius()) {
        return domain("|x| must lie in [0, r]");
    }
    Ok(-g0 * s * s * (T::one() / norm_x.max(s) - T::one() / ctx.radius()))
}

/// `l(x) = a · x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPolynomial<T> {
    pub a: Point<T>,
    pub b: T,
}

impl<T: Real> LinearPolynomial<T> {
    pub fn zero(n: usize) -> Self {
        Self { a: Point::zero(n), b: T::zero() }
    }

    #[inline]
    pub fn eval(&self, x: &Point<T>) -> T {
        self.a.dot(x) + self.b
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

impl<T: Real> Add for LinearPolynomial<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    pub poly: LinearPolynomial<T>,
    /// `max |u - l|` over the samples.
    pub residual_sup: T,
    pub samples: usize,
    pub est_error: T,
    pub converged: bool,
}

/// Least-squares affine fit to `(x, value)` samples; coordinates are scaled
/// by `scale` internally for conditioning.
pub fn fit_affine<T: Real>(samples: &[(Point<T>, T)], scale: T) -> Result<LinearFit<T>> {
    let Some(first) = samples.first() else {
        return argument("no samples to fit");
    };
    let n = first.0.dim();
    if samples.len() < n + 1 {
        return argument(format!("need at least {} samples for an affine fit, got {}", n + 1, samples.len()));
    }
    let m = n + 1;
    let mut ata = vec![vec![T::zero(); m]; m];
    let mut atb = vec![T::zero(); m];
    for (x, v) in samples {
        let mut row = Vec::with_capacity(m);
        row.extend(x.coords().iter().map(|&c| c / scale));
        row.push(T::one());
        for i in 0..m {
            for j in 0..m {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            atb[i] = atb[i] + row[i] * *v;
        }
    }
    let coef = solve_dense(ata, atb)?;
    let a = Point::new(&coef[..n].iter().map(|&c| c / scale).collect::<Vec<_>>());
    let poly = LinearPolynomial { a, b: coef[n] };
    let residual_sup = samples
        .iter()
        .map(|(x, v)| (*v - poly.eval(x)).abs())
        .fold(T::zero(), T::max);
    Ok(LinearFit {
        poly,
        residual_sup,
        samples: samples.len(),
        est_error: T::zero(),
        converged: true,
    })
}

/// Gaussian elimination with partial pivoting for small dense systems.
fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[pivot][col].abs() <= T::epsilon() * T::of(1e3) {
            return argument("samples do not determine an affine fit");
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); m];
    for row in (0..m).rev() {
        let s: T = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_density, make_interface, DensityFamily, InterfaceFamily};
    use approx::assert_relative_eq;

    fn flat_problem(c: f64) -> LayerProblem<f64> {
        let ctx = BallContext::new(3, 1.0).unwrap();
        let g = make_interface(InterfaceFamily::Flat, 3, None).unwrap();
        let d = make_density(DensityFamily::Constant { c }, 3).unwrap();
        LayerProblem::new(ctx, Interface::Graph(g), d, QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn flat_centre_value() {
        let p = flat_problem(1.0);
        let u = p.evaluate_solution(&Point::zero(3)).unwrap();
        assert!(u.converged);
        assert_relative_eq!(u.value, -0.25, epsilon = 1e-6);
    }

    #[test]
    fn zero_density_gives_zero() {
        let p = flat_problem(0.0);
        let x = Point::new(&[0.1, 0.2, 0.3]);
        assert_eq!(p.evaluate_solution(&x).unwrap().value, 0.0);
        assert_eq!(p.evaluate_gradient(&x).unwrap().value.norm(), 0.0);
        let j = p.transmission_jump(&Point::zero(3), &[1e-2, 5e-3]).unwrap();
        assert_eq!(j.jump, 0.0);
    }

    #[test]
    fn radial_oracle_values() {
        let ctx = BallContext::new(3, 1.0).unwrap();
        assert_relative_eq!(radial_oracle(0.3, 0.5, &ctx, 1.0).unwrap(), -0.25);
        assert_relative_eq!(radial_oracle(0.75, 0.5, &ctx, 1.0).unwrap(), -1.0 / 12.0, epsilon = 1e-15);
        assert_eq!(radial_oracle(1.0, 0.5, &ctx, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gradient_on_interface_is_domain_error() {
        let p = flat_problem(1.0);
        assert!(matches!(p.evaluate_gradient(&Point::new(&[0.1, 0.0, 0.0])), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn affine_fit_recovers_plane() {
        let a = Point::new(&[1.0, -2.0, 0.5]);
        let samples: Vec<_> = crate::sampling::ball_points::<f64>(3, 0.1, 50, 1)
            .into_iter()
            .map(|x| (x, a.dot(&x) + 0.25))
            .collect();
        let fit = fit_affine(&samples, 0.1).unwrap();
        assert!((fit.poly.a - a).norm() < 1e-10);
        assert_relative_eq!(fit.poly.b, 0.25, epsilon = 1e-12);
        assert!(fit_affine(&samples[..3], 0.1).is_err());
    }
}
