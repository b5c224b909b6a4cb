//! Fundamental solution of the Laplacian, the Green's function of a ball, and
//! mean-value formulas at the ball centre.

use rayon::prelude::*;

use crate::error::{argument, domain, Error, Result};
use crate::point::Point;
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// A ball `B_r` centred at the origin of R^n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallContext<T> {
    n: usize,
    r: T,
}

impl<T: Real> BallContext<T> {
    pub fn new(n: usize, r: T) -> Result<Self> {
        if n != 2 && n != 3 {
            return argument(format!("dimension n = {n} unsupported (expected 2 or 3)"));
        }
        if !(r > T::zero()) || !r.is_finite() {
            return argument("ball radius must be positive and finite");
        }
        Ok(Self { n, r })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> T {
        self.r
    }

    /// Normalizing constant of the fundamental solution: `2 pi` for n = 2,
    /// `4 pi` for n = 3.
    pub fn alpha(&self) -> T {
        surface_constant(self.n)
    }

    fn check(&self, x: &Point<T>, name: &str) -> Result<()> {
        if x.dim() != self.n {
            return argument(format!("{name} has dimension {}, expected {}", x.dim(), self.n));
        }
        // Allow points projected onto the sphere to carry a few ulps of error.
        if x.norm() > self.r * (T::one() + T::of(64.0) * T::epsilon()) {
            return domain(format!("{name} lies outside the closed ball of radius {}", self.r));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn surface_constant<T: Real>(n: usize) -> T {
    if n == 2 {
        T::PI() * T::of(2.0)
    } else {
        T::PI() * T::of(4.0)
    }
}

/// `Phi` as a function of the distance `rho > 0`.
#[inline]
pub fn phi_radial<T: Real>(n: usize, rho: T) -> T {
    if n == 2 {
        rho.ln() / surface_constant::<T>(2)
    } else {
        -T::one() / (surface_constant::<T>(3) * rho)
    }
}

/// `Phi'(rho) = 1 / (alpha rho^{n-1})`.
#[inline]
fn phi_radial_derivative<T: Real>(n: usize, rho: T) -> T {
    let a = surface_constant::<T>(n);
    if n == 2 {
        T::one() / (a * rho)
    } else {
        T::one() / (a * rho * rho)
    }
}

pub fn fundamental<T: Real>(ctx: &BallContext<T>, x: &Point<T>) -> Result<T> {
    let rho = x.norm();
    if rho == T::zero() {
        return Err(Error::Singular("fundamental solution at the origin".into()));
    }
    Ok(phi_radial(ctx.n, rho))
}

/// `grad Phi(x) = x / (alpha |x|^n)`.
pub fn fundamental_gradient<T: Real>(ctx: &BallContext<T>, x: &Point<T>) -> Result<Point<T>> {
    let rho = x.norm();
    if rho == T::zero() {
        return Err(Error::Singular("fundamental solution gradient at the origin".into()));
    }
    Ok(x.scale(phi_radial_derivative(ctx.n, rho) / rho))
}

/// `|r x/|x| - |x| y / r|^2`, written so that it is smooth at `x = 0`.
#[inline]
fn reflected_dist_sq<T: Real>(r: T, x: &Point<T>, y: &Point<T>) -> T {
    let v = r * r - T::of(2.0) * x.dot(y) + x.norm_sq() * y.norm_sq() / (r * r);
    v.max(T::zero())
}

/// The harmonic corrector `h^x(y) = Phi(r x/|x| - |x| y/r)`.
#[inline]
pub fn corrector<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> T {
    phi_radial(ctx.n, reflected_dist_sq(ctx.r, x, y).sqrt())
}

/// `G(x, y)` without argument checks; callers guarantee `x != y` inside the ball.
#[inline]
pub fn greens_unchecked<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> T {
    phi_radial(ctx.n, (*x - *y).norm()) - corrector(ctx, x, y)
}

/// `grad_x G(x, y)` without argument checks.
#[inline]
pub fn greens_gradient_unchecked<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> Point<T> {
    let d = *x - *y;
    let rho = d.norm();
    let direct = d.scale(phi_radial_derivative(ctx.n, rho) / rho);
    let z = reflected_dist_sq(ctx.r, x, y).sqrt();
    let r2 = ctx.r * ctx.r;
    let dz = x.scale(y.norm_sq() / r2) - *y;
    direct - dz.scale(phi_radial_derivative(ctx.n, z) / z)
}

fn check_pair<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> Result<()> {
    ctx.check(x, "x")?;
    ctx.check(y, "y")?;
    if (*x - *y).norm() == T::zero() {
        return Err(Error::Singular("Green's function on the diagonal x = y".into()));
    }
    Ok(())
}

/// `G(x, y) = Phi(x - y) - h^x(y)`, vanishing for `y` on the sphere.
pub fn greens_ball<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> Result<T> {
    check_pair(ctx, x, y)?;
    Ok(greens_unchecked(ctx, x, y))
}

/// Analytic `grad_x G(x, y)`, including the removable point `x = 0`.
pub fn greens_gradient_x<T: Real>(ctx: &BallContext<T>, x: &Point<T>, y: &Point<T>) -> Result<Point<T>> {
    check_pair(ctx, x, y)?;
    Ok(greens_gradient_unchecked(ctx, x, y))
}

/// Quadrature nodes on `∂B_r` with weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid<T> {
    pub points: Vec<Point<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> SphereGrid<T> {
    /// Product grid: Gauss-Legendre in `cos(theta)` (split at the equator,
    /// `n_theta / 2` nodes per hemisphere) times `n_phi` equispaced azimuths.
    /// For n = 2 only the `n_phi` equispaced angles are used.
    pub fn product(ctx: &BallContext<T>, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_phi == 0 || (ctx.n == 3 && n_theta < 2) {
            return argument("boundary grid must have at least one node per direction");
        }
        let r = ctx.r;
        let two_pi = T::PI() * T::of(2.0);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let azimuth = |k: usize| two_pi * T::of_usize(k) / T::of_usize(n_phi);
        if ctx.n == 2 {
            for k in 0..n_phi {
                let a = azimuth(k);
                points.push(Point::new(&[r * a.cos(), r * a.sin()]));
                weights.push(T::one() / T::of_usize(n_phi));
            }
        } else {
            let rule = gauss_legendre(n_theta / 2);
            for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
                for &(x, w) in &rule {
                    let t = T::of(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
                    let wt = T::of(0.25 * (hi - lo) * w);
                    let st = (T::one() - t * t).sqrt();
                    for k in 0..n_phi {
                        let a = azimuth(k);
                        points.push(Point::new(&[r * st * a.cos(), r * st * a.sin(), r * t]));
                        weights.push(wt / T::of_usize(n_phi));
                    }
                }
            }
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Value and gradient at the centre of the harmonic function with the given
/// boundary values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterValues<T> {
    pub v0: T,
    pub grad0: Point<T>,
}

/// Mean-value formulas: `v(0)` is the sphere average of `f` and
/// `grad v(0) = (n / r^2) * average of f(y) y`.
pub fn harmonic_center<T, F>(ctx: &BallContext<T>, grid: &SphereGrid<T>, f: F) -> Result<CenterValues<T>>
where
    T: Real,
    F: Fn(&Point<T>) -> T + Sync,
{
    let values: Vec<T> = grid.points.par_iter().map(|y| f(y)).collect();
    harmonic_center_from_samples(ctx, grid, &values)
}

/// As [`harmonic_center`] with boundary values already sampled on `grid`.
pub fn harmonic_center_from_samples<T: Real>(ctx: &BallContext<T>, grid: &SphereGrid<T>, values: &[T]) -> Result<CenterValues<T>> {
    if grid.is_empty() {
        return argument("boundary grid is empty");
    }
    if values.len() != grid.len() {
        return argument("one boundary value per grid node is required");
    }
    let mut v0 = T::zero();
    let mut moment = Point::zero(ctx.n);
    for ((y, &w), &v) in grid.points.iter().zip(&grid.weights).zip(values) {
        v0 = v0 + w * v;
        moment = moment + y.scale(w * v);
    }
    let scale = T::of_usize(ctx.n) / (ctx.r * ctx.r);
    Ok(CenterValues {
        v0,
        grad0: moment.scale(scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx3() -> BallContext<f64> {
        BallContext::new(3, 1.0).unwrap()
    }

    #[test]
    fn fundamental_values() {
        let c = ctx3();
        assert_relative_eq!(fundamental(&c, &Point::new(&[1.0, 0.0, 0.0])).unwrap(), -0.0795774715459477, epsilon = 1e-15);
        let c2 = BallContext::new(2, 1.0).unwrap();
        assert_eq!(fundamental(&c2, &Point::new(&[0.0, 1.0])).unwrap(), 0.0);
        let g = fundamental_gradient(&c, &Point::new(&[0.0, 2.0, 0.0])).unwrap();
        assert_relative_eq!(g.norm(), 1.0 / (16.0 * std::f64::consts::PI), epsilon = 1e-15);
        assert!(g[1] > 0.0);
        assert!(matches!(fundamental(&c, &Point::zero(3)), Err(Error::Singular(_))));
    }

    #[test]
    fn greens_at_centre() {
        let c = ctx3();
        let g = greens_ball(&c, &Point::zero(3), &Point::new(&[0.5, 0.0, 0.0])).unwrap();
        assert_relative_eq!(g, -1.0 / (4.0 * std::f64::consts::PI), epsilon = 1e-15);
    }

    #[test]
    fn greens_errors() {
        let c = ctx3();
        let x = Point::new(&[0.1, 0.2, 0.3]);
        assert!(matches!(greens_ball(&c, &x, &x), Err(Error::Singular(_))));
        assert!(matches!(greens_ball(&c, &x, &Point::new(&[2.0, 0.0, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_vanishing_2d() {
        let c = BallContext::<f64>::new(2, 0.7).unwrap();
        let x = Point::new(&[0.1, -0.3]);
        let y = Point::new(&[0.7 * 0.6, 0.7 * 0.8]);
        assert!(greens_ball(&c, &x, &y).unwrap().abs() < 1e-14);
    }

    #[test]
    fn centre_formulas() {
        let c = BallContext::<f64>::new(3, 0.5).unwrap();
        let grid = SphereGrid::product(&c, 32, 64).unwrap();
        let cv = harmonic_center(&c, &grid, |_| 2.0).unwrap();
        assert_relative_eq!(cv.v0, 2.0, epsilon = 1e-12);
        assert!(cv.grad0.norm() < 1e-14);
        let a = Point::new(&[0.3, -1.0, 2.0]);
        let cv = harmonic_center(&c, &grid, |y| a.dot(y)).unwrap();
        assert!(cv.v0.abs() < 1e-14);
        assert!((cv.grad0 - a).norm() < 1e-13);
        let cv = harmonic_center(&c, &grid, |y| y[0] * y[1]).unwrap();
        assert!(cv.v0.abs() < 1e-15 && cv.grad0.norm() < 1e-14);
        assert!(harmonic_center_from_samples(&c, &SphereGrid { points: vec![], weights: vec![] }, &[]).is_err());
    }
}
