//! Graph interfaces `x_n = psi(x')`, surface densities, and the analytic
//! sphere fixture.
//!
//! Every built-in graph is radial, `psi(x') = f(|x'|)`, normalized so that
//! `psi(0) = 0` and `grad psi(0) = 0`. The upper side `{x_n > psi(x')}` is
//! `Omega^+` and the unit normal points into it.

use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Result};
use crate::modulus::Modulus;
use crate::point::Point;
use crate::scalar::Real;

/// Radius of the chart on which the non-Lipschitz example graph is defined.
pub const COUNTEREXAMPLE_CHART: f64 = 0.25;

/// Radial profile of a graph interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile<T> {
    Flat,
    /// `k |x'|^{1 + alpha}`.
    Holder { alpha: T, k: T },
    /// `|x'| / |log |x'||`: `C^1` but not `C^{1,Dini}` at the origin.
    Counterexample,
    /// Piecewise-linear radial slope `psi'(rho)` through the samples, starting
    /// from slope 0 at `rho = 0`; `heights` caches `psi` at the nodes.
    Table { radii: Vec<T>, slopes: Vec<T>, heights: Vec<T> },
}

impl<T: Real> Profile<T> {
    fn value(&self, rho: T) -> T {
        match self {
            Self::Flat => T::zero(),
            Self::Holder { alpha, k } => *k * rho.powf(T::one() + *alpha),
            Self::Counterexample => {
                if rho <= T::zero() {
                    T::zero()
                } else {
                    rho / rho.ln().abs()
                }
            }
            Self::Table { radii, slopes, heights } => {
                let last = radii.len() - 1;
                if rho >= radii[last] {
                    return heights[last] + slopes[last] * (rho - radii[last]);
                }
                let i = radii.partition_point(|&r| r <= rho) - 1;
                let h = rho - radii[i];
                let ds = (slopes[i + 1] - slopes[i]) / (radii[i + 1] - radii[i]);
                heights[i] + slopes[i] * h + ds * h * h * T::of(0.5)
            }
        }
    }

    fn slope(&self, rho: T) -> T {
        match self {
            Self::Flat => T::zero(),
            Self::Holder { alpha, k } => *k * (T::one() + *alpha) * rho.powf(*alpha),
            Self::Counterexample => {
                if rho <= T::zero() {
                    T::zero()
                } else {
                    let l = rho.ln().abs();
                    (l + T::one()) / (l * l)
                }
            }
            Self::Table { radii, slopes, .. } => {
                let last = radii.len() - 1;
                if rho >= radii[last] {
                    return slopes[last];
                }
                let i = radii.partition_point(|&r| r <= rho) - 1;
                let t = (rho - radii[i]) / (radii[i + 1] - radii[i]);
                slopes[i] + t * (slopes[i + 1] - slopes[i])
            }
        }
    }
}

/// A graph interface in normalized tangent-plane coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceGraph<T> {
    n: usize,
    profile: Profile<T>,
    /// `K`: constant in `|grad psi(y')| <= K omega_psi(|y'|)`.
    seminorm: T,
    omega: Modulus<T>,
    chart_radius: T,
}

/// Which built-in graph to construct.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceFamily<T> {
    Flat,
    Holder { alpha: T, k: T },
    CounterexampleGraph,
    /// Radial slope samples; `radii[0]` must be 0 with slope 0 there.
    Table { radii: Vec<T>, slopes: Vec<T> },
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        argument(format!("dimension n = {n} unsupported (expected 2 or 3)"))
    }
}

/// Builds a normalized graph interface. `chart_radius` defaults to 1 (1/4
/// for the counterexample graph, which is only defined there).
pub fn make_interface<T: Real>(family: InterfaceFamily<T>, n: usize, chart_radius: Option<T>) -> Result<InterfaceGraph<T>> {
    check_dim(n)?;
    let (profile, seminorm, omega, max_chart) = match family {
        InterfaceFamily::Flat => (Profile::Flat, T::zero(), Modulus::Zero, T::one()),
        InterfaceFamily::Holder { alpha, k } => {
            if !(alpha > T::zero() && alpha <= T::one()) {
                return argument("holder interface needs 0 < alpha <= 1");
            }
            if !(k >= T::zero()) || !k.is_finite() {
                return argument("holder interface needs k >= 0");
            }
            let omega = if k > T::zero() { Modulus::power(alpha)? } else { Modulus::Zero };
            (Profile::Holder { alpha, k }, k * (T::one() + alpha), omega, T::one())
        }
        InterfaceFamily::CounterexampleGraph => {
            let quarter = T::of(COUNTEREXAMPLE_CHART);
            // Sup over (0, 1/4) of (|log r| + 1) / |log r| is attained at r = 1/4.
            let k = T::one() + T::one() / quarter.ln().abs();
            (Profile::Counterexample, k, Modulus::InverseLog, quarter)
        }
        InterfaceFamily::Table { radii, slopes } => {
            if radii.len() < 2 || radii.len() != slopes.len() {
                return argument("table interface needs at least two (radius, slope) samples");
            }
            if radii[0] != T::zero() || slopes[0] != T::zero() {
                return argument("table interface must start at radius 0 with slope 0");
            }
            if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().chain(slopes.iter()).any(|v| !v.is_finite()) {
                return argument("table interface radii must be finite and strictly increasing");
            }
            let mut heights = vec![T::zero(); radii.len()];
            for i in 1..radii.len() {
                heights[i] = heights[i - 1] + (slopes[i] + slopes[i - 1]) * (radii[i] - radii[i - 1]) * T::of(0.5);
            }
            let mut running = T::zero();
            let envelope: Vec<T> = slopes
                .iter()
                .map(|s| {
                    running = running.max(s.abs());
                    running
                })
                .collect();
            let k = running;
            let omega = if k > T::zero() {
                Modulus::table(radii.clone(), envelope.iter().map(|&e| e / k).collect())?
            } else {
                Modulus::Zero
            };
            (Profile::Table { radii, slopes, heights }, k, omega, T::one())
        }
    };
    let chart_radius = chart_radius.unwrap_or(max_chart);
    if !(chart_radius > T::zero() && chart_radius <= max_chart) {
        return argument(format!("chart radius must lie in (0, {max_chart}]"));
    }
    Ok(InterfaceGraph {
        n,
        profile,
        seminorm,
        omega,
        chart_radius,
    })
}

impl<T: Real> InterfaceGraph<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn seminorm(&self) -> T {
        self.seminorm
    }

    pub fn modulus(&self) -> &Modulus<T> {
        &self.omega
    }

    pub fn chart_radius(&self) -> T {
        self.chart_radius
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.profile, Profile::Flat)
    }

    /// Restricts the chart to a smaller radius.
    pub fn with_chart_radius(mut self, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius <= self.chart_radius) {
            return argument("chart can only shrink");
        }
        self.chart_radius = radius;
        Ok(self)
    }

    /// `psi` as a function of `|y'|`.
    pub fn radial_value(&self, rho: T) -> T {
        self.profile.value(rho)
    }

    /// `|grad psi|` as a function of `|y'|`.
    pub fn radial_slope(&self, rho: T) -> T {
        self.profile.slope(rho)
    }

    pub fn psi(&self, y: &Point<T>) -> T {
        self.profile.value(y.norm())
    }

    pub fn grad_psi(&self, y: &Point<T>) -> Point<T> {
        let rho = y.norm();
        if rho == T::zero() {
            return Point::zero(y.dim());
        }
        y.scale(self.profile.slope(rho) / rho)
    }

    fn check_chart(&self, y: &Point<T>) -> Result<()> {
        if y.dim() + 1 != self.n {
            return argument("chart point has the wrong dimension");
        }
        if !(y.norm() < self.chart_radius) {
            return domain(format!("|y'| = {} outside chart radius {}", y.norm(), self.chart_radius));
        }
        Ok(())
    }

    /// Surface measure density `sqrt(1 + |grad psi(y')|^2)`.
    pub fn area_element(&self, y: &Point<T>) -> Result<T> {
        self.check_chart(y)?;
        Ok(self.area_element_unchecked(y))
    }

    #[inline]
    pub fn area_element_unchecked(&self, y: &Point<T>) -> T {
        match self.profile {
            Profile::Flat => T::one(),
            _ => {
                let s = self.profile.slope(y.norm());
                (T::one() + s * s).sqrt()
            }
        }
    }

    /// The surface point `(y', psi(y'))`.
    pub fn lift(&self, y: &Point<T>) -> Point<T> {
        Point::lift(y, self.psi(y))
    }

    /// Unit normal at `(y', psi(y'))`, pointing into `Omega^+`.
    pub fn normal(&self, y: &Point<T>) -> Point<T> {
        let g = self.grad_psi(y);
        let v = Point::lift(&(-g), T::one());
        v.scale(T::one() / v.norm())
    }

    /// Which side of the graph `x` lies on.
    pub fn point_side(&self, x: &Point<T>) -> Side {
        let gap = x.normal() - self.psi(&x.tangential());
        let band = T::of(1e-14);
        if gap > band {
            Side::Plus
        } else if gap < -band {
            Side::Minus
        } else {
            Side::OnInterface
        }
    }

    /// Largest `|y'|` with `|(y', psi(y'))| <= r`, capped by the chart radius.
    pub fn clipped_radius(&self, r: T) -> T {
        let inside = |rho: T| {
            let h = self.profile.value(rho);
            rho * rho + h * h <= r * r
        };
        let cap = self.chart_radius.min(r);
        if inside(cap) {
            return cap;
        }
        let (mut lo, mut hi) = (T::zero(), cap);
        for _ in 0..200 {
            let mid = (lo + hi) * T::of(0.5);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * cap {
                break;
            }
        }
        lo
    }
}

/// Side of an interface a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
    OnInterface,
}

/// Sphere `|y| = radius` used as an analytic test surface. `Omega^+` is the
/// enclosed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereInterface<T> {
    pub radius: T,
}

impl<T: Real> SphereInterface<T> {
    pub fn point_side(&self, x: &Point<T>) -> Side {
        let gap = self.radius - x.norm();
        let band = T::of(1e-14);
        if gap > band {
            Side::Plus
        } else if gap < -band {
            Side::Minus
        } else {
            Side::OnInterface
        }
    }

    /// Inward normal (into the enclosed ball) at a point of the sphere.
    pub fn normal(&self, x: &Point<T>) -> Point<T> {
        x.scale(-T::one() / x.norm())
    }
}

/// Radial / coordinate profile of a density.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityProfile<T> {
    Constant { c: T },
    /// `base + a |x|^alpha`.
    Holder { alpha: T, a: T, base: T },
    /// `eta(x_1)`: `1 / |log x_1|` for `x_1 > 0`, zero otherwise.
    CounterexampleEta,
    /// Piecewise-linear in `|x|`.
    Table { radii: Vec<T>, values: Vec<T> },
}

/// A density `g` on the interface with its base value and modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDensity<T> {
    profile: DensityProfile<T>,
    g0: T,
    omega: Modulus<T>,
    seminorm: T,
}

/// Which built-in density to construct.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily<T> {
    Constant { c: T },
    Holder { alpha: T, a: T, base: T },
    CounterexampleEta,
    Table { radii: Vec<T>, values: Vec<T> },
}

pub fn make_density<T: Real>(family: DensityFamily<T>, n: usize) -> Result<SurfaceDensity<T>> {
    check_dim(n)?;
    let finite = |v: T, name: &str| -> Result<()> {
        if v.is_finite() {
            Ok(())
        } else {
            argument(format!("density parameter {name} must be finite"))
        }
    };
    Ok(match family {
        DensityFamily::Constant { c } => {
            finite(c, "c")?;
            SurfaceDensity {
                profile: DensityProfile::Constant { c },
                g0: c,
                omega: Modulus::Zero,
                seminorm: T::zero(),
            }
        }
        DensityFamily::Holder { alpha, a, base } => {
            finite(a, "a")?;
            finite(base, "base")?;
            if !(alpha > T::zero() && alpha <= T::one()) {
                return argument("holder density needs 0 < alpha <= 1");
            }
            SurfaceDensity {
                profile: DensityProfile::Holder { alpha, a, base },
                g0: base,
                omega: if a != T::zero() { Modulus::power(alpha)? } else { Modulus::Zero },
                seminorm: a.abs(),
            }
        }
        DensityFamily::CounterexampleEta => SurfaceDensity {
            profile: DensityProfile::CounterexampleEta,
            g0: T::zero(),
            omega: Modulus::InverseLog,
            seminorm: T::LN_2().recip(),
        },
        DensityFamily::Table { radii, values } => {
            if radii.len() < 2 || radii.len() != values.len() {
                return argument("table density needs at least two (radius, value) samples");
            }
            if radii[0] != T::zero() || radii.windows(2).any(|w| w[1] <= w[0]) {
                return argument("table density radii must start at 0 and increase strictly");
            }
            if radii.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                return argument("table density samples must be finite");
            }
            let g0 = values[0];
            let mut running = T::zero();
            let envelope: Vec<T> = values
                .iter()
                .map(|v| {
                    running = running.max((*v - g0).abs());
                    running
                })
                .collect();
            let omega = if running > T::zero() {
                Modulus::table(radii.clone(), envelope)?
            } else {
                Modulus::Zero
            };
            SurfaceDensity {
                profile: DensityProfile::Table { radii, values },
                g0,
                omega,
                seminorm: T::one(),
            }
        }
    })
}

/// `eta(t)` from the continuous-but-not-Dini density example.
pub fn eta<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        T::one() / t.min(T::of(0.5)).ln().abs()
    }
}

impl<T: Real> SurfaceDensity<T> {
    /// `g(x)` at a surface point.
    #[inline]
    pub fn value(&self, x: &Point<T>) -> T {
        match &self.profile {
            DensityProfile::Constant { c } => *c,
            DensityProfile::Holder { alpha, a, base } => *base + *a * x.norm().powf(*alpha),
            DensityProfile::CounterexampleEta => eta(x[0]),
            DensityProfile::Table { radii, values } => {
                let r = x.norm();
                let last = radii.len() - 1;
                if r >= radii[last] {
                    return values[last];
                }
                let i = radii.partition_point(|&q| q <= r) - 1;
                let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    pub fn g0(&self) -> T {
        self.g0
    }

    pub fn modulus(&self) -> &Modulus<T> {
        &self.omega
    }

    pub fn seminorm(&self) -> T {
        self.seminorm
    }

    pub fn profile(&self) -> &DensityProfile<T> {
        &self.profile
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, DensityProfile::Constant { c } if c == T::zero())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.profile, DensityProfile::Constant { .. })
    }

    /// `|g|_{C^{0,Dini}(0)} = |g(0)| + [g]`.
    pub fn dini_norm(&self) -> T {
        self.g0.abs() + self.seminorm
    }
}

/// JSON-facing descriptor: `{"family": "...", "params": {...}, "n": 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    pub family: String,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

/// Union of the parameters any family accepts; each family reads its own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<Box<FamilyDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<Box<FamilyDescriptor>>,
}

fn need<V: Clone>(v: &Option<V>, family: &str, name: &str) -> Result<V> {
    v.clone()
        .ok_or_else(|| crate::Error::Argument(format!("params.{name} is required for family {family}")))
}

fn cast<T: Real>(v: Vec<f64>) -> Vec<T> {
    v.into_iter().map(T::of).collect()
}

/// Either a graph chart or the sphere fixture.
#[derive(Debug, Clone, PartialEq)]
pub enum Interface<T> {
    Graph(InterfaceGraph<T>),
    Sphere(SphereInterface<T>),
}

impl<T: Real> Interface<T> {
    pub fn point_side(&self, x: &Point<T>) -> Side {
        match self {
            Self::Graph(g) => g.point_side(x),
            Self::Sphere(s) => s.point_side(x),
        }
    }

    /// `omega_psi`; the sphere is smooth, reported as `Zero`.
    pub fn modulus(&self) -> Modulus<T> {
        match self {
            Self::Graph(g) => g.modulus().clone(),
            Self::Sphere(_) => Modulus::Zero,
        }
    }
}

impl FamilyDescriptor {
    pub fn interface<T: Real>(&self, n: usize) -> Result<Interface<T>> {
        let p = &self.params;
        let f = self.family.as_str();
        let n = self.n.unwrap_or(n);
        let chart = p.chart_radius.map(T::of);
        let family = match f {
            "flat" => InterfaceFamily::Flat,
            "holder" => InterfaceFamily::Holder {
                alpha: T::of(need(&p.alpha, f, "alpha")?),
                k: T::of(p.k.unwrap_or(1.0)),
            },
            "counterexample_graph" => InterfaceFamily::CounterexampleGraph,
            "table" => InterfaceFamily::Table {
                radii: cast(need(&p.radii, f, "radii")?),
                slopes: cast(need(&p.slopes, f, "slopes")?),
            },
            "sphere" => {
                check_dim(n)?;
                let radius = need(&p.radius, f, "radius")?;
                if !(radius > 0.0) {
                    return argument("params.radius must be positive");
                }
                return Ok(Interface::Sphere(SphereInterface { radius: T::of(radius) }));
            }
            other => return argument(format!("family: unknown interface family '{other}'")),
        };
        Ok(Interface::Graph(make_interface(family, n, chart)?))
    }

    pub fn density<T: Real>(&self, n: usize) -> Result<SurfaceDensity<T>> {
        let p = &self.params;
        let f = self.family.as_str();
        let n = self.n.unwrap_or(n);
        let family = match f {
            "constant" => DensityFamily::Constant {
                c: T::of(need(&p.c, f, "c")?),
            },
            "holder" => DensityFamily::Holder {
                alpha: T::of(need(&p.alpha, f, "alpha")?),
                a: T::of(p.a.unwrap_or(1.0)),
                base: T::of(p.base.unwrap_or(1.0)),
            },
            "counterexample_eta" => DensityFamily::CounterexampleEta,
            "table" => DensityFamily::Table {
                radii: cast(need(&p.radii, f, "radii")?),
                values: cast(need(&p.values, f, "values")?),
            },
            other => return argument(format!("family: unknown density family '{other}'")),
        };
        make_density(family, n)
    }

    pub fn modulus<T: Real>(&self) -> Result<Modulus<T>> {
        let p = &self.params;
        let f = self.family.as_str();
        match f {
            "zero" => Ok(Modulus::Zero),
            "power" => Modulus::power(T::of(need(&p.alpha, f, "alpha")?)),
            "inverse_log" => Ok(Modulus::InverseLog),
            "log_power" => Modulus::log_power(T::of(need(&p.beta, f, "beta")?)),
            "table" => Modulus::table(cast(need(&p.r, f, "r")?), cast(need(&p.omega, f, "omega")?)),
            "max_of" => Ok(Modulus::max_of(
                need(&p.first, f, "first")?.modulus()?,
                need(&p.second, f, "second")?.modulus()?,
            )),
            other => argument(format!("family: unknown modulus family '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_interface() {
        let g = make_interface::<f64>(InterfaceFamily::Flat, 3, None).unwrap();
        let y = Point::new(&[0.3, -0.2]);
        assert_eq!(g.psi(&y), 0.0);
        assert_eq!(g.grad_psi(&y).norm(), 0.0);
        assert_eq!(g.seminorm(), 0.0);
        assert_eq!(g.area_element(&y).unwrap(), 1.0);
    }

    #[test]
    fn counterexample_graph_values() {
        let g = make_interface::<f64>(InterfaceFamily::CounterexampleGraph, 3, None).unwrap();
        let r = (-2.0f64).exp();
        let y = Point::new(&[r, 0.0]);
        assert_relative_eq!(g.psi(&y), r / 2.0, epsilon = 1e-15);
        assert_relative_eq!(g.psi(&y), 0.06766764161830635, epsilon = 1e-12);
        // |grad psi| = (|log r| + 1) / log^2 r = 3/4.
        assert_relative_eq!(g.area_element(&y).unwrap(), 1.25, epsilon = 1e-14);
        assert_eq!(g.modulus(), &Modulus::InverseLog);
        assert_eq!(g.chart_radius(), 0.25);
    }

    #[test]
    fn holder_graph_values() {
        let g = make_interface::<f64>(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 3, None).unwrap();
        assert_relative_eq!(g.psi(&Point::new(&[0.04, 0.0])), 0.008, epsilon = 1e-15);
        assert_relative_eq!(g.area_element(&Point::new(&[0.0, 0.25])).unwrap(), 1.25, epsilon = 1e-14);
    }

    #[test]
    fn area_element_outside_chart_is_domain_error() {
        let g = make_interface::<f64>(InterfaceFamily::CounterexampleGraph, 3, None).unwrap();
        assert!(matches!(g.area_element(&Point::new(&[0.3, 0.0])), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(make_interface::<f64>(InterfaceFamily::Holder { alpha: 0.0, k: 1.0 }, 3, None).is_err());
        assert!(make_interface::<f64>(InterfaceFamily::Holder { alpha: 0.5, k: -1.0 }, 3, None).is_err());
        assert!(make_interface::<f64>(InterfaceFamily::Flat, 4, None).is_err());
        assert!(make_interface::<f64>(InterfaceFamily::CounterexampleGraph, 3, Some(0.5)).is_err());
        assert!(make_density::<f64>(DensityFamily::Holder { alpha: 2.0, a: 1.0, base: 1.0 }, 3).is_err());
    }

    #[test]
    fn densities() {
        let c = make_density::<f64>(DensityFamily::Constant { c: 1.0 }, 3).unwrap();
        assert_eq!(c.value(&Point::new(&[0.1, 0.2, 0.0])), 1.0);
        assert_eq!(c.g0(), 1.0);
        assert_eq!(c.modulus(), &Modulus::Zero);

        let e = make_density::<f64>(DensityFamily::CounterexampleEta, 3).unwrap();
        assert_relative_eq!(e.value(&Point::new(&[(-4.0f64).exp(), 0.0, 0.0])), 0.25, epsilon = 1e-15);
        assert_eq!(e.value(&Point::new(&[-0.1, 0.0, 0.0])), 0.0);

        let h = make_density::<f64>(DensityFamily::Holder { alpha: 0.5, a: 1.0, base: 1.0 }, 3).unwrap();
        assert_eq!(h.g0(), 1.0);
        assert_relative_eq!(h.value(&Point::new(&[0.0, 0.25, 0.0])), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn point_sides() {
        let flat = make_interface::<f64>(InterfaceFamily::Flat, 2, None).unwrap();
        assert_eq!(flat.point_side(&Point::new(&[0.0, 0.1])), Side::Plus);
        assert_eq!(flat.point_side(&Point::new(&[0.0, -0.1])), Side::Minus);
        let g = make_interface::<f64>(InterfaceFamily::CounterexampleGraph, 3, None).unwrap();
        let y = Point::new(&[0.05, 0.1]);
        assert_eq!(g.point_side(&g.lift(&y)), Side::OnInterface);
    }

    #[test]
    fn table_interface_integrates_slopes() {
        let g = make_interface::<f64>(
            InterfaceFamily::Table { radii: vec![0.0, 0.5, 1.0], slopes: vec![0.0, 0.5, 0.5] },
            3,
            None,
        )
        .unwrap();
        // psi(0.5) = int_0^0.5 t dt = 0.125; then slope 0.5.
        assert_relative_eq!(g.radial_value(0.5), 0.125, epsilon = 1e-15);
        assert_relative_eq!(g.radial_value(0.75), 0.25, epsilon = 1e-15);
        assert_relative_eq!(g.seminorm(), 0.5);
        assert!(g.modulus().at(1.0) <= 1.0);
    }

    #[test]
    fn clipped_radius_of_holder_graph() {
        let g = make_interface::<f64>(InterfaceFamily::Holder { alpha: 0.5, k: 1.0 }, 3, None).unwrap();
        let r = g.clipped_radius(0.5);
        assert_relative_eq!(r * r + g.radial_value(r).powi(2), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn descriptors_parse_and_validate() {
        let d = FamilyDescriptor {
            family: "holder".into(),
            params: FamilyParams { alpha: Some(0.5), ..Default::default() },
            n: Some(3),
        };
        assert!(matches!(d.interface::<f64>(3).unwrap(), Interface::Graph(_)));
        let bad = FamilyDescriptor { family: "power".into(), params: FamilyParams::default(), n: None };
        let err = bad.modulus::<f64>().unwrap_err().to_string();
        assert!(err.contains("params.alpha"), "{err}");
    }
}
