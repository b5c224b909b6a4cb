//! Adaptive quadrature for weakly singular kernels over graph patches, disks,
//! spheres and boxes.
//!
//! Every rule is built from composite Gauss-Legendre panels. A panel's error
//! is estimated by comparing the `m`-point and `2m`-point rules on it; the
//! panel with the largest estimate is bisected until the summed estimate
//! drops below the requested tolerance or the depth budget is exhausted.
//! Kernel singularities are handled in the callers' coordinates: disks are
//! integrated in polar coordinates centred at the projection of the
//! evaluation point, which removes the `|x' - y'|^{2-n}` singularity, and a
//! ladder of radial breakpoints resolves near-singular peaks.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::geometry::InterfaceGraph;
use crate::point::Point;
use crate::scalar::Real;

/// Tuning knobs for the adaptive rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec<T> {
    /// Absolute tolerance on the summed error estimate.
    pub target_tol: T,
    /// Maximum number of bisections applied to any initial panel.
    pub max_depth: usize,
    /// Gauss points per panel for the coarse rule (the fine rule doubles it).
    pub base_order: usize,
    /// Near-field radius, in units of the distance to the surface, inside
    /// which radial panels are kept below half that distance.
    pub singular_split_radius: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            target_tol: T::of(1e-6),
            max_depth: 12,
            base_order: 8,
            singular_split_radius: T::of(5.0),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.target_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_tol > T::zero()) {
            return argument("target_tol must be positive");
        }
        if self.max_depth < 1 {
            return argument("max_depth must be at least 1");
        }
        if self.base_order < 1 || self.base_order > 64 {
            return argument("base_order must lie in 1..=64");
        }
        if !(self.singular_split_radius > T::zero()) {
            return argument("singular_split_radius must be positive");
        }
        Ok(())
    }
}

/// Values the adaptive rules can accumulate: scalars and 3-vectors.
pub trait QuadValue<T: Real>: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: T) -> Self;
    /// Norm used for error control.
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    #[inline]
    fn zero() -> Self {
        T::zero()
    }
    #[inline]
    fn add(self, other: Self) -> Self {
        self + other
    }
    #[inline]
    fn scale(self, s: T) -> Self {
        self * s
    }
    #[inline]
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for [T; 3] {
    #[inline]
    fn zero() -> Self {
        [T::zero(); 3]
    }
    #[inline]
    fn add(self, o: Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
    #[inline]
    fn scale(self, s: T) -> Self {
        [self[0] * s, self[1] * s, self[2] * s]
    }
    #[inline]
    fn magnitude(self) -> T {
        self[0].abs().max(self[1].abs()).max(self[2].abs())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V, T> {
    pub value: V,
    pub est_error: T,
    pub panels: usize,
    /// False when the tolerance was not reached within the depth budget;
    /// `value` and `est_error` still carry the best available result.
    pub converged: bool,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed in `f64` by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1);
    let mut out = vec![(0.0, 0.0); m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[m - 1 - i] = (x, w);
    }
    if m % 2 == 1 {
        // Newton lands on +-0 with a tiny residual; pin the middle node.
        out[m / 2].0 = 0.0;
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Panel<V, T> {
    a: T,
    b: T,
    depth: usize,
    value: V,
    err: T,
    abs_sum: T,
}

/// Adaptive integrator built once per spec; holds the coarse/fine Gauss rules.
#[derive(Debug, Clone)]
pub struct Integrator<T> {
    spec: QuadratureSpec<T>,
    coarse: Vec<(T, T)>,
    fine: Vec<(T, T)>,
}

const MAX_PANELS: usize = 4000;

impl<T: Real> Integrator<T> {
    pub fn new(spec: QuadratureSpec<T>) -> Self {
        let conv = |rule: Vec<(f64, f64)>| {
            rule.into_iter()
                .map(|(x, w)| (T::of(x), T::of(w)))
                .collect::<Vec<_>>()
        };
        Self {
            coarse: conv(gauss_legendre(spec.base_order)),
            fine: conv(gauss_legendre(2 * spec.base_order)),
            spec,
        }
    }

    pub fn spec(&self) -> &QuadratureSpec<T> {
        &self.spec
    }

    fn panel<V: QuadValue<T>, F: FnMut(T) -> V>(&self, f: &mut F, a: T, b: T, depth: usize) -> Panel<V, T> {
        let half = (b - a) * T::of(0.5);
        let mid = (a + b) * T::of(0.5);
        let mut coarse = V::zero();
        for &(x, w) in &self.coarse {
            coarse = coarse.add(f(mid + half * x).scale(w));
        }
        let mut fine = V::zero();
        let mut abs_sum = T::zero();
        for &(x, w) in &self.fine {
            let v = f(mid + half * x);
            abs_sum = abs_sum + v.magnitude() * w;
            fine = fine.add(v.scale(w));
        }
        let coarse = coarse.scale(half);
        let fine = fine.scale(half);
        let diff = fine.add(coarse.scale(-T::one())).magnitude();
        Panel {
            a,
            b,
            depth,
            value: fine,
            err: diff,
            abs_sum: abs_sum * half.abs(),
        }
    }

    /// Integrates `f` over `[breaks[0], breaks[last]]` with the interior
    /// breakpoints as initial panel boundaries.
    pub fn integrate<V, F>(&self, mut f: F, breaks: &[T], tol: T) -> Estimate<V, T>
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        assert!(breaks.len() >= 2, "need at least one panel");
        let mut panels: Vec<Panel<V, T>> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| self.panel(&mut f, w[0], w[1], 0))
            .collect();
        if panels.is_empty() {
            return Estimate {
                value: V::zero(),
                est_error: T::zero(),
                panels: 0,
                converged: true,
            };
        }
        let eps = T::epsilon() * T::of(50.0);
        loop {
            let total_err: T = panels.iter().map(|p| p.err).sum();
            let abs_total: T = panels.iter().map(|p| p.abs_sum).sum();
            let goal = tol.max(eps * abs_total);
            if total_err <= goal {
                return self.finish(panels, total_err, true);
            }
            let stuck: T = panels.iter().filter(|p| p.depth >= self.spec.max_depth).map(|p| p.err).sum();
            if stuck > goal {
                return self.finish(panels, total_err, false);
            }
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.depth < self.spec.max_depth)
                .max_by(|(_, p), (_, q)| p.err.partial_cmp(&q.err).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(i, _)| i);
            let Some(i) = worst else {
                return self.finish(panels, total_err, false);
            };
            if panels.len() >= MAX_PANELS {
                return self.finish(panels, total_err, false);
            }
            let p = panels[i];
            let mid = (p.a + p.b) * T::of(0.5);
            panels[i] = self.panel(&mut f, p.a, mid, p.depth + 1);
            panels.push(self.panel(&mut f, mid, p.b, p.depth + 1));
        }
    }

    fn finish<V: QuadValue<T>>(&self, panels: Vec<Panel<V, T>>, err: T, converged: bool) -> Estimate<V, T> {
        let mut ordered = panels;
        ordered.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(std::cmp::Ordering::Equal));
        let value = ordered.iter().fold(V::zero(), |acc, p| acc.add(p.value));
        Estimate {
            value,
            est_error: err,
            panels: ordered.len(),
            converged,
        }
    }

    /// Integrates `f` over `[a, inf)` through the map `x = a + (1 - t) / t`.
    pub fn integrate_to_infinity<F>(&self, mut f: F, a: T, tol: T) -> Estimate<T, T>
    where
        F: FnMut(T) -> T,
    {
        let g = |t: T| {
            let x = a + (T::one() - t) / t;
            let v = f(x) / (t * t);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        };
        let breaks: Vec<T> = [0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0].iter().map(|&b| T::of(b)).collect();
        self.integrate(g, &breaks, tol)
    }

    /// Radial breakpoints on `[0, rho_max]` for a kernel peaked at height `d`
    /// above the pole: half-distance panels out to the near-field radius,
    /// geometric growth beyond. On-surface poles (`d == 0`) get a geometric
    /// ladder toward zero.
    pub fn radial_breaks(&self, rho_max: T, d: Option<T>) -> Vec<T> {
        let mut out = vec![T::zero()];
        let two = T::of(2.0);
        match d {
            Some(d) if d > T::zero() => {
                let near = d * self.spec.singular_split_radius;
                let step = d * T::of(0.5);
                let mut r = step;
                while r < near && r < rho_max {
                    out.push(r);
                    r = r + step;
                }
                let mut r = near;
                while r < rho_max {
                    if r > *out.last().unwrap() {
                        out.push(r);
                    }
                    r = r * two;
                }
            }
            Some(_) => {
                let mut ladder = Vec::new();
                let mut r = rho_max;
                for _ in 0..10 {
                    r = r / two;
                    ladder.push(r);
                }
                ladder.reverse();
                out.extend(ladder);
            }
            None => {}
        }
        if rho_max > *out.last().unwrap() {
            out.push(rho_max);
        }
        out
    }

    /// Integrates `f(y') dy'` over a disk in R^{n-1} (an interval when n = 2).
    ///
    /// With a `near` point inside the disk the rule uses polar coordinates
    /// centred there, so integrands behaving like `|y' - near|^{-1}` in the
    /// plane are integrated without loss.
    pub fn disk_integral<V, F>(&self, f: F, disk: &Disk<T>, near: Option<&NearPoint<T>>, tol: T) -> Estimate<V, T>
    where
        V: QuadValue<T>,
        F: Fn(&Point<T>) -> V,
    {
        let m = disk.center.dim();
        let inside = near.filter(|p| (p.at - disk.center).norm() < disk.radius);
        match m {
            1 => {
                let c = disk.center[0];
                let lo = c - disk.radius;
                let hi = c + disk.radius;
                let mut breaks = vec![lo];
                if let Some(p) = inside {
                    let x0 = p.at[0];
                    let left = self.radial_breaks(x0 - lo, Some(p.distance));
                    let right = self.radial_breaks(hi - x0, Some(p.distance));
                    for r in left.iter().rev().skip(1).take(left.len().saturating_sub(2)) {
                        breaks.push(x0 - *r);
                    }
                    breaks.push(x0);
                    for r in right.iter().skip(1).take(right.len().saturating_sub(2)) {
                        breaks.push(x0 + *r);
                    }
                }
                breaks.push(hi);
                if breaks.iter().all(|&b| b != c) {
                    let at = breaks.partition_point(|&b| b < c);
                    breaks.insert(at, c);
                }
                self.integrate(|t| f(&Point::new(&[t])), &breaks, tol)
            }
            2 => {
                let (pole, d) = match inside {
                    Some(p) => (p.at, Some(p.distance)),
                    None => (disk.center, None),
                };
                let q = pole - disk.center;
                let q2 = q.norm_sq();
                let r2 = disk.radius * disk.radius;
                let two_pi = T::PI() * T::of(2.0);
                let inner_tol = tol / (two_pi * T::of(2.0));
                let worst_inner = Cell::new(T::zero());
                let all_converged = Cell::new(true);
                let panels = Cell::new(0usize);
                let outer = |phi: T| {
                    let e = Point::new(&[phi.cos(), phi.sin()]);
                    let qe = q.dot(&e);
                    let disc = (qe * qe - q2 + r2).max(T::zero());
                    let rho_max = (-qe + disc.sqrt()).max(T::zero());
                    if rho_max <= T::zero() {
                        return V::zero();
                    }
                    let mut breaks = self.radial_breaks(rho_max, d);
                    // Closest approach to the disk centre, where radial profiles kink.
                    let closest = -qe;
                    if closest > T::zero() && closest < rho_max && breaks.iter().all(|&b| b != closest) {
                        let at = breaks.partition_point(|&b| b < closest);
                        breaks.insert(at, closest);
                    }
                    let est = self.integrate(|rho| f(&(pole + e * rho)).scale(rho), &breaks, inner_tol);
                    if est.est_error > worst_inner.get() {
                        worst_inner.set(est.est_error);
                    }
                    if !est.converged {
                        all_converged.set(false);
                    }
                    panels.set(panels.get() + est.panels);
                    est.value
                };
                let h = T::FRAC_PI_2();
                let mut breaks = vec![T::zero(), h, h * T::of(2.0), h * T::of(3.0), two_pi];
                if q2 > T::zero() {
                    let mut toward = (-q[1]).atan2(-q[0]);
                    if toward < T::zero() {
                        toward = toward + two_pi;
                    }
                    if breaks.iter().all(|&b| b != toward) {
                        let at = breaks.partition_point(|&b| b < toward);
                        breaks.insert(at, toward);
                    }
                }
                let est = self.integrate(outer, &breaks, tol * T::of(0.5));
                Estimate {
                    value: est.value,
                    est_error: est.est_error + two_pi * worst_inner.get(),
                    panels: est.panels + panels.get(),
                    converged: est.converged && all_converged.get(),
                }
            }
            _ => panic!("disk dimension must be 1 or 2"),
        }
    }

    /// Integrates `f(y) dH^{n-1}(y)` over the graph of `graph` above `disk`,
    /// i.e. `f(y') * sqrt(1 + |grad psi(y')|^2) dy'`.
    pub fn graph_patch_integral<V, F>(
        &self,
        graph: &InterfaceGraph<T>,
        f: F,
        disk: &Disk<T>,
        near: Option<&NearPoint<T>>,
        tol: T,
    ) -> Estimate<V, T>
    where
        V: QuadValue<T>,
        F: Fn(&Point<T>) -> V,
    {
        self.disk_integral(|y| f(y).scale(graph.area_element_unchecked(y)), disk, near, tol)
    }

    /// Integrates over the sphere `|y - center| = s` in R^n (a circle when n = 2).
    ///
    /// `pole` orients the angular coordinates so that a peak of the integrand
    /// in that direction sits at `theta = 0`; `near_distance` is the distance
    /// of the peak source from the sphere.
    pub fn sphere_integral<V, F>(
        &self,
        n: usize,
        s: T,
        pole: Option<Point<T>>,
        near_distance: Option<T>,
        f: F,
        tol: T,
    ) -> Estimate<V, T>
    where
        V: QuadValue<T>,
        F: Fn(&Point<T>) -> V,
    {
        let axis = pole
            .filter(|p| p.norm() > T::zero())
            .map(|p| p.scale(T::one() / p.norm()))
            .unwrap_or_else(|| Point::unit(n, n - 1));
        let two_pi = T::PI() * T::of(2.0);
        match n {
            2 => {
                let perp = Point::new(&[-axis[1], axis[0]]);
                let eval = |k: usize, m: usize| {
                    let phi = two_pi * T::of_usize(k) / T::of_usize(m);
                    f(&(axis * (s * phi.cos()) + perp * (s * phi.sin())))
                };
                let mut m = 16usize;
                let mut sum = (0..m).fold(V::zero(), |acc, k| acc.add(eval(k, m)));
                let mut value = sum.scale(two_pi * s / T::of_usize(m));
                let mut err = T::infinity();
                for _ in 0..(self.spec.max_depth + 4) {
                    let extra = (0..m).fold(V::zero(), |acc, k| acc.add(eval(2 * k + 1, 2 * m)));
                    sum = sum.add(extra);
                    m *= 2;
                    let next = sum.scale(two_pi * s / T::of_usize(m));
                    err = next.add(value.scale(-T::one())).magnitude();
                    value = next;
                    if err <= tol {
                        break;
                    }
                }
                Estimate {
                    value,
                    est_error: err,
                    panels: m,
                    converged: err <= tol,
                }
            }
            3 => {
                let helper = if axis[0].abs() < T::of(0.9) {
                    Point::unit(3, 0)
                } else {
                    Point::unit(3, 1)
                };
                let e1 = {
                    let v = helper - axis * helper.dot(&axis);
                    v.scale(T::one() / v.norm())
                };
                let e2 = Point::new(&[
                    axis[1] * e1[2] - axis[2] * e1[1],
                    axis[2] * e1[0] - axis[0] * e1[2],
                    axis[0] * e1[1] - axis[1] * e1[0],
                ]);
                let inner_tol = tol / T::of(8.0);
                let worst_inner = Cell::new(T::zero());
                let all_converged = Cell::new(true);
                let panels = Cell::new(0usize);
                let ring = |t: T, st: T| {
                    let h = T::FRAC_PI_2();
                    let breaks = [T::zero(), h, h * T::of(2.0), h * T::of(3.0), two_pi];
                    let est = self.integrate(
                        |phi: T| {
                            let y = (e1 * (st * phi.cos()) + e2 * (st * phi.sin()) + axis * t) * s;
                            f(&y)
                        },
                        &breaks,
                        inner_tol,
                    );
                    if est.est_error > worst_inner.get() {
                        worst_inner.set(est.est_error);
                    }
                    if !est.converged {
                        all_converged.set(false);
                    }
                    panels.set(panels.get() + est.panels);
                    est.value.scale(s * s)
                };
                // Southern hemisphere in t = cos(theta); northern cap in
                // w = sqrt(1 - t), which flattens the pole singularity.
                let south = self.integrate(
                    |t: T| ring(t, (T::one() - t * t).max(T::zero()).sqrt()),
                    &[-T::one(), T::zero()],
                    tol * T::of(0.25),
                );
                // Narrower peaks are below roundoff in w; on-sphere poles need no
                // extra breaks once the cap is flattened.
                let resolvable = T::of(1e-9);
                let width = near_distance
                    .map(|d| d / (s * T::SQRT_2()))
                    .filter(|&w| w >= resolvable);
                let wbreaks = self.radial_breaks(T::one(), width);
                let north = self.integrate(
                    |w: T| ring(T::one() - w * w, w * (T::of(2.0) - w * w).sqrt()).scale(T::of(2.0) * w),
                    &wbreaks,
                    tol * T::of(0.25),
                );
                let est = Estimate {
                    value: south.value.add(north.value),
                    est_error: south.est_error + north.est_error,
                    panels: south.panels + north.panels,
                    converged: south.converged && north.converged,
                };
                Estimate {
                    value: est.value,
                    est_error: est.est_error + T::of(2.0) * worst_inner.get() * s * s,
                    panels: est.panels + panels.get(),
                    converged: est.converged && all_converged.get(),
                }
            }
            _ => panic!("sphere integrals need n in {{2, 3}}"),
        }
    }

    /// Integrates `f` over the axis-aligned box `[lo, hi]` by nested adaptive
    /// rules. `cuts[k]` lists interior breakpoints along axis `k` (e.g. the
    /// plane `x_n = 0` where the integrand has a kink).
    pub fn box_integral(&self, f: &dyn Fn(&Point<T>) -> T, lo: &Point<T>, hi: &Point<T>, cuts: &[Vec<T>], tol: T) -> Estimate<T, T> {
        let dim = lo.dim();
        assert_eq!(dim, hi.dim());
        let worst = Cell::new(T::zero());
        let ok = Cell::new(true);
        let est = self.box_axis(f, 0, *lo, lo, hi, cuts, tol, &worst, &ok);
        Estimate {
            value: est.value,
            est_error: est.est_error + worst.get(),
            panels: est.panels,
            converged: est.converged && ok.get(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn box_axis(
        &self,
        f: &dyn Fn(&Point<T>) -> T,
        axis: usize,
        prefix: Point<T>,
        lo: &Point<T>,
        hi: &Point<T>,
        cuts: &[Vec<T>],
        tol: T,
        worst: &Cell<T>,
        ok: &Cell<bool>,
    ) -> Estimate<T, T> {
        let dim = lo.dim();
        let mut breaks = vec![lo[axis]];
        if let Some(c) = cuts.get(axis) {
            breaks.extend(c.iter().copied().filter(|&v| v > lo[axis] && v < hi[axis]));
        }
        breaks.push(hi[axis]);
        let width = hi[axis] - lo[axis];
        let est = self.integrate(
            |t: T| {
                let p = prefix.with(axis, t);
                if axis + 1 == dim {
                    f(&p)
                } else {
                    let inner_tol = tol / (T::of(4.0) * width);
                    let e = self.box_axis(f, axis + 1, p, lo, hi, cuts, inner_tol, worst, ok);
                    if e.est_error * width > worst.get() {
                        worst.set(e.est_error * width);
                    }
                    if !e.converged {
                        ok.set(false);
                    }
                    e.value
                }
            },
            &breaks,
            if axis + 1 == dim { tol } else { tol * T::of(0.5) },
        );
        est
    }
}

/// A disk `|y' - center| < radius` in R^{n-1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk<T> {
    pub center: Point<T>,
    pub radius: T,
}

/// Projection of an evaluation point onto the chart together with its
/// distance from the surface; drives the polar pole and radial breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearPoint<T> {
    pub at: Point<T>,
    pub distance: T,
}
