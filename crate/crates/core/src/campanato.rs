//! Geometric-scale iteration producing one-sided affine approximations
//! `l_k^±` of the solution at the origin, with the `d_k` bookkeeping that
//! controls their convergence.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::experiments::SampleSpec;
use crate::geometry::Side;
use crate::greens::{harmonic_center_from_samples, SphereGrid};
use crate::modulus::{classify_dini, default_ladder, Modulus, Verdict};
use crate::point::Point;
use crate::potential::{LayerProblem, LinearPolynomial};
use crate::quadrature::{Integrator, QuadratureSpec};
use crate::sampling::{ball_points, Rd};
use crate::scalar::Real;

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() && rho <= T::of(0.5) {
        Ok(())
    } else {
        argument("rho must lie in (0, 1/2]")
    }
}

/// `d_0, ..., d_K` with `d_0 = 1` and `d_k = max(omega(rho^k), rho^{1/2} d_{k-1})`.
pub fn dk_sequence<T: Real>(omega: &Modulus<T>, rho: T, k_max: usize) -> Result<Vec<T>> {
    check_rho(rho)?;
    let sr = rho.sqrt();
    let log_inv_rho = -rho.ln();
    let mut d = Vec::with_capacity(k_max + 1);
    d.push(T::one());
    for k in 1..=k_max {
        let w = omega.at_log(T::of_usize(k) * log_inv_rho);
        d.push(w.max(sr * d[k - 1]));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaResult<T> {
    pub sigma: T,
    /// Scale index with `rho^{k+1} <= r < rho^k`.
    pub k: usize,
    /// Upper bound on the omitted terms `sum_{j > K} d_j`.
    pub tail_bound: T,
    /// `sum_{j=1}^K d_j`.
    pub partial_sum: T,
    /// `(c_0 + rho^{1/2}) / (1 - rho^{1/2})` with `c_0 = sum_{j=1}^K omega(rho^j)`.
    pub proof_bound: T,
    pub bound_ok: bool,
}

/// `sigma(r) = d_{k+1} + sum_{j >= k} d_j` truncated at `k_tail`, for a Dini
/// modulus.
pub fn sigma<T: Real>(omega: &Modulus<T>, rho: T, r: T, k_tail: usize) -> Result<SigmaResult<T>> {
    check_rho(rho)?;
    if !(r > T::zero() && r <= T::of(0.5)) {
        return argument("r must lie in (0, 1/2]");
    }
    let class = classify_dini(omega, &default_ladder(), T::of(1e-6))?;
    if class.verdict != Verdict::Dini {
        return Err(Error::Undefined(format!("sigma needs a Dini modulus (classified {:?})", class.verdict)));
    }
    let mut k = (r.ln() / rho.ln()).floor().to_usize().unwrap_or(0);
    while k > 0 && r >= rho.powi(k as i32) {
        k -= 1;
    }
    while r < rho.powi(k as i32 + 1) {
        k += 1;
    }
    if k + 1 > k_tail {
        return argument("k_tail is smaller than the scale index of r");
    }
    let d = dk_sequence(omega, rho, k_tail)?;
    let sr = rho.sqrt();
    let tail_omega = omega.dini_integral_between(T::zero(), rho.powi(k_tail as i32), &QuadratureSpec::default())?;
    let tail_bound = (tail_omega / (T::one() - rho) + sr * d[k_tail]) / (T::one() - sr);
    let sum_from_k: T = d[k..].iter().copied().sum();
    let partial_sum: T = d[1..].iter().copied().sum();
    let c0: T = (1..=k_tail).map(|j| omega.at_log(T::of_usize(j) * -rho.ln())).sum();
    let proof_bound = (c0 + sr) / (T::one() - sr);
    Ok(SigmaResult {
        sigma: d[k + 1] + sum_from_k,
        k,
        tail_bound,
        partial_sum,
        proof_bound,
        bound_ok: partial_sum <= proof_bound * (T::one() + T::of(8.0) * T::epsilon()),
    })
}

/// Record of step `k`: `l_k^±` and the errors measured on `Omega^± ∩ B_{R rho^k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationState<T> {
    pub k: usize,
    #[serde(skip)]
    pub l_plus: LinearPolynomial<T>,
    #[serde(skip)]
    pub l_minus: LinearPolynomial<T>,
    pub d_k: T,
    pub rho: T,
    pub sup_error_plus: T,
    pub sup_error_minus: T,
    /// `rho^{k-1} |a_k - a_{k-1}| + |b_k - b_{k-1}|` (zero at `k = 0`).
    pub increment: T,
    /// Largest quadrature error estimate used in this step.
    pub est_error: T,
    pub converged: bool,
}

impl<T: Real> IterationState<T> {
    /// `|a_k^+ - a_k^- - g(0) e_n|_inf`.
    pub fn jump_defect(&self, g0: T) -> T {
        let n = self.l_plus.a.dim();
        let d = self.l_plus.a - self.l_minus.a - Point::unit(n, n - 1).scale(g0);
        d.coords().iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}

/// Iteration output; `failure` is set when a step was aborted, in which case
/// `states` holds the steps completed before it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRun<T> {
    pub states: Vec<IterationState<T>>,
    pub failure: Option<Error>,
}

/// Boundary grid resolution on each sphere `∂B_{R rho^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryGridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for BoundaryGridSpec {
    fn default() -> Self {
        Self { n_theta: 32, n_phi: 64 }
    }
}

/// `l^+` on the closed upper half space, `l^-` below.
fn piecewise<T: Real>(lp: &LinearPolynomial<T>, lm: &LinearPolynomial<T>, x: &Point<T>) -> T {
    if x.normal() >= T::zero() {
        lp.eval(x)
    } else {
        lm.eval(x)
    }
}

/// Runs `k_steps` steps of the iteration on a normalized problem (interface
/// through 0 with tangent plane `{x_n = 0}`), starting from
/// `a_0^± = ±g(0)/2 e_n`, `b_0 = 0`.
pub fn iterate<T: Real>(
    p: &LayerProblem<T>,
    rho: T,
    k_steps: usize,
    grid: BoundaryGridSpec,
    fit: SampleSpec,
) -> Result<IterationRun<T>> {
    check_rho(rho)?;
    let n = p.dim();
    let big_r = p.ctx().radius();
    let g0 = p.density().g0();
    let origin_side = p.side(&Point::zero(n));
    if origin_side != Side::OnInterface {
        return argument("problem is not normalized: the origin is not on the interface");
    }
    let omega = p.modulus();
    let d = dk_sequence(&omega, rho, k_steps)?;
    let en = Point::unit(n, n - 1);
    let mut lp = LinearPolynomial {
        a: en.scale(g0 * T::of(0.5)),
        b: T::zero(),
    };
    let mut lm = LinearPolynomial {
        a: en.scale(-g0 * T::of(0.5)),
        b: T::zero(),
    };

    let mut states = Vec::with_capacity(k_steps + 1);
    let measure = |k: usize, lp: &LinearPolynomial<T>, lm: &LinearPolynomial<T>| -> Result<(T, T, T, bool)> {
        let r = big_r * rho.powi(k as i32);
        let pts = ball_points(n, r, fit.count, fit.seed.wrapping_add(k as u64));
        let vals = p.evaluate_many(&pts);
        let (mut ep, mut em, mut err, mut ok) = (T::zero(), T::zero(), T::zero(), true);
        for (x, v) in pts.iter().zip(vals) {
            let v = v?;
            err = err.max(v.est_error);
            ok &= v.converged;
            match p.side(x) {
                Side::Plus => ep = ep.max((v.value - lp.eval(x)).abs()),
                Side::Minus => em = em.max((v.value - lm.eval(x)).abs()),
                Side::OnInterface => {
                    ep = ep.max((v.value - lp.eval(x)).abs());
                    em = em.max((v.value - lm.eval(x)).abs());
                }
            }
        }
        Ok((ep, em, err, ok))
    };

    let (ep, em, err, ok) = match measure(0, &lp, &lm) {
        Ok(v) => v,
        Err(e) => return Ok(IterationRun { states, failure: Some(e) }),
    };
    states.push(IterationState {
        k: 0,
        l_plus: lp,
        l_minus: lm,
        d_k: d[0],
        rho,
        sup_error_plus: ep,
        sup_error_minus: em,
        increment: T::zero(),
        est_error: err,
        converged: ok,
    });

    for k in 0..k_steps {
        let r = big_r * rho.powi(k as i32);
        let ctx = crate::greens::BallContext::new(n, r)?;
        let sphere = SphereGrid::product(&ctx, grid.n_theta, grid.n_phi)?;
        let step = (|| -> Result<(LinearPolynomial<T>, T, bool)> {
            let on_boundary = (r - big_r).abs() <= T::of(16.0) * T::epsilon() * big_r;
            let vals: Vec<Result<(T, T, bool)>> = sphere
                .points
                .par_iter()
                .map(|y| {
                    let u = if on_boundary {
                        (T::zero(), T::zero(), true)
                    } else {
                        let e = p.evaluate_solution(y)?;
                        (e.value, e.est_error, e.converged)
                    };
                    Ok((u.0 - piecewise(&lp, &lm, y), u.1, u.2))
                })
                .collect();
            let mut samples = Vec::with_capacity(vals.len());
            let (mut err, mut ok) = (T::zero(), true);
            for v in vals {
                let (f, e, c) = v?;
                samples.push(f);
                err = err.max(e);
                ok &= c;
            }
            let cv = harmonic_center_from_samples(&ctx, &sphere, &samples)?;
            Ok((LinearPolynomial { a: cv.grad0, b: cv.v0 }, err, ok))
        })();
        let (l, step_err, step_ok) = match step {
            Ok(v) => v,
            Err(e) => return Ok(IterationRun { states, failure: Some(e) }),
        };
        lp = lp + l;
        lm = lm + l;
        let increment = rho.powi(k as i32) * l.a.norm() + l.b.abs();
        let (ep, em, err, ok) = match measure(k + 1, &lp, &lm) {
            Ok(v) => v,
            Err(e) => return Ok(IterationRun { states, failure: Some(e) }),
        };
        states.push(IterationState {
            k: k + 1,
            l_plus: lp,
            l_minus: lm,
            d_k: d[k + 1],
            rho,
            sup_error_plus: ep,
            sup_error_minus: em,
            increment,
            est_error: err.max(step_err),
            converged: ok && step_ok,
        });
    }
    Ok(IterationRun { states, failure: None })
}

/// Residuals of `∫ p Δφ dx - g(0) ∫_{x_n = 0} φ dH^{n-1}` for `count` bumps
/// `φ = (1 - |x - c|^2 / s^2)^4` supported in `B_r`, where `p = l^+` above
/// the plane and `l^-` below. Vanishes when `a^+ - a^- = g(0) e_n` and the
/// constant terms agree.
pub fn distributional_residuals<T: Real>(
    lp: &LinearPolynomial<T>,
    lm: &LinearPolynomial<T>,
    g0: T,
    r: T,
    count: usize,
    seed: u64,
    spec: &QuadratureSpec<T>,
) -> Result<Vec<T>> {
    let n = lp.a.dim();
    if n != lm.a.dim() || !(n == 2 || n == 3) {
        return argument("polynomials must share dimension 2 or 3");
    }
    if !(r > T::zero()) {
        return argument("support radius must be positive");
    }
    let mut seq = Rd::new(n + 1, seed);
    let bumps: Vec<(Point<T>, T)> = (0..count)
        .map(|_| {
            let u = seq.next_unit();
            // Centre within B_{r/2}, close enough to the plane to meet it.
            let mut c: Vec<T> = u[..n].iter().map(|&v| T::of(v - 0.5) * r * T::of(0.5)).collect();
            c[n - 1] = c[n - 1] * T::of(0.5);
            let c = Point::new(&c);
            let room = r - c.norm();
            let s = room * T::of(0.5 + 0.45 * u[n]);
            (c, s)
        })
        .collect();
    let q = Integrator::new(*spec);
    let tol = spec.target_tol;
    let res: Vec<T> = bumps
        .par_iter()
        .map(|(c, s)| {
            let (c, s) = (*c, *s);
            let s2 = s * s;
            let nn = T::of_usize(n);
            let lap = |x: &Point<T>| -> T {
                let qv = (*x - c).norm_sq() / s2;
                if qv >= T::one() {
                    return T::zero();
                }
                let w = T::one() - qv;
                let lap_phi = (T::of(48.0) * w * w * qv - T::of(8.0) * nn * w * w * w) / s2;
                piecewise(lp, lm, x) * lap_phi
            };
            let lo = Point::new(&c.coords().iter().map(|&v| v - s).collect::<Vec<_>>());
            let hi = Point::new(&c.coords().iter().map(|&v| v + s).collect::<Vec<_>>());
            let mut cuts = vec![Vec::new(); n];
            cuts[n - 1] = vec![T::zero()];
            let volume = q.box_integral(&lap, &lo, &hi, &cuts, tol).value;
            let h = c.normal();
            let a2 = s2 - h * h;
            let surface = if a2 <= T::zero() {
                T::zero()
            } else if n == 3 {
                T::PI() * a2.powi(5) / (T::of(5.0) * s2.powi(4))
            } else {
                a2.sqrt().powi(9) / s2.powi(4) * T::of(256.0 / 315.0)
            };
            volume - g0 * surface
        })
        .collect();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dk_examples() {
        let d = dk_sequence(&Modulus::power(1.0f64).unwrap(), 0.25, 2).unwrap();
        assert_eq!(d, vec![1.0, 0.5, 0.25]);
        let z = dk_sequence(&Modulus::<f64>::Zero, 0.5, 6).unwrap();
        for (k, v) in z.iter().enumerate() {
            assert_relative_eq!(*v, 0.5f64.powf(k as f64 / 2.0), epsilon = 1e-15);
        }
        assert!(dk_sequence(&Modulus::<f64>::Zero, 0.7, 3).is_err());
    }

    #[test]
    fn sigma_bound_for_lipschitz_modulus() {
        let m = Modulus::power(1.0f64).unwrap();
        let s = sigma(&m, 0.25, 0.25f64.powi(3), 60).unwrap();
        assert!(s.bound_ok);
        assert!(s.partial_sum <= 5.0 / 3.0 + 1e-12);
        assert_eq!(s.k, 2);
        let coarse = sigma(&m, 0.25, 0.3, 60).unwrap();
        assert!(s.sigma < coarse.sigma);
    }

    #[test]
    fn sigma_zero_modulus_closed_form() {
        let s = sigma(&Modulus::<f64>::Zero, 0.5, 0.3, 80).unwrap();
        // 1/4 <= 0.3 < 1/2
        assert_eq!(s.k, 1);
        let q = 0.5f64.sqrt();
        let expected = q.powi(2) + q / (1.0 - q);
        assert_relative_eq!(s.sigma, expected, epsilon = 1e-10);
    }

    #[test]
    fn sigma_rejects_non_dini() {
        assert!(matches!(sigma(&Modulus::<f64>::InverseLog, 0.5, 0.1, 40), Err(Error::Undefined(_))));
    }

    #[test]
    fn distributional_identity_for_matching_jump() {
        let a = Point::<f64>::new(&[0.2, -0.1, 0.3]);
        let lp = LinearPolynomial { a: a + Point::new(&[0.0, 0.0, 0.5]), b: 0.1 };
        let lm = LinearPolynomial { a: a - Point::new(&[0.0, 0.0, 0.5]), b: 0.1 };
        let spec = QuadratureSpec::default().with_tol(1e-8);
        let res = distributional_residuals(&lp, &lm, 1.0, 0.5, 3, 42, &spec).unwrap();
        assert!(res.iter().all(|v| v.abs() < 1e-7), "{res:?}");
        let wrong = distributional_residuals(&lp, &lm, 2.0, 0.5, 3, 42, &spec).unwrap();
        assert!(wrong.iter().any(|v| v.abs() > 1e-4));
    }
}
