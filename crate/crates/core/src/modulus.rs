//! Moduli of continuity and numerical Dini / Log-Dini classification.
//!
//! All integrals `int_delta^1 omega(r) / r dr` are computed after the
//! substitution `r = exp(-z)`, which turns them into `int_0^{|log delta|}
//! omega(e^{-z}) dz`. The improper integral down to `r = 0` becomes an
//! integral over `[0, inf)` and is handled by [`Integrator::integrate_to_infinity`].

use serde::Serialize;

use crate::error::{argument, domain, Result};
use crate::quadrature::{Integrator, QuadratureSpec};
use crate::scalar::Real;

/// A nondecreasing modulus of continuity on `(0, 1]`.
///
/// The logarithmic families are only increasing on `(0, 1/e]`; they are
/// continued by the constant `1` on `(1/e, 1]` so that the result stays
/// continuous, nondecreasing and bounded.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus<T> {
    /// `omega = 0`; the modulus of a constant density or a flat graph.
    Zero,
    /// `r^alpha`.
    Power { alpha: T },
    /// `1 / |log r|`: continuous but not Dini.
    InverseLog,
    /// `|log r|^{-beta}`; Dini exactly when `beta > 1`.
    LogPower { beta: T },
    /// Monotone piecewise-linear interpolation of samples, `(0, 0)` prepended
    /// when the first abscissa is positive and constant past the last one.
    Table { r: Vec<T>, omega: Vec<T> },
    /// Pointwise maximum, e.g. `max(omega_psi, omega_g)`.
    MaxOf(Box<Modulus<T>>, Box<Modulus<T>>),
}

impl<T: Real> Modulus<T> {
    pub fn power(alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return argument("power modulus needs alpha > 0");
        }
        Ok(Self::Power { alpha })
    }

    pub fn log_power(beta: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return argument("log_power modulus needs beta > 0");
        }
        Ok(Self::LogPower { beta })
    }

    pub fn table(r: Vec<T>, omega: Vec<T>) -> Result<Self> {
        if r.is_empty() || r.len() != omega.len() {
            return argument("table modulus needs equally many (r, omega) samples");
        }
        if r.iter().chain(omega.iter()).any(|v| !v.is_finite()) {
            return argument("table modulus samples must be finite");
        }
        if r[0] < T::zero() || omega[0] < T::zero() {
            return argument("table modulus samples must be nonnegative");
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return argument("table abscissae must be strictly increasing");
        }
        if omega.windows(2).any(|w| w[1] < w[0]) {
            return argument("table values must be nondecreasing");
        }
        Ok(Self::Table { r, omega })
    }

    pub fn max_of(a: Modulus<T>, b: Modulus<T>) -> Self {
        Self::MaxOf(Box::new(a), Box::new(b))
    }

    /// `omega(r)` for `0 < r <= 1`.
    pub fn evaluate(&self, r: T) -> Result<T> {
        if !(r > T::zero() && r <= T::one()) {
            return domain(format!("modulus evaluated at r = {r}, outside (0, 1]"));
        }
        Ok(self.at(r))
    }

    /// Unchecked evaluation; values above 1 use the value at 1 for the
    /// closed-form families.
    pub fn at(&self, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        match self {
            Self::Zero => T::zero(),
            Self::Power { alpha } => r.min(T::one()).powf(*alpha),
            Self::InverseLog => log_family(r, T::one()),
            Self::LogPower { beta } => log_family(r, *beta),
            Self::Table { r: xs, omega } => interpolate(xs, omega, r),
            Self::MaxOf(a, b) => a.at(r).max(b.at(r)),
        }
    }

    /// `omega(e^{-z})`: the integrand of the Dini integral in log coordinates.
    pub fn at_log(&self, z: T) -> T {
        match self {
            Self::Power { alpha } => (-*alpha * z.max(T::zero())).exp(),
            Self::InverseLog => log_value(z, T::one()),
            Self::LogPower { beta } => log_value(z, *beta),
            Self::MaxOf(a, b) => a.at_log(z).max(b.at_log(z)),
            _ => self.at((-z).exp()),
        }
    }

    /// Places in log coordinates where the integrand has kinks.
    fn log_kinks(&self) -> Vec<T> {
        let mut out = match self {
            Self::InverseLog | Self::LogPower { .. } => vec![T::one()],
            Self::Table { r, .. } => r.iter().filter(|&&x| x > T::zero() && x < T::one()).map(|x| -x.ln()).collect(),
            Self::MaxOf(a, b) => {
                let mut v = a.log_kinks();
                v.extend(b.log_kinks());
                v
            }
            _ => Vec::new(),
        };
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// `int_a^b omega(e^{-z}) z^weight dz` over a finite range of log
    /// coordinates, with kinks as breakpoints.
    fn log_integral(&self, q: &Integrator<T>, a: T, b: T, log_weight: bool, tol: T) -> (T, T, bool) {
        if b <= a {
            return (T::zero(), T::zero(), true);
        }
        let mut breaks = vec![a];
        breaks.extend(self.log_kinks().into_iter().filter(|&k| k > a && k < b));
        breaks.push(b);
        let est = q.integrate(|z: T| self.at_log(z) * if log_weight { z } else { T::one() }, &breaks, tol);
        (est.value, est.est_error, est.converged)
    }

    /// `int_delta^1 omega(r) / r dr`.
    pub fn dini_integral(&self, delta: T, spec: &QuadratureSpec<T>) -> Result<T> {
        self.dini_integral_between(delta, T::one(), spec)
    }

    /// `int_lower^upper omega(r) / r dr` for `0 < lower <= upper <= 1`; with
    /// `lower == 0` the improper integral is attempted and an error is
    /// returned when it does not converge.
    pub fn dini_integral_between(&self, lower: T, upper: T, spec: &QuadratureSpec<T>) -> Result<T> {
        if !(upper > T::zero() && upper <= T::one()) || lower < T::zero() || lower > upper {
            return domain("dini integral bounds must satisfy 0 <= lower <= upper <= 1");
        }
        let q = Integrator::new(*spec);
        let za = -upper.ln();
        if lower == T::zero() {
            let (head, _, _) = self.log_integral(&q, za, za.max(T::one()), false, spec.target_tol * T::of(0.5));
            let start = za.max(T::one());
            let tail = q.integrate_to_infinity(|z| self.at_log(z), start, spec.target_tol * T::of(0.5));
            if !tail.converged {
                return Err(crate::Error::Undefined("improper Dini integral does not converge".into()));
            }
            return Ok(head + tail.value);
        }
        Ok(self.log_integral(&q, za, -lower.ln(), false, spec.target_tol).0)
    }
}

fn log_value<T: Real>(z: T, beta: T) -> T {
    if z <= T::one() {
        T::one()
    } else {
        z.powf(-beta)
    }
}

fn log_family<T: Real>(r: T, beta: T) -> T {
    log_value(-r.ln(), beta)
}

fn interpolate<T: Real>(xs: &[T], ys: &[T], r: T) -> T {
    let last = xs.len() - 1;
    if r >= xs[last] {
        return ys[last];
    }
    if r <= xs[0] {
        return if xs[0] > T::zero() { ys[0] * r / xs[0] } else { ys[0] };
    }
    let i = xs.partition_point(|&x| x <= r) - 1;
    let t = (r - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Outcome of the numerical convergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The improper integral converged within tolerance.
    Dini,
    /// Partial integrals keep growing at a non-decaying rate in `log|log delta|`.
    Divergent,
    /// Neither test was decisive.
    Inconclusive,
}

/// Settings for [`classify_dini_with`].
#[derive(Debug, Clone, Copy)]
pub struct DiniConfig<T> {
    pub tol: T,
    /// Divergent when the late slope of the partial integrals against
    /// `log|log delta|`, multiplied by this factor, still reaches the early slope.
    pub growth_factor: T,
    pub quadrature: QuadratureSpec<T>,
}

impl<T: Real> DiniConfig<T> {
    pub fn new(tol: T) -> Self {
        Self {
            tol,
            growth_factor: T::of(1.5),
            quadrature: QuadratureSpec::default().with_tol(tol),
        }
    }
}

/// Partial integrals and verdicts for one modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiniClassification<T> {
    pub verdict: Verdict,
    /// Verdict of the same test applied to `|log r| omega(r) / r`.
    pub log_dini: Verdict,
    /// `(delta, int_delta^1 omega(r)/r dr)`.
    pub partial_integrals: Vec<(T, T)>,
    /// `(delta, int_delta^1 |log r| omega(r)/r dr)`.
    pub log_dini_partials: Vec<(T, T)>,
    /// `(rho, K, sum_{j<=K} omega(rho^j))` with `rho^K` near the smallest delta.
    pub series_sums: Vec<(T, usize, T)>,
    /// Value of the improper integral when it converged.
    pub integral: Option<T>,
    pub log_dini_integral: Option<T>,
    /// Summed quadrature error estimate over the ladder.
    pub est_error: T,
}

/// Default ladder `10^{-2}, ..., 10^{-12}`.
pub fn default_ladder<T: Real>() -> Vec<T> {
    (2..=12).map(|k| T::of(10f64.powi(-k))).collect()
}

pub fn classify_dini<T: Real>(m: &Modulus<T>, ladder: &[T], tol: T) -> Result<DiniClassification<T>> {
    classify_dini_with(m, ladder, &DiniConfig::new(tol))
}

pub fn classify_dini_with<T: Real>(m: &Modulus<T>, ladder: &[T], cfg: &DiniConfig<T>) -> Result<DiniClassification<T>> {
    if ladder.is_empty() {
        return argument("delta ladder is empty");
    }
    if ladder.iter().any(|&d| !(d > T::zero() && d < T::one())) {
        return argument("delta ladder entries must lie in (0, 1)");
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return argument("delta ladder must be strictly decreasing");
    }
    if !(cfg.tol > T::zero()) || !(cfg.growth_factor >= T::one()) {
        return argument("tol must be positive and growth_factor at least 1");
    }
    let q = Integrator::new(cfg.quadrature);
    let seg_tol = cfg.tol / T::of_usize(10 * ladder.len());

    let mut partial_integrals = Vec::with_capacity(ladder.len());
    let mut log_dini_partials = Vec::with_capacity(ladder.len());
    let (mut acc, mut acc_log, mut err) = (T::zero(), T::zero(), T::zero());
    let mut z_prev = T::zero();
    for &delta in ladder {
        let z = -delta.ln();
        let (v, e, _) = m.log_integral(&q, z_prev, z, false, seg_tol);
        let (vl, el, _) = m.log_integral(&q, z_prev, z, true, seg_tol);
        acc = acc + v;
        acc_log = acc_log + vl;
        err = err + e + el;
        partial_integrals.push((delta, acc));
        log_dini_partials.push((delta, acc_log));
        z_prev = z;
    }

    let z_last = z_prev;
    let tail = q.integrate_to_infinity(|z| m.at_log(z), z_last, cfg.tol);
    let tail_log = q.integrate_to_infinity(|z| z * m.at_log(z), z_last, cfg.tol);

    let decide = |partials: &[(T, T)], tail_ok: bool| {
        if tail_ok {
            return Verdict::Dini;
        }
        if slopes_do_not_decay(partials, cfg.growth_factor) {
            Verdict::Divergent
        } else {
            Verdict::Inconclusive
        }
    };
    let tail_ok = tail.converged && tail.est_error <= cfg.tol;
    let tail_log_ok = tail_log.converged && tail_log.est_error <= cfg.tol;
    let verdict = decide(&partial_integrals, tail_ok);
    let log_dini = decide(&log_dini_partials, tail_log_ok);
    // |log r| >= 1 on (0, 1/e], so a convergent weighted integral forces the plain one.
    let verdict = if verdict != Verdict::Dini && log_dini == Verdict::Dini {
        Verdict::Dini
    } else {
        verdict
    };

    let delta_min = ladder[ladder.len() - 1];
    let series_sums = [0.3, 0.5, 0.7]
        .iter()
        .map(|&rho| {
            let rho = T::of(rho);
            let k = (delta_min.ln() / rho.ln()).ceil().to_usize().unwrap_or(1).max(1);
            (rho, k, series_sum(m, rho, 0, k))
        })
        .collect();

    Ok(DiniClassification {
        verdict,
        log_dini,
        partial_integrals,
        log_dini_partials,
        series_sums,
        integral: tail_ok.then(|| acc + tail.value),
        log_dini_integral: tail_log_ok.then(|| acc_log + tail_log.value),
        est_error: err,
    })
}

fn slopes_do_not_decay<T: Real>(partials: &[(T, T)], growth: T) -> bool {
    if partials.len() < 3 {
        return false;
    }
    let loglog = |d: T| (-d.ln()).ln();
    let slope = |i: usize| {
        let (d0, p0) = partials[i];
        let (d1, p1) = partials[i + 1];
        (p1 - p0) / (loglog(d1) - loglog(d0))
    };
    let first = slope(0);
    let last = slope(partials.len() - 2);
    first > T::zero() && last * growth >= first
}

fn series_sum<T: Real>(m: &Modulus<T>, rho: T, from: usize, to: usize) -> T {
    (from..=to).map(|j| m.at_log(T::of_usize(j) * -rho.ln())).sum()
}

/// The two-sided comparison between the series and the integral at finite
/// truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesCheck<T> {
    /// `sum_{j=0}^K omega(rho^j)`.
    pub series: T,
    /// `int_{rho^{K+1}}^1 omega(r)/r dr`.
    pub integral: T,
    /// `(1 - rho) sum_{j=1}^K omega(rho^j) <= integral + tol`.
    pub lower_ok: bool,
    /// `integral <= log(1/rho) * series + tol`.
    pub upper_ok: bool,
}

pub fn series_check<T: Real>(m: &Modulus<T>, rho: T, k: usize, tol: T) -> Result<SeriesCheck<T>> {
    if !(rho > T::zero() && rho < T::one()) {
        return argument("rho must lie in (0, 1)");
    }
    if k < 1 {
        return argument("K must be at least 1");
    }
    let q = Integrator::new(QuadratureSpec::default().with_tol(tol * T::of(0.1)));
    let log_inv_rho = -rho.ln();
    let series = series_sum(m, rho, 0, k);
    let (integral, _, _) = m.log_integral(&q, T::zero(), T::of_usize(k + 1) * log_inv_rho, false, tol * T::of(0.1));
    let lower = (T::one() - rho) * series_sum(m, rho, 1, k);
    Ok(SeriesCheck {
        series,
        integral,
        lower_ok: lower <= integral + tol,
        upper_ok: integral <= log_inv_rho * series + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const E2: f64 = 0.1353352832366127; // e^{-2}

    #[test]
    fn evaluate_examples() {
        let p = Modulus::power(0.5).unwrap();
        assert_relative_eq!(p.evaluate(0.25).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(Modulus::<f64>::InverseLog.evaluate(E2).unwrap(), 0.5, epsilon = 1e-15);
        let mx = Modulus::max_of(p, Modulus::InverseLog);
        assert_relative_eq!(mx.evaluate(E2).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn evaluate_rejects_outside_unit_interval() {
        let p = Modulus::power(0.5f64).unwrap();
        assert!(matches!(p.evaluate(0.0), Err(crate::Error::Domain(_))));
        assert!(matches!(p.evaluate(1.5), Err(crate::Error::Domain(_))));
        assert!(matches!(p.evaluate(-0.1), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let p = Modulus::power(0.5f32).unwrap();
        assert!((p.evaluate(0.25f32).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn table_validation_and_interpolation() {
        assert!(Modulus::table(vec![0.1, 0.05], vec![0.1, 0.2]).is_err());
        assert!(Modulus::table(vec![0.1, 0.2], vec![0.3, 0.2]).is_err());
        let t = Modulus::table(vec![0.1, 0.5], vec![0.2, 0.6]).unwrap();
        assert_relative_eq!(t.at(0.3), 0.4, epsilon = 1e-15);
        assert_relative_eq!(t.at(0.05), 0.1, epsilon = 1e-15);
        assert_relative_eq!(t.at(0.9), 0.6, epsilon = 1e-15);
    }

    #[test]
    fn classify_power_half() {
        let c = classify_dini(&Modulus::<f64>::power(0.5).unwrap(), &default_ladder(), 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Dini);
        assert!((c.integral.unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(c.log_dini, Verdict::Dini);
    }

    #[test]
    fn classify_inverse_log_divergent() {
        let c = classify_dini(&Modulus::InverseLog, &default_ladder(), 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Divergent);
        assert!(c.integral.is_none());
    }

    #[test]
    fn log_power_two_is_dini_but_not_log_dini() {
        let m = Modulus::log_power(2.0).unwrap();
        let c = classify_dini(&m, &default_ladder(), 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Dini);
        assert_eq!(c.log_dini, Verdict::Divergent);
        let spec = QuadratureSpec::default().with_tol(1e-9);
        let below = m.dini_integral_between(0.0, (-1.0f64).exp(), &spec).unwrap();
        assert!((below - 1.0).abs() < 1e-6, "{below}");
    }

    #[test]
    fn ladder_validation() {
        let m = Modulus::power(0.5).unwrap();
        assert!(classify_dini(&m, &[1e-3, 1e-2], 1e-6).is_err());
        assert!(classify_dini(&m, &[], 1e-6).is_err());
        assert!(classify_dini(&m, &[1.5, 1e-2], 1e-6).is_err());
    }

    #[test]
    fn series_check_power_one() {
        let m = Modulus::power(1.0).unwrap();
        let s = series_check(&m, 0.5, 30, 1e-9).unwrap();
        assert_relative_eq!(s.series, 2.0 - 2f64.powi(-30), epsilon = 1e-14);
        assert_relative_eq!(s.integral, 1.0 - 2f64.powi(-31), epsilon = 1e-10);
        assert!(s.lower_ok && s.upper_ok);
    }

    #[test]
    fn series_check_power_half_geometric() {
        let m = Modulus::<f64>::power(0.5).unwrap();
        let s = series_check(&m, 0.25, 60, 1e-9).unwrap();
        assert!((s.series - 2.0).abs() < 1e-12);
        assert!(s.lower_ok && s.upper_ok);
    }

    #[test]
    fn series_inverse_log_keeps_growing() {
        let s10 = series_check(&Modulus::InverseLog, 0.5, 10, 1e-9).unwrap().series;
        let s20 = series_check(&Modulus::InverseLog, 0.5, 20, 1e-9).unwrap().series;
        // Harmonic oracle: the added terms are 1/(j log 2) for j = 11..20.
        let added: f64 = (11..=20).map(|j| 1.0 / (j as f64 * 2f64.ln())).sum();
        assert_relative_eq!(s20 - s10, added, epsilon = 1e-12);
        assert!(series_check(&Modulus::InverseLog, 0.5, 0, 1e-9).is_err());
        assert!(series_check(&Modulus::InverseLog, 1.0, 3, 1e-9).is_err());
    }

    proptest! {
        #[test]
        fn families_are_nondecreasing(a in 1e-9f64..1.0, b in 1e-9f64..1.0, alpha in 0.05f64..2.0, beta in 0.5f64..3.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let fams = [
                Modulus::power(alpha).unwrap(),
                Modulus::InverseLog,
                Modulus::log_power(beta).unwrap(),
                Modulus::table(vec![0.01, 0.1, 0.6], vec![0.05, 0.3, 0.9]).unwrap(),
                Modulus::max_of(Modulus::power(alpha).unwrap(), Modulus::InverseLog),
            ];
            for m in &fams {
                let (x, y) = (m.evaluate(lo).unwrap(), m.evaluate(hi).unwrap());
                prop_assert!(x >= 0.0);
                prop_assert!(x <= y + 1e-15, "{m:?}: {x} > {y}");
            }
        }
    }
}
