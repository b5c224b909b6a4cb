//! Deterministic low-discrepancy sampling (the additive `R_d` sequence).

use crate::point::Point;
use crate::scalar::Real;

/// Default sequence offset used by the experiments and the CLI.
pub const DEFAULT_SEED: u64 = 42;

/// The `R_d` sequence: `frac(1/2 + k * (phi_d^{-1}, ..., phi_d^{-d}))`, where
/// `phi_d` is the positive root of `x^{d+1} = x + 1`.
#[derive(Debug, Clone)]
pub struct Rd {
    alpha: Vec<f64>,
    index: u64,
}

impl Rd {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "R_d needs at least one dimension");
        let mut g = 2.0f64;
        for _ in 0..64 {
            g = (1.0 + g).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|i| g.powi(-(i as i32)).fract()).collect();
        Self { alpha, index: seed }
    }

    /// Next point of `[0, 1)^d`.
    pub fn next_unit(&mut self) -> Vec<f64> {
        self.index += 1;
        let k = self.index as f64;
        self.alpha.iter().map(|a| (0.5 + k * a).fract()).collect()
    }
}

/// `count` quasi-random points in the open ball `|x| < radius` of R^n,
/// obtained by rejection from the enclosing cube.
pub fn ball_points<T: Real>(n: usize, radius: T, count: usize, seed: u64) -> Vec<Point<T>> {
    ball_points_where(n, radius, count, seed, |_| true)
}

/// As [`ball_points`], keeping only points accepted by `keep`. Gives up after
/// a bounded number of draws, so fewer than `count` points may be returned.
pub fn ball_points_where<T: Real>(n: usize, radius: T, count: usize, seed: u64, keep: impl Fn(&Point<T>) -> bool) -> Vec<Point<T>> {
    let mut seq = Rd::new(n, seed);
    let mut out = Vec::with_capacity(count);
    let budget = 64 * count.max(16);
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let u = seq.next_unit();
        let c: Vec<T> = u.iter().map(|&v| T::of(2.0 * v - 1.0)).collect();
        let p = Point::new(&c);
        if p.norm_sq() >= T::one() {
            continue;
        }
        let p = p.scale(radius);
        if keep(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rd_is_deterministic_and_in_unit_cube() {
        let a: Vec<_> = (0..100).scan(Rd::new(3, 42), |s, _| Some(s.next_unit())).collect();
        let b: Vec<_> = (0..100).scan(Rd::new(3, 42), |s, _| Some(s.next_unit())).collect();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn golden_ratio_in_one_dimension() {
        let s = Rd::new(1, 0);
        assert!((s.alpha[0] - 0.6180339887498949).abs() < 1e-14);
    }

    #[test]
    fn ball_points_inside_and_spread() {
        let pts: Vec<Point<f64>> = ball_points(3, 0.5, 500, 42);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|p| p.norm() < 0.5));
        let mean_z: f64 = pts.iter().map(|p| p[2]).sum::<f64>() / 500.0;
        assert!(mean_z.abs() < 0.02);
    }
}
