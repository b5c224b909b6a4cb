//! Small fixed-capacity points in R^2 or R^3.
//!
//! The last active coordinate is always the normal direction `x_n`; the
//! leading `n - 1` coordinates are the tangential part `x'`. Inactive slots
//! are kept at zero so norms and dot products can run over all three slots.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::scalar::Real;

/// Maximum supported ambient dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    xs: [T; MAX_DIM],
    dim: usize,
}

impl<T: Real> Point<T> {
    /// Builds a point from its coordinates. Panics if more than three are given.
    pub fn new(coords: &[T]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension must be 1..=3"
        );
        let mut xs = [T::zero(); MAX_DIM];
        xs[..coords.len()].copy_from_slice(coords);
        Self {
            xs,
            dim: coords.len(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self {
            xs: [T::zero(); MAX_DIM],
            dim,
        }
    }

    /// The `i`-th unit vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.xs[i] = T::one();
        p
    }

    /// Joins a tangential part `x'` and a normal coordinate `x_n`.
    pub fn lift(tangential: &Point<T>, normal: T) -> Self {
        let mut p = Self::zero(tangential.dim + 1);
        p.xs[..tangential.dim].copy_from_slice(&tangential.xs[..tangential.dim]);
        p.xs[tangential.dim] = normal;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.xs[..self.dim]
    }

    /// All three slots, inactive ones zero.
    #[inline]
    pub fn raw(&self) -> [T; MAX_DIM] {
        self.xs
    }

    /// Normal coordinate `x_n`.
    #[inline]
    pub fn normal(&self) -> T {
        self.xs[self.dim - 1]
    }

    /// Tangential part `x'` as an `(n-1)`-dimensional point.
    pub fn tangential(&self) -> Point<T> {
        assert!(self.dim >= 2, "tangential part needs n >= 2");
        let mut p = Self::zero(self.dim - 1);
        p.xs[..self.dim - 1].copy_from_slice(&self.xs[..self.dim - 1]);
        p
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.xs[0] * other.xs[0] + self.xs[1] * other.xs[1] + self.xs[2] * other.xs[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self {
            xs: [self.xs[0] * s, self.xs[1] * s, self.xs[2] * s],
            dim: self.dim,
        }
    }

    pub fn with(&self, i: usize, value: T) -> Self {
        let mut p = *self;
        p.xs[i] = value;
        p
    }

    pub fn is_finite(&self) -> bool {
        self.xs.iter().all(|v| v.is_finite())
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        Self {
            xs: [self.xs[0] + o.xs[0], self.xs[1] + o.xs[1], self.xs[2] + o.xs[2]],
            dim: self.dim,
        }
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        Self {
            xs: [self.xs[0] - o.xs[0], self.xs[1] - o.xs[1], self.xs[2] - o.xs[2]],
            dim: self.dim,
        }
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.xs[i]
    }
}
