//! Single-layer potentials with Dini-continuous data on graph interfaces
//! inside a ball.
//!
//! The solution of `Δu = g dH^{n-1}⌞Γ` in `B_r` with zero boundary values is
//! evaluated through the explicit Green's function of the ball. On top of that
//! the crate provides moduli of continuity with a numerical Dini classifier,
//! gradient blow-up scans for non-Dini data, a perturbation ratio comparing
//! curved and flat interfaces, and a Campanato-type iteration producing
//! one-sided affine approximations at the origin.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases fix the scalar to `f64`.

pub mod campanato;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod greens;
pub mod modulus;
pub mod point;
pub mod potential;
pub mod quadrature;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{
    make_density, make_interface, DensityFamily, FamilyDescriptor, FamilyParams, Interface, InterfaceFamily, InterfaceGraph,
    Side, SphereInterface, SurfaceDensity,
};
pub use greens::{BallContext, SphereGrid};
pub use modulus::{classify_dini, series_check, DiniClassification, Modulus, Verdict};
pub use point::Point;
pub use potential::{LayerProblem, LinearPolynomial};
pub use quadrature::{Estimate, Integrator, QuadratureSpec};
pub use scalar::Real;

pub type PointF64 = Point<f64>;
pub type ModulusF64 = Modulus<f64>;
pub type InterfaceGraphF64 = InterfaceGraph<f64>;
pub type SurfaceDensityF64 = SurfaceDensity<f64>;
pub type BallContextF64 = BallContext<f64>;
pub type QuadratureSpecF64 = QuadratureSpec<f64>;
pub type LayerProblemF64 = LayerProblem<f64>;
pub type LinearPolynomialF64 = LinearPolynomial<f64>;
